int n = nondet();
int k = 0;
assume(n >= 0);
assume(n <= 50);
k = n;
while (k > 0) k--;
assert(k == 0);
