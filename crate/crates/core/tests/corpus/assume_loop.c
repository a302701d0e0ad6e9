int x = 0;
int y = nondet();
assume(y >= 0);
assume(y <= 8);
while (x < y) x = x + 1;
assert(x <= 8);
