int a = 1;
int b = 2;
int t = 0;
int n = 0;
while (n < 7) {
    t = a;
    a = b;
    b = t;
    n++;
}
assert(a <= 2);
assert(b >= 1);
