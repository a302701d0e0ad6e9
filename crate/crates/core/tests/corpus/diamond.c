int x = nondet();
int y = 0;
assume(x >= -3);
assume(x <= 3);
if (x > 0) { y = x; } else { y = -x; }
assert(y >= 0);
assert(y <= 3);
