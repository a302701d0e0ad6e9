// x and y drift apart without bound; their sum does not
int x = nondet();
int y = -x;
while (nondet()) {
    x++;
    y--;
}
assert(x + y <= 0);
