int x = nondet();
if (x >= 1 || x <= -1) {
    assert(x != 0);
}
