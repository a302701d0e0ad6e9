int x = 0;
while (nondet()) {
    if (x <= 10) { x = x + 1; } else { x = 0; }
}
assert(x <= 11);
