int x = 0;
int up = 1;
while (nondet()) {
    if (up == 1) {
        x++;
        if (x >= 20) up = 0;
    } else {
        x--;
        if (x <= 0) up = 1;
    }
}
assert(x <= 20);
assert(x >= 0);
