int x = 0;
int x_new = unknown();
while (2 * x_new == x + 2) {
    x = x_new;
    x_new = unknown();
}
