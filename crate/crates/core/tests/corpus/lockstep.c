int x = 0;
int y = 0;
while (x < 30) {
    x++;
    y++;
}
assert(y == 30);
