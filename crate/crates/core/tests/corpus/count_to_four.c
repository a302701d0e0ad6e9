int x = 0;
while (x != 4) x = x + 1;
assert(x == 4);
