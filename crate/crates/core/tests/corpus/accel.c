int i = 0;
while (i < 1000000) i++;
assert(i == 1000000);
