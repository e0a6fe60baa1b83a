int i, x, y;
int a[100000], b[50000];

main()
{
    x = user_input();
    y = user_input();

    for (i = 0; i < 50000; i++) {
        a[i] = x;
        b[i] = y;
        a[i + 50000] = x * 2;
        x++;
        y++;
    }

    for (i = 0; i < 50000; i++) {
        assert(a[i] * 2 == a[i + 50000]);
    }
}
