/* Array of structures with fields p and q, flattened to two arrays. */
int a_p[100000], a_q[100000];
int i, k;

main()
{
    for (i = 0; i < 100000; i++) {
        k = i;
        a_p[i] = k;
        a_q[i] = k * k;
    }

    for (i = 0; i < 100000; i++) {
        assert(a_q[i] == a_p[i] * a_p[i]);
    }
}
