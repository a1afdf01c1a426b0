struct S { int a; long b; char c; double d; float f; };
struct S gs;
unsigned g1 = 29;
double g2;
int func(unsigned a0, unsigned a1, int a2)
{
    int i1 = 0;
    while (i1 < 1) {
        i1 = i1 + 1;
        if (17) {
            if (i1) {
                a1 += (i1 % ((a0 & 15) + 1));
                break;
            } else {
                int v3 = ((a2 / ((g1 & 15) + 1)) ? 40 : (!a2));
                gs.d = ((g2 / (1.5 * 1.5 + 1.0)) / ((double)(gs.a) * (double)(gs.a) + 1.0));
            }
        } else {
            unsigned long v4 = (i1 ^ (-i1));
            int i2 = 0;
            while (i2 < 3) {
                i2 = i2 + 1;
                gs.a = ((gs.c | gs.b) / (((a0 / ((a1 & 15) + 1)) & 15) + 1));
            }
        }
    }
    return i1;
}
