"""Closed-form oracle for the two-triangle tuning family.

Vertices P1..P6, P1 at the origin, P4 = (mu, 0).  Triangle P1P2P3 rotates
rigidly about P1 with P3 at angle alpha; P6 is placed on the circle
intersection around P3 and P4 (law of cosines), P5 rigidly from P4, P6.
The free edge is P2P5.  A max/min merge is a solution of
d/dalpha f = d2/dalpha2 f = 0 in (alpha, mu), which is reparametrization
invariant at a critical point.

Prints frozen values used by the C++ tests.
"""
import mpmath as mp

mp.mp.dps = 40


def place(a, b, ra, rb, side):
    # point at distance ra from a and rb from b, on the given side of a->b
    dx, dy = b[0] - a[0], b[1] - a[1]
    d = mp.sqrt(dx * dx + dy * dy)
    x = (ra * ra - rb * rb + d * d) / (2 * d)
    h = mp.sqrt(ra * ra - x * x)
    ux, uy = dx / d, dy / d
    return (a[0] + x * ux - side * h * uy, a[1] + x * uy + side * h * ux)


def side_of(a, b, c):
    return mp.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


class Family:
    def __init__(self, P):
        P = [(mp.mpf(x), mp.mpf(y)) for x, y in P]
        L = lambda i, j: mp.sqrt((P[i][0] - P[j][0]) ** 2 + (P[i][1] - P[j][1]) ** 2)
        self.l12, self.l13, self.l23 = L(0, 1), L(0, 2), L(1, 2)
        self.l45, self.l46, self.l56 = L(3, 4), L(3, 5), L(4, 5)
        self.l36 = L(2, 5)
        self.s2 = side_of(P[0], P[2], P[1])   # P2 relative to P1->P3
        self.s6 = side_of(P[2], P[3], P[5])   # P6 relative to P3->P4
        self.s5 = side_of(P[3], P[5], P[4])   # P5 relative to P4->P6

    def config(self, alpha, mu):
        p1 = (mp.mpf(0), mp.mpf(0))
        p3 = (self.l13 * mp.cos(alpha), self.l13 * mp.sin(alpha))
        p2 = place(p1, p3, self.l12, self.l23, self.s2)
        p4 = (mu, mp.mpf(0))
        p6 = place(p3, p4, self.l36, self.l46, self.s6)
        p5 = place(p4, p6, self.l45, self.l56, self.s5)
        return p1, p2, p3, p4, p5, p6

    def f(self, alpha, mu):
        c = self.config(alpha, mu)
        return (c[1][0] - c[4][0]) ** 2 + (c[1][1] - c[4][1]) ** 2

    def merge(self, alpha0, mu0):
        F = lambda a, m: [mp.diff(lambda t: self.f(t, m), a, 1),
                          mp.diff(lambda t: self.f(t, m), a, 2)]
        return mp.findroot(F, (mp.mpf(alpha0), mp.mpf(mu0)))

    def extrema(self, mu, n=4000):
        d = lambda a: mp.diff(lambda t: self.f(t, mu), a)
        vals = [d(2 * mp.pi * k / n) for k in range(n)]
        out = []
        for k in range(n):
            a, b = vals[k], vals[(k + 1) % n]
            if a * b < 0:
                r = mp.findroot(d, (2 * mp.pi * k / n, 2 * mp.pi * (k + 1) / n), solver='anderson')
                out.append(("max" if a > 0 else "min", r % (2 * mp.pi), mp.sqrt(self.f(r, mu))))
        return out


reference = [(0, 0), (0.99555, 1.378), (0, 2.5), (1, 0), (0.54036, 1.7403), (2.2906, 2.7082)]
# two congruent triangles (P4P5P6 is P1P2P3 reflected through x = 0.5)
congruent = [(0, 0), (0.99555, 1.378), (0, 2.5), (1, 0), (0.00445, 1.378), (1, 2.5)]

if __name__ == "__main__":
    fam = Family(reference)
    print("reference family lengths", [mp.nstr(x, 17) for x in
          (fam.l12, fam.l13, fam.l23, fam.l45, fam.l46, fam.l56, fam.l36)])
    for mu in (1.0, 0.3):
        print("mu", mu, [(k, mp.nstr(a, 8), mp.nstr(l, 8)) for k, a, l in fam.extrema(mu, 720)])
    a, m = fam.merge(4.455, 0.498)
    print("reference merge alpha", mp.nstr(a, 17), "mu", mp.nstr(m, 17),
          "length", mp.nstr(mp.sqrt(fam.f(a, m)), 17))
