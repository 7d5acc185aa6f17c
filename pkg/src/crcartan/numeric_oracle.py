"""Finite-difference oracle for the base invariants.

Rebuilds the adapted frame and the scalars k, ell, P, B0, H0, W0, J0bar,
Rcore at one real point of the surface using only floating-point central
differences of the graphing function, never the symbolic derivative
engine. Wirtinger derivatives come from the real partials,

    d/dz = (d/dx - i d/dy)/2,    d/dzbar = (d/dx + i d/dy)/2,

and every frame derivative is a nested central difference with a fixed
step on a common evaluation lattice, so memoizing on integer lattice
offsets keeps the cost polynomial in the derivative depth.
"""

from mpmath import mp

ORACLE_NAMES = ("k", "ell", "P", "B0", "H0", "W0", "J0bar", "Rcore")


def _memoized(fn):
    memo = {}

    def g(off):
        val = memo.get(off)
        if val is None:
            val = fn(off)
            memo[off] = val
        return val

    return g


class NumericOracle:
    """Evaluate the base invariants at real points by finite differences.

    F is the graphing rational function on the five-variable registry;
    step is the central-difference step; dps the mpmath working digits.
    The derivative depth reaches six, so the truncation error is about
    step squared per level and the default settings leave comfortable
    room under a 1e-6 relative tolerance.
    """

    names = ORACLE_NAMES

    def __init__(self, F, step="1e-5", dps=80):
        self.F = F
        self.step = step
        self.dps = dps

    def values(self, point):
        """Invariant values at point = (x1, y1, x2, y2, v), as complexes."""
        with mp.workdps(self.dps):
            funcs = self._build(point)
            origin = (0, 0, 0, 0, 0)
            return {nm: complex(funcs[nm](origin)) for nm in self.names}

    def _build(self, point):
        h = mp.mpf(self.step)
        base = [mp.mpf(c) for c in point]
        I = mp.mpc(0, 1)
        num, den = self.F.num, self.F.den

        def q2f(q):
            return mp.mpf(int(q.numerator)) / mp.mpf(int(q.denominator))

        def conv(pair):
            return mp.mpc(q2f(pair[0]), q2f(pair[1]))

        def fval(off):
            x1 = base[0] + off[0] * h
            y1 = base[1] + off[1] * h
            x2 = base[2] + off[2] * h
            y2 = base[3] + off[3] * h
            v = base[4] + off[4] * h
            zs = (mp.mpc(x1, y1), mp.mpc(x2, y2), mp.mpc(x1, -y1),
                  mp.mpc(x2, -y2), v)
            return num.eval_with(zs, conv) / den.eval_with(zs, conv)

        F = _memoized(fval)

        def shift(off, j, s):
            out = list(off)
            out[j] += s
            return tuple(out)

        def partial(g, j):
            return _memoized(
                lambda off: (g(shift(off, j, 1)) - g(shift(off, j, -1))) / (2 * h)
            )

        def dz(g, which):
            dx, dy = partial(g, 2 * which), partial(g, 2 * which + 1)
            return _memoized(lambda off: (dx(off) - I * dy(off)) / 2)

        def dzb(g, which):
            dx, dy = partial(g, 2 * which), partial(g, 2 * which + 1)
            return _memoized(lambda off: (dx(off) + I * dy(off)) / 2)

        def dv(g):
            return partial(g, 4)

        def conjf(g):
            return _memoized(lambda off: mp.conj(g(off)))

        Fz1, Fz2, Fv = dz(F, 0), dz(F, 1), dv(F)
        A1 = _memoized(lambda off: -I * Fz1(off) / (1 + I * Fv(off)))
        A2 = _memoized(lambda off: -I * Fz2(off) / (1 + I * Fv(off)))
        A1b, A2b = conjf(A1), conjf(A2)

        def field(gz, coef):
            def op(g):
                dzg, dvg = gz(g), dv(g)
                return _memoized(lambda off: dzg(off) + coef(off) * dvg(off))

            return op

        L1 = field(lambda g: dz(g, 0), A1)
        L2 = field(lambda g: dz(g, 1), A2)
        L1b = field(lambda g: dzb(g, 0), A1b)
        L2b = field(lambda g: dzb(g, 1), A2b)

        l1_a1b, l1b_a1 = L1(A1b), L1b(A1)
        l2_a1b, l1b_a2 = L2(A1b), L1b(A2)
        ell = _memoized(lambda off: I * (l1_a1b(off) - l1b_a1(off)))
        k = _memoized(
            lambda off: -(l2_a1b(off) - l1b_a2(off))
            / (l1_a1b(off) - l1b_a1(off))
        )
        kb = conjf(k)

        def K(g):
            l1g, l2g = L1(g), L2(g)
            return _memoized(lambda off: k(off) * l1g(off) + l2g(off))

        def T(g):
            gv = dv(g)
            return _memoized(lambda off: ell(off) * gv(off))

        l1_ell, dv_a1 = L1(ell), dv(A1)
        P = _memoized(
            lambda off: (l1_ell(off) - ell(off) * dv_a1(off)) / ell(off)
        )
        Pb = conjf(P)

        lk = L1b(k)
        llk = L1b(lk)
        lllk = L1b(llk)
        lPb = L1b(Pb)

        B0 = _memoized(lambda off: llk(off) / lk(off) - Pb(off))
        H0 = _memoized(
            lambda off: -lllk(off) / lk(off) / 6
            + mp.mpf(2) / 9 * (llk(off) / lk(off)) ** 2
            + (llk(off) / lk(off)) * Pb(off) / 18
            + lPb(off) / 6
            - Pb(off) ** 2 / 9
        )

        k_llk, k_lk = K(llk), K(lk)
        l1_kb = L1(kb)
        l1_l1_kb = L1(l1_kb)
        l1_lk, t_k = L1(lk), T(k)
        W0 = _memoized(
            lambda off: -k_llk(off) / lk(off) ** 2 / 3
            + k_lk(off) * llk(off) / lk(off) ** 3 / 3
            + 2 * l1_l1_kb(off) / l1_kb(off) / 3
            + 2 * l1_lk(off) / lk(off) / 3
            + I * t_k(off) / lk(off) / 3
        )

        l1b_H0 = L1b(H0)
        J0bar = _memoized(
            lambda off: 4 * (llk(off) / lk(off)) * H0(off) / 3
            + 2 * Pb(off) * H0(off) / 3
            - l1b_H0(off)
        )

        l1b_W0 = L1b(W0)
        Rcore = _memoized(
            lambda off: -I * l1b_W0(off) / 2
            + I * (-llk(off) / lk(off) / 3 + Pb(off) / 3) * W0(off)
        )

        return {
            "k": k,
            "ell": ell,
            "P": P,
            "B0": B0,
            "H0": H0,
            "W0": W0,
            "J0bar": J0bar,
            "Rcore": Rcore,
        }
