"""Surface-level CR geometry: adapted frame, class membership, brackets.

A surface u = F(z1, z2, zb1, zb2, v) is carried by its graphing function F,
an exact rational function that must be real and vanish at the origin. The
adapted tangent frame is

    L1 = d/dz1 + A1 d/dv,   L2 = d/dz2 + A2 d/dv,   Ai = -i F_{zi}/(1 + i F_v),

with conjugates L1bar, L2bar. The degenerate direction is K = k L1 + L2, the
real transversal is T = ell d/dv, and the two fundamental scalars are

    ell = i (L1(A1bar) - L1bar(A1)),
    k   = - (L2(A1bar) - L1bar(A2)) / (L1(A1bar) - L1bar(A1)),
    P   = (ell_z1 + A1 ell_v - ell A1_v) / ell.

Membership in the studied class demands: Levi determinant identically zero,
Levi (1,1) entry nowhere zero (checked as: not identically zero, nonzero at
the origin), and L1bar(k) nowhere zero (same reading).
"""

from dataclasses import dataclass

from .errors import FrameError, MembershipError, PoleError
from .reports import Check, check_zero
from .scalar_algebra import GR_I, GaussianRational, RationalFunction


class VectorField:
    """Derivation with rational-function coefficients over one registry."""

    __slots__ = ("registry", "coeffs")

    def __init__(self, registry, coeffs):
        self.registry = registry
        self.coeffs = {nm: c for nm, c in coeffs.items() if not c.is_zero()}

    @classmethod
    def basis(cls, registry, name):
        return cls(registry, {name: RationalFunction.const(registry, 1)})

    def coeff(self, name):
        c = self.coeffs.get(name)
        if c is None:
            return RationalFunction.const(self.registry, 0)
        return c

    def apply(self, f):
        """Directional derivative of a rational function."""
        out = RationalFunction.const(self.registry, 0)
        for nm, c in self.coeffs.items():
            if f.depends_on(nm):
                out = out + c * f.partial(nm)
        return out

    def __add__(self, other):
        out = dict(self.coeffs)
        for nm, c in other.coeffs.items():
            out[nm] = out[nm] + c if nm in out else c
        return VectorField(self.registry, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return VectorField(self.registry, {nm: -c for nm, c in self.coeffs.items()})

    def scale(self, f):
        return VectorField(self.registry, {nm: f * c for nm, c in self.coeffs.items()})

    def conj(self):
        reg = self.registry
        return VectorField(
            reg, {reg.conj_names[nm]: c.conj() for nm, c in self.coeffs.items()}
        )

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return (self - other).is_zero()

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for nm in self.registry.names:
            if nm in self.coeffs:
                parts.append("(%s)*d/d%s" % (self.coeffs[nm], nm))
        return " + ".join(parts)

    def __repr__(self):
        return "VectorField(%s)" % self


def lie_bracket(x, y):
    """[X, Y] acting on functions as X(Y(f)) - Y(X(f))."""
    out = {}
    names = set(x.coeffs) | set(y.coeffs)
    for nm in names:
        c = x.apply(y.coeff(nm)) - y.apply(x.coeff(nm))
        if not c.is_zero():
            out[nm] = c
    return VectorField(x.registry, out)


class Hypersurface:
    """A graphed surface u = F, validated to be real and centered."""

    __slots__ = ("F", "registry")

    def __init__(self, F):
        self.F = F
        self.registry = F.registry
        origin = {nm: GaussianRational(0) for nm in self.registry.names}
        try:
            f0 = F.eval_exact(origin)
        except PoleError:
            raise MembershipError("graphing function is undefined at the origin")
        if f0 != GaussianRational(0):
            raise MembershipError("graphing function must vanish at the origin")
        if not F.is_real():
            raise MembershipError("graphing function must be real")


@dataclass
class FrameData:
    """Adapted frame and fundamental scalars of an accepted surface."""

    hyp: Hypersurface
    A1: RationalFunction
    A2: RationalFunction
    L1: VectorField
    L2: VectorField
    T: VectorField
    K: VectorField
    L1bar: VectorField
    Kbar: VectorField
    ell: RationalFunction
    k: RationalFunction
    P: RationalFunction

    @property
    def registry(self):
        return self.hyp.registry

    def L2bar(self):
        return self.L2.conj()

    def varrho0_apply(self, x):
        """Contract the unscaled transversal form
        dv - A1 dz1 - A2 dz2 - A1bar dzb1 - A2bar dzb2 with a field."""
        out = x.coeff("v")
        out = out - self.A1 * x.coeff("z1")
        out = out - self.A2 * x.coeff("z2")
        out = out - self.A1.conj() * x.coeff("zb1")
        out = out - self.A2.conj() * x.coeff("zb2")
        return out


def _tangent_data(hyp):
    F = hyp.F
    reg = F.registry
    one = RationalFunction.const(reg, 1)
    i_ = RationalFunction.const(reg, GR_I)
    denom = one + i_ * F.partial("v")
    if denom.is_zero():
        raise FrameError("1 + i F_v is identically zero")
    A1 = -i_ * F.partial("z1") / denom
    A2 = -i_ * F.partial("z2") / denom
    L1 = VectorField(reg, {"z1": one, "v": A1})
    L2 = VectorField(reg, {"z2": one, "v": A2})
    return A1, A2, L1, L2


def _origin(reg):
    return {nm: GaussianRational(0) for nm in reg.names}


def _nowhere_zero(f, reg):
    """The operational reading of 'nowhere zero': not identically zero and
    nonzero at the origin.  Returns (ok, reason)."""
    if f.is_zero():
        return False, "identically zero"
    try:
        val = f.eval_exact(_origin(reg))
    except PoleError:
        return False, "undefined at the origin"
    if val.is_zero():
        return False, "vanishes at the origin"
    return True, ""


@dataclass
class ClassReport:
    """Levi data and the class-membership verdict for one surface."""

    levi: list
    det_levi_zero: bool
    entry11_nonzero: bool
    k: RationalFunction
    two_nondeg: bool
    reasons: list

    def accepted(self):
        return self.det_levi_zero and self.entry11_nonzero and self.two_nondeg


def classify(hyp):
    """Compute the Levi matrix through brackets and test class membership."""
    A1, A2, L1, L2 = _tangent_data(hyp)
    reg = hyp.registry
    i_ = RationalFunction.const(reg, GR_I)
    L1bar, L2bar = L1.conj(), L2.conj()

    def varrho0(x):
        out = x.coeff("v") - A1 * x.coeff("z1") - A2 * x.coeff("z2")
        out = out - A1.conj() * x.coeff("zb1") - A2.conj() * x.coeff("zb2")
        return out

    levi = [
        [
            varrho0(lie_bracket(L1, L1bar).scale(i_)),
            varrho0(lie_bracket(L2, L1bar).scale(i_)),
        ],
        [
            varrho0(lie_bracket(L1, L2bar).scale(i_)),
            varrho0(lie_bracket(L2, L2bar).scale(i_)),
        ],
    ]
    det = levi[0][0] * levi[1][1] - levi[0][1] * levi[1][0]
    det_zero = det.is_zero()
    reasons = []
    if not det_zero:
        reasons.append("Levi determinant is not identically zero")
    e11_ok, why = _nowhere_zero(levi[0][0], reg)
    if not e11_ok:
        reasons.append("Levi (1,1) entry %s" % why)
    k = RationalFunction.const(reg, 0)
    two_nondeg = False
    if e11_ok:
        k = -levi[0][1] / levi[0][0]
        lk = L1bar.apply(k)
        two_nondeg, why = _nowhere_zero(lk, reg)
        if not two_nondeg:
            reasons.append("L1bar(k) %s (2-degenerate)" % why)
    return ClassReport(levi, det_zero, e11_ok, k, two_nondeg, reasons)


def build_frame(hyp):
    """Build the adapted frame; raises MembershipError on a degenerate input."""
    A1, A2, L1, L2 = _tangent_data(hyp)
    reg = hyp.registry
    i_ = RationalFunction.const(reg, GR_I)
    one = RationalFunction.const(reg, 1)
    L1bar = L1.conj()
    A1bar, A2bar = A1.conj(), A2.conj()
    levi11_raw = L1.apply(A1bar) - L1bar.apply(A1)
    ell = i_ * levi11_raw
    ok, why = _nowhere_zero(ell, reg)
    if not ok:
        raise MembershipError("Levi (1,1) entry %s" % why)
    k = -(L2.apply(A1bar) - L1bar.apply(A2)) / levi11_raw
    T = VectorField(reg, {"v": ell})
    K = VectorField(reg, {"z1": k, "z2": one, "v": k * A1 + A2})
    P = (ell.partial("z1") + A1 * ell.partial("v") - ell * A1.partial("v")) / ell
    return FrameData(
        hyp=hyp,
        A1=A1,
        A2=A2,
        L1=L1,
        L2=L2,
        T=T,
        K=K,
        L1bar=L1bar,
        Kbar=K.conj(),
        ell=ell,
        k=k,
        P=P,
    )


def _field_check(cid, cite, lhs, rhs):
    diff = lhs - rhs
    if diff.is_zero():
        return Check(cid, cite, "pass")
    nm = next(iter(diff.coeffs))
    return Check(
        cid, cite, "fail", "coefficient of d/d%s differs: %s" % (nm, diff.coeffs[nm])
    )


def verify_bracket_table(fd):
    """Verify the ten bracket rows of the adapted frame."""
    T, L1, K = fd.T, fd.L1, fd.K
    L1bar, Kbar = fd.L1bar, fd.Kbar
    k, P = fd.k, fd.P
    kbar, Pbar = k.conj(), P.conj()
    reg = fd.registry
    i_ = RationalFunction.const(reg, GR_I)
    zero = VectorField(reg, {})

    def combo(*pairs):
        out = zero
        for c, x in pairs:
            out = out + x.scale(c)
        return out

    rows = [
        ("T,L1", combo((-P, T))),
        ("T,K", combo((L1.apply(k), T), (T.apply(k), L1))),
        ("T,L1bar", combo((-Pbar, T))),
        ("T,Kbar", combo((L1bar.apply(kbar), T), (T.apply(kbar), L1bar))),
        ("L1,K", combo((L1.apply(k), L1))),
        ("L1,L1bar", combo((-i_, T))),
        ("L1,Kbar", combo((L1.apply(kbar), L1bar))),
        ("K,L1bar", combo((-L1bar.apply(k), L1))),
        ("K,Kbar", zero),
        ("L1bar,Kbar", combo((L1bar.apply(kbar), L1bar))),
    ]
    fields = {"T": T, "L1": L1, "K": K, "L1bar": L1bar, "Kbar": Kbar}
    out = []
    for label, rhs in rows:
        a, b = label.split(",")
        lhs = lie_bracket(fields[a], fields[b])
        out.append(
            _field_check(
                "bracket[%s]" % label,
                "frame bracket [%s,%s] against its stated combination" % (a, b),
                lhs,
                rhs,
            )
        )
    return out


def verify_function_identities(fd):
    """Verify the six scalar identities tying K, Kbar to derivatives of k, P,
    plus the two-sided expansion of ell."""
    L1, K, L1bar, Kbar, T = fd.L1, fd.K, fd.L1bar, fd.Kbar, fd.T
    k, P = fd.k, fd.P
    kbar, Pbar = k.conj(), P.conj()
    reg = fd.registry
    i_ = RationalFunction.const(reg, GR_I)
    lk = L1bar.apply(k)
    llk = L1bar.apply(lk)
    lllk = L1bar.apply(llk)
    lkb = L1bar.apply(kbar)
    llkb = L1bar.apply(lkb)
    lllkb = L1bar.apply(llkb)
    checks = [
        check_zero(
            "identity[K(kbar)]",
            "K annihilates kbar",
            K.apply(kbar),
        ),
        check_zero(
            "identity[K(P)]",
            "K(P) + P L1(k) + L1(L1(k)) = 0",
            K.apply(P) + P * L1.apply(k) + L1.apply(L1.apply(k)),
        ),
        check_zero(
            "identity[K(Pbar)]",
            "K(Pbar) + P L1bar(k) + L1bar(L1(k)) + i T(k) = 0",
            K.apply(Pbar) + P * lk + L1bar.apply(L1.apply(k)) + i_ * T.apply(k),
        ),
        check_zero(
            "identity[Kbar(L1bar k)]",
            "Kbar(L1bar(k)) + L1bar(kbar) L1bar(k) = 0",
            Kbar.apply(lk) + lkb * lk,
        ),
        check_zero(
            "identity[Kbar(L1bar^2 k)]",
            "Kbar(L1bar^2(k)) + 2 L1bar(kbar) L1bar^2(k)"
            " + L1bar^2(kbar) L1bar(k) = 0",
            Kbar.apply(llk) + 2 * lkb * llk + llkb * lk,
        ),
        check_zero(
            "identity[Kbar(L1bar^3 k)]",
            "Kbar(L1bar^3(k)) + 3 L1bar(kbar) L1bar^3(k)"
            " + 3 L1bar^2(kbar) L1bar^2(k) + L1bar^3(kbar) L1bar(k) = 0",
            Kbar.apply(lllk) + 3 * lkb * lllk + 3 * llkb * llk + lllkb * lk,
        ),
    ]
    A1, A1bar = fd.A1, fd.A1.conj()
    four_term = i_ * (
        A1bar.partial("z1")
        + A1 * A1bar.partial("v")
        - A1.partial("zb1")
        - A1bar * A1.partial("v")
    )
    checks.append(
        check_zero(
            "identity[ell expansion]",
            "bracket form and four-term expansion of ell agree",
            fd.ell - four_term,
        )
    )
    return checks
