"""Lifted coframes over the structure group, torsion, and the final
structure equations.

A lower triangular matrix of group parameters acts on the rung triple
(rho, kappa, zeta) of the refinement chain, its conjugate acts on
(kappab, zetab).  Group parameters join the variable registry as formal
coordinates and their differentials join the coframe as members (dx is
the member name for the parameter x, so db is d of b while db the
variable is conj(d)).  Each lifted coframe is therefore square and the
exterior derivative needs no new machinery.  The reduction ladder:

    G10  g = [[c*cb, 0, 0], [b, c, 0], [d, e, f]]  over {rho0, kappa0, zeta0}
    G8   f = (c/cb) L1bar(k)                       over {rho0, kappa0, zetap0}
    G6   b = -i cb e + (i/3) c B0                  over {rho0, kappap0, zetap0}
    G4   d = -(i/2) cb e^2/c + i (c/cb) H0         over {rho0, kappap0, zetapp0}

(the i (c/cb) H0 part of d is exactly what the zetapp0 rung absorbs, so
the G4 matrix entry is -(i/2) cb e^2/c).  At every stage the Maurer-
Cartan matrix dg g^-1 wedge theta is subtracted from d theta; what is
left must be semibasic and its slot coefficients form the torsion
table.  The three normalizations above are re-derived by solving the
affine slot equation that pins the dropped parameter: K8 = 1 for f,
conj(R1) - 2 K6 + Z8 = 0 for b, i K3 - Z6 = 0 for d.

On the four-parameter stage the modified connection forms

    pi1 = alpha - a1 rho - (R1 - conj(K6)) kappa - R2 zeta - K6 kappab
    pi2 = beta - i Z1 rho - (a1 + K1) kappa - K2 zeta - K3 kappab - K4 zetab

with a1 = t - (i/2) Im Z2 and one free real parameter t absorb every
inessential slot, and the structure equations close with

    d rho   = (pi1 + conj(pi1)) ^ rho + i kappa ^ kappab
    d kappa = pi2 ^ rho + pi1 ^ kappa + zeta ^ kappab
    d zeta  = (pi1 - conj(pi1)) ^ zeta + i pi2 ^ kappa
              + R rho ^ zeta + J rho ^ kappab + W kappa ^ zeta

whose essential functions are R = Re Z2, J = Z3 = i J0bar/cb^3 and
W = -i K2 + Z5 - conj(Z8) = W0/c.  Slot letters and digits follow the
chain_coefficients convention of the invariants module.
"""

from dataclasses import dataclass
from fractions import Fraction
from random import Random

from .errors import CrcartanError
from .exterior_calculus import Coframe, DiffForm, exterior_d, wedge
from .invariants import _Jets, _coefficients, base_coframe, build_coframe_chain
from .reports import check_equal, check_true, check_zero
from .scalar_algebra import (
    GaussianRational,
    RationalFunction,
    VarRegistry,
    parse_expr,
)

STAGE_IDS = ("G10", "G8", "G6", "G4")

LIFTED_NAMES = ("rho", "kappa", "zeta", "kappab", "zetab")
LIFTED_CONJ = {
    "kappa": "kappab",
    "kappab": "kappa",
    "zeta": "zetab",
    "zetab": "zeta",
}

GROUP_CONJ = {
    "c": "cb",
    "cb": "c",
    "b": "bb",
    "bb": "b",
    "d": "db",
    "db": "d",
    "e": "eb",
    "eb": "e",
    "f": "fb",
    "fb": "f",
}

_STAGE_VARS = {
    "G10": ("c", "cb", "b", "bb", "d", "db", "e", "eb", "f", "fb"),
    "G8": ("c", "cb", "b", "bb", "d", "db", "e", "eb"),
    "G6": ("c", "cb", "d", "db", "e", "eb"),
    "G4": ("c", "cb", "e", "eb"),
}

# (m00, m10, m11, m20, m21, m22) of the lower triangular action
_MATRIX_TEXT = {
    "G10": ("c*cb", "b", "c", "d", "e", "f"),
    "G8": ("c*cb", "b", "c", "d", "e", "c/cb"),
    "G6": ("c*cb", "-i*cb*e", "c", "d", "e", "c/cb"),
    "G4": ("c*cb", "-i*cb*e", "c", "-(i/2)*cb*e^2/c", "e", "c/cb"),
}

_CHAIN_INDEX = {"G10": 0, "G8": 1, "G6": 2, "G4": 3}

# expansion basis used by covariant_derivatives
ESTRUCTURE_NAMES = (
    "rho",
    "kappa",
    "zeta",
    "kappab",
    "zetab",
    "pi1",
    "pib1",
    "pi2",
    "pib2",
    "dt",
)
_ESTRUCTURE_CONJ = {
    "rho": "rho",
    "kappa": "kappab",
    "kappab": "kappa",
    "zeta": "zetab",
    "zetab": "zeta",
    "pi1": "pib1",
    "pib1": "pi1",
    "pi2": "pib2",
    "pib2": "pi2",
    "dt": "dt",
}


@dataclass
class MaurerCartanForms:
    """Entries of dg g^-1 over one lifted coframe.

    alpha is the (1,1) entry dc/c, beta the (1,0) entry; gamma, delta,
    epsilon are the zeta-row entries (2,1), (2,0), (2,2).  The (0,0)
    entry equals alpha + conj(alpha) and the strict upper triangle
    vanishes; both are asserted at build time.
    """

    alpha: DiffForm
    beta: DiffForm
    gamma: DiffForm
    delta: DiffForm
    epsilon: DiffForm


@dataclass
class GroupStage:
    """One rung of the reduction ladder.

    group_vars are the registry names of the live parameters (the G4
    registry additionally carries the real absorption parameter t).
    subs maps every eliminated parameter to its solved value over this
    stage's registry.  base is the chain coframe that was lifted,
    matrix the 3x3 group action over it, coframe the square lifted
    coframe (group differentials are members named d<var>), mc the
    Maurer-Cartan entries.
    """

    stage: str
    group_vars: tuple
    subs: dict
    registry: VarRegistry
    base: Coframe
    matrix: tuple
    coframe: Coframe
    mc: MaurerCartanForms


@dataclass
class TorsionTable:
    """Slot coefficients of the three torsion residuals.

    Letters name the residual row (R for rho, K for kappa, Z for zeta),
    digits the 2-form slot in the chain_coefficients order.  The rho row
    keeps only its first two slots; the conjugate slots are forced
    because d rho is real.
    """

    R1: RationalFunction
    R2: RationalFunction
    K1: RationalFunction
    K2: RationalFunction
    K3: RationalFunction
    K4: RationalFunction
    K5: RationalFunction
    K6: RationalFunction
    K7: RationalFunction
    K8: RationalFunction
    K9: RationalFunction
    Z1: RationalFunction
    Z2: RationalFunction
    Z3: RationalFunction
    Z4: RationalFunction
    Z5: RationalFunction
    Z6: RationalFunction
    Z7: RationalFunction
    Z8: RationalFunction
    Z9: RationalFunction


@dataclass
class ModifiedMC:
    """The two absorbed connection forms on the G4 stage."""

    pi1: DiffForm
    pi2: DiffForm


@dataclass
class CovariantTables:
    """dW, dJ, dR expanded over {rho..zetab, pi1, pib1, pi2, pib2, dt}.

    Each table maps an ESTRUCTURE_NAMES member to its coefficient.  p is
    the new scalar defined by the kappab slot of dW = 2p + 2iR.
    """

    dW: dict
    dJ: dict
    dR: dict
    p: RationalFunction


def _stage_registry(reg0, stage):
    gvars = _STAGE_VARS[stage]
    names = reg0.names + gvars
    if stage == "G4":
        names = names + ("t",)
    conj = {a: b for a, b in reg0.conj_names.items() if a != b}
    conj.update({a: GROUP_CONJ[a] for a in gvars})
    return VarRegistry(names, conj)


def _promote_row(row, reg):
    zero = RationalFunction.const(reg, 0)
    return tuple(x.promote(reg) for x in row) + (zero,) * (reg.nvars - len(row))


def _scaled_sum(pairs):
    out = None
    for s, row in pairs:
        part = tuple(s * x for x in row)
        out = part if out is None else tuple(a + b for a, b in zip(out, part))
    return out


def _lower_tri_inverse(g, reg):
    one = RationalFunction.const(reg, 1)
    zero = RationalFunction.const(reg, 0)
    a = g[0][0]
    b, c = g[1][0], g[1][1]
    d, e, f = g[2][0], g[2][1], g[2][2]
    return (
        (one / a, zero, zero),
        (-b / (a * c), one / c, zero),
        ((b * e - c * d) / (a * c * f), -e / (c * f), one / f),
    )


def _has_vertical(form):
    return any(j >= 5 for idx in form.terms for j in idx)


def _all_vertical(form):
    return all(j >= 5 for idx in form.terms for j in idx)


def _maurer_cartan(cf, g):
    ginv = _lower_tri_inverse(g, cf.registry)
    ent = [[cf.zero(1) for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for k in range(i + 1):
            if g[i][k].is_zero():
                continue
            dgik = cf.d_function(g[i][k])
            for j in range(k + 1):
                if not ginv[k][j].is_zero():
                    ent[i][j] = ent[i][j] + dgik * ginv[k][j]
    for i in range(3):
        for j in range(3):
            if not _all_vertical(ent[i][j]):
                raise CrcartanError("Maurer-Cartan entry has semibasic terms")
    if not (ent[0][0] - ent[1][1] - ent[1][1].conj()).is_zero():
        raise CrcartanError("Maurer-Cartan (0,0) entry is not alpha + conj(alpha)")
    return MaurerCartanForms(ent[1][1], ent[1][0], ent[2][1], ent[2][0], ent[2][2])


def build_stage(fd, stage):
    """Build one reduction stage for an accepted surface.

    stage is one of "G10", "G8", "G6", "G4".  Returns the GroupStage
    carrying the lifted coframe and the Maurer-Cartan entries; the
    solved values of already eliminated parameters are recorded in subs.
    """
    if stage not in _CHAIN_INDEX:
        raise ValueError("unknown stage %r" % (stage,))
    idx = _CHAIN_INDEX[stage]
    chain_cf = base_coframe(fd) if idx == 0 else build_coframe_chain(fd)[idx - 1]
    reg = _stage_registry(fd.registry, stage)
    q = lambda text: parse_expr(text, reg)

    m00, m10, m11, m20, m21, m22 = (q(t) for t in _MATRIX_TEXT[stage])
    zero = RationalFunction.const(reg, 0)
    one = RationalFunction.const(reg, 1)
    g = ((m00, zero, zero), (m10, m11, zero), (m20, m21, m22))

    rnm, knm, znm, kbnm, zbnm = chain_cf.names
    pr = {nm: _promote_row(chain_cf.rows[nm], reg) for nm in chain_cf.names}
    rows = {
        "rho": _scaled_sum([(m00, pr[rnm])]),
        "kappa": _scaled_sum([(m10, pr[rnm]), (m11, pr[knm])]),
        "zeta": _scaled_sum([(m20, pr[rnm]), (m21, pr[knm]), (m22, pr[znm])]),
        "kappab": _scaled_sum([(m10.conj(), pr[rnm]), (m11.conj(), pr[kbnm])]),
        "zetab": _scaled_sum(
            [(m20.conj(), pr[rnm]), (m21.conj(), pr[kbnm]), (m22.conj(), pr[zbnm])]
        ),
    }
    gvars = _STAGE_VARS[stage]
    diff_vars = gvars + (("t",) if stage == "G4" else ())
    names = LIFTED_NAMES + tuple("d" + v for v in diff_vars)
    for v in diff_vars:
        j = reg.index[v]
        rows["d" + v] = tuple(one if l == j else zero for l in range(reg.nvars))
    conj_pairs = dict(LIFTED_CONJ)
    conj_pairs.update({"d" + v: "d" + GROUP_CONJ[v] for v in gvars})
    cf = Coframe(reg, names, rows, conj_pairs)
    mc = _maurer_cartan(cf, g)

    subs = {}
    if stage != "G10":
        jets = _Jets(fd)
        subs["f"] = q("c/cb") * jets.lk.promote(reg)
        subs["fb"] = subs["f"].conj()
    if stage in ("G6", "G4"):
        subs["b"] = q("-i*cb*e") + q("(i/3)*c") * jets.B0.promote(reg)
        subs["bb"] = subs["b"].conj()
    if stage == "G4":
        subs["d"] = q("-(i/2)*cb*e^2/c") + q("i*c/cb") * jets.H0.promote(reg)
        subs["db"] = subs["d"].conj()

    return GroupStage(stage, gvars, subs, reg, chain_cf, g, cf, mc)


def _residuals(st):
    """d theta minus the Maurer-Cartan wedge, for the three lifted rows."""
    cf = st.coframe
    rho, kap, zet = (cf.basis_form(nm) for nm in ("rho", "kappa", "zeta"))
    mc = st.mc
    r_rho = cf.d_named("rho") - wedge(mc.alpha + mc.alpha.conj(), rho)
    r_kap = cf.d_named("kappa") - wedge(mc.beta, rho) - wedge(mc.alpha, kap)
    r_zet = (
        cf.d_named("zeta")
        - wedge(mc.delta, rho)
        - wedge(mc.gamma, kap)
        - wedge(mc.epsilon, zet)
    )
    return r_rho, r_kap, r_zet


def _pattern_residuals(st, p1, p2):
    """Residuals with candidate connection forms in the closed G4 pattern
    (delta = 0, gamma = i p2, epsilon = p1 - conj(p1))."""
    cf = st.coframe
    i_ = parse_expr("i", st.registry)
    rho, kap, zet = (cf.basis_form(nm) for nm in ("rho", "kappa", "zeta"))
    r_rho = cf.d_named("rho") - wedge(p1 + p1.conj(), rho)
    r_kap = cf.d_named("kappa") - wedge(p2, rho) - wedge(p1, kap)
    r_zet = (
        cf.d_named("zeta")
        - wedge(p1 - p1.conj(), zet)
        - wedge(p2, kap) * i_
    )
    return r_rho, r_kap, r_zet


_SLOT_PAIRS = (
    ("rho", "kappa"),
    ("rho", "zeta"),
    ("rho", "kappab"),
    ("rho", "zetab"),
    ("kappa", "zeta"),
    ("kappa", "kappab"),
    ("kappa", "zetab"),
    ("zeta", "kappab"),
    ("zeta", "zetab"),
)


def _extract(st, r_rho, r_kap, r_zet):
    for r in (r_rho, r_kap, r_zet):
        if _has_vertical(r):
            raise CrcartanError(
                "torsion residual at stage %s is not semibasic" % st.stage
            )
    slots = lambda r: [r.coefficient(a, b) for a, b in _SLOT_PAIRS]
    ks = slots(r_kap)
    zs = slots(r_zet)
    return TorsionTable(
        r_rho.coefficient("rho", "kappa"),
        r_rho.coefficient("rho", "zeta"),
        *ks,
        *zs,
    )


def _solve_affine(value, reg, name):
    """Solve value = 0 for the group parameter name; the slot must be
    affine in it and free of its conjugate."""
    cname = reg.conj_names[name]
    if value.depends_on(cname):
        raise CrcartanError("slot depends on %s, cannot solve for %s" % (cname, name))
    slope = value.partial(name)
    if slope.is_zero():
        raise CrcartanError("slot does not depend on %s" % name)
    if slope.depends_on(name):
        raise CrcartanError("slot is not affine in %s" % name)
    offset = value - RationalFunction.variable(reg, name) * slope
    if offset.depends_on(name):
        raise CrcartanError("slot is not affine in %s" % name)
    return -(offset / slope)


def _shape_checks(st, r_rho, table):
    i_ = parse_expr("i", st.registry)
    out = []
    for a, b in (("kappa", "zeta"), ("kappa", "zetab"), ("zeta", "kappab"), ("zeta", "zetab")):
        out.append(
            check_zero(
                "shape[rho:%s^%s]" % (a, b),
                "d rho has no %s^%s slot" % (a, b),
                r_rho.coefficient(a, b),
            )
        )
    out.append(
        check_equal(
            "shape[rho:kappa^kappab]",
            "the Levi slot of d rho is the imaginary unit",
            r_rho.coefficient("kappa", "kappab"),
            i_,
        )
    )
    out.append(
        check_zero(
            "shape[kappa:kappa^zetab]", "d kappa has no kappa^zetab slot", table.K7
        )
    )
    if st.stage != "G10":
        out.append(
            check_zero(
                "shape[kappa:zeta^zetab]", "d kappa has no zeta^zetab slot", table.K9
            )
        )
    return out


def _checks_g10(fd, st, table):
    reg = st.registry
    q = lambda text: parse_expr(text, reg)
    lk = _Jets(fd).lk.promote(reg)
    out = [
        check_equal(
            "torsion[K8]",
            "zeta^kappab slot of d kappa over the ten-parameter group",
            table.K8,
            q("c/(cb*f)") * lk,
        )
    ]
    u = table.K8 * q("f")
    if u.depends_on("f") or u.depends_on("fb"):
        out.append(
            check_true(
                "normalize[f]",
                "K8 = 1 solves to f = (c/cb) L1bar(k)",
                False,
                "K8 * f still depends on f",
            )
        )
    else:
        out.append(
            check_equal(
                "normalize[f]",
                "K8 = 1 solves to f = (c/cb) L1bar(k)",
                u,
                q("c/cb") * lk,
            )
        )
    return out


def _checks_g8(fd, st, table):
    reg = st.registry
    q = lambda text: parse_expr(text, reg)
    one = RationalFunction.const(reg, 1)
    B0 = _Jets(fd).B0.promote(reg)
    combo = table.R1.conj() - 2 * table.K6 + table.Z8
    solved = _solve_affine(combo, reg, "b")
    return [
        check_equal(
            "fixed[K8]", "zeta^kappab slot of d kappa stays 1", table.K8, one
        ),
        check_equal(
            "torsion[b-combo]",
            "conj(R1) - 2 K6 + Z8 displays the b parameter",
            combo,
            q("-3*i*b/(c*cb) + 3*e/c") - q("1/cb") * B0,
        ),
        check_equal(
            "normalize[b]",
            "conj(R1) - 2 K6 + Z8 = 0 solves to b = -i cb e + (i/3) c B0",
            solved,
            q("-i*cb*e") + q("(i/3)*c") * B0,
        ),
    ]


def _checks_g6(fd, st, table):
    reg = st.registry
    q = lambda text: parse_expr(text, reg)
    i_ = q("i")
    one = RationalFunction.const(reg, 1)
    jets = _Jets(fd)
    co = _coefficients(fd, jets)
    r2 = co["R2"].promote(reg)
    k3p = co["K3p"].promote(reg)
    h0 = jets.H0.promote(reg)
    combo = i_ * table.K3 - table.Z6
    solved = _solve_affine(combo, reg, "d")
    return [
        check_equal(
            "fixed[K8]", "zeta^kappab slot of d kappa stays 1", table.K8, one
        ),
        check_zero(
            "fixed[b-combo]",
            "conj(R1) - 2 K6 + Z8 vanishes after the b reduction",
            table.R1.conj() - 2 * table.K6 + table.Z8,
        ),
        check_equal(
            "torsion[R2]",
            "rho^zeta slot of d rho carries -(cb/c) L1(k)/L1bar(k)",
            table.R2,
            q("cb/c") * r2,
        ),
        check_equal(
            "relation[K5=R2]",
            "kappa^zeta slot of d kappa equals the rho^zeta slot of d rho",
            table.K5,
            table.R2,
        ),
        check_equal(
            "relation[Z9]",
            "zeta^zetab slot of d zeta equals -conj(R2)",
            table.Z9,
            -(table.R2.conj()),
        ),
        check_equal(
            "torsion[d-combo]",
            "i K3 - Z6 displays the d parameter over the dressed base slot",
            combo,
            q("-2*i*d/(c*cb)") + q("e^2/c^2") + q("i/cb^2") * k3p,
        ),
        check_equal(
            "normalize[d]",
            "i K3 - Z6 = 0 solves to d = -(i/2) cb e^2/c + i (c/cb) H0",
            solved,
            q("-(i/2)*cb*e^2/c") + q("i*c/cb") * h0,
        ),
    ]


def _checks_g4(fd, st, table):
    reg = st.registry
    cf = st.coframe
    q = lambda text: parse_expr(text, reg)
    i_ = q("i")
    one = RationalFunction.const(reg, 1)
    jets = _Jets(fd)
    co = _coefficients(fd, jets)
    up = lambda key: co[key].promote(reg)
    w0 = jets.W0.promote(reg)
    j0bar = jets.J0bar.promote(reg)
    rcore = jets.Rcore.promote(reg)

    out = [
        check_equal(
            "fixed[K8]", "zeta^kappab slot of d kappa stays 1", table.K8, one
        ),
        check_zero(
            "fixed[b-combo]",
            "conj(R1) - 2 K6 + Z8 vanishes after the b reduction",
            table.R1.conj() - 2 * table.K6 + table.Z8,
        ),
        check_zero(
            "fixed[d-combo]",
            "i K3 - Z6 vanishes after the d reduction",
            i_ * table.K3 - table.Z6,
        ),
        check_equal(
            "torsion[Z7]",
            "kappa^zetab slot of d zeta is -(e/cb) L1bar(conj k)/L1(conj k)",
            table.Z7,
            q("e/cb") * up("Rb2"),
        ),
        check_equal(
            "relation[K4]", "i K4 equals Z7", i_ * table.K4, table.Z7
        ),
        check_equal(
            "torsion[K2]",
            "rho^zeta slot of d kappa is i eb/cb + K2'/c",
            table.K2,
            q("i*eb/cb") + q("1/c") * up("K2p"),
        ),
        check_equal(
            "torsion[Z5]",
            "kappa^zeta slot of d zeta is (cb e/c^2) K5' + Z5'/c",
            table.Z5,
            q("cb*e/c^2") * up("K5p") + q("1/c") * up("Z5p"),
        ),
        check_equal(
            "torsion[Z8]",
            "zeta^kappab slot of d zeta is e/c + Z8'/cb - (c eb/cb^2) Z9'",
            table.Z8,
            q("e/c") + q("1/cb") * up("Z8p") - q("c*eb/cb^2") * up("Z9p"),
        ),
        check_equal(
            "essential[W]",
            "-i K2 + Z5 - conj(Z8) equals W0/c",
            -i_ * table.K2 + table.Z5 - table.Z8.conj(),
            q("1/c") * w0,
        ),
        check_equal(
            "essential[Z3]",
            "rho^kappab slot of d zeta equals i J0bar/cb^3",
            table.Z3,
            q("i/cb^3") * j0bar,
        ),
        check_zero(
            "essential[Z4]",
            "rho^zetab slot of d zeta vanishes after the d reduction",
            table.Z4,
        ),
        check_equal(
            "expansion[Z2]",
            "rho^zeta slot of d zeta expanded over the group monomials",
            table.Z2,
            q("i*e*eb/(c*cb)")
            + q("cb*e^2/c^3") * (q("-i/2") * up("R2p") + i_ * up("K5p"))
            + q("c*eb^2/cb^3") * (q("-i/2") * up("Z9p"))
            + q("e/c^2") * (up("K2p") + i_ * up("Z5p"))
            + q("eb/cb^2") * (i_ * up("Z8p"))
            + q("1/(c*cb)") * up("Z2pp"),
        ),
        check_equal(
            "essential[ReZ2]",
            "2 Re Z2 = i (e/c^2) W0 - i (eb/cb^2) conj(W0) + 2 Re Rcore/(c cb)",
            table.Z2 + table.Z2.conj(),
            i_ * q("e/c^2") * w0
            - i_ * q("eb/cb^2") * w0.conj()
            + q("1/(c*cb)") * (rcore + rcore.conj()),
        ),
        check_equal(
            "base[ReZ2]",
            "Re Z2'' equals Re Rcore on the base",
            co["Z2pp"] + co["Z2pp"].conj(),
            jets.Rcore + jets.Rcore.conj(),
        ),
        check_equal(
            "mc[alpha]", "alpha = dc/c", st.mc.alpha, cf.one_form({"dc": q("1/c")})
        ),
        check_equal(
            "mc[beta]",
            "beta = i e dc/c^2 - i e dcb/(c cb) - i de/c",
            st.mc.beta,
            cf.one_form(
                {"dc": q("i*e/c^2"), "dcb": q("-i*e/(c*cb)"), "de": q("-i/c")}
            ),
        ),
        check_equal(
            "mc[gamma]", "gamma = i beta", st.mc.gamma, st.mc.beta * i_
        ),
        check_zero("mc[delta]", "delta = 0", st.mc.delta),
        check_equal(
            "mc[epsilon]",
            "epsilon = alpha - conj(alpha)",
            st.mc.epsilon,
            st.mc.alpha - st.mc.alpha.conj(),
        ),
    ]
    ginv = _lower_tri_inverse(st.matrix, reg)
    want = (q("-(i/2)*cb*e^2/c^3"), q("-cb*e/c^2"), q("cb/c"))
    ok = all((ginv[2][j] - want[j]).is_zero() for j in range(3))
    out.append(
        check_true(
            "inverse[zetapp0]",
            "zetapp0 = -(i/2)(cb e^2/c^3) rho - (cb e/c^2) kappa + (cb/c) zeta",
            ok,
            "" if ok else "inverse zeta row differs",
        )
    )
    return out


_STAGE_CHECKS = {
    "G10": _checks_g10,
    "G8": _checks_g8,
    "G6": _checks_g6,
    "G4": _checks_g4,
}


def torsion(fd, stage):
    """Torsion table of one stage plus the checks that stage pins down.

    stage is a stage id or a prebuilt GroupStage.  Returns (table,
    checks): the extracted slot coefficients and the verification of
    every stated slot value, fixed point and normalization of the
    stage.  Raises CrcartanError if a residual fails to be semibasic.
    """
    st = stage if isinstance(stage, GroupStage) else build_stage(fd, stage)
    r_rho, r_kap, r_zet = _residuals(st)
    table = _extract(st, r_rho, r_kap, r_zet)
    checks = _shape_checks(st, r_rho, table)
    checks.extend(_STAGE_CHECKS[st.stage](fd, st, table))
    return table, checks


def _modified(st, table, drop_k6_term):
    reg = st.registry
    cf = st.coframe
    q = lambda text: parse_expr(text, reg)
    t = RationalFunction.variable(reg, "t")
    im_z2 = q("-i/2") * (table.Z2 - table.Z2.conj())
    a1 = t - q("i/2") * im_z2
    co1 = {
        "rho": a1,
        "kappa": table.R1 - table.K6.conj(),
        "zeta": table.R2,
        "kappab": table.K6,
    }
    if drop_k6_term:
        del co1["kappab"]
    co2 = {
        "rho": q("i") * table.Z1,
        "kappa": a1 + table.K1,
        "zeta": table.K2,
        "kappab": table.K3,
        "zetab": table.K4,
    }
    return ModifiedMC(st.mc.alpha - cf.one_form(co1), st.mc.beta - cf.one_form(co2))


def build_modified_mc(fd, stage=None, drop_k6_term=False):
    """The absorbed connection forms pi1, pi2 on the G4 stage.

    stage may be a prebuilt G4 GroupStage.  drop_k6_term removes the
    K6 kappab term from pi1; it exists for fault injection and must make
    verify_structure_equations fail on surfaces with K6 != 0.
    """
    st = stage if isinstance(stage, GroupStage) else build_stage(fd, "G4")
    if st.stage != "G4":
        raise ValueError("modified connection forms live on the G4 stage")
    table = _extract(st, *_residuals(st))
    return _modified(st, table, drop_k6_term)


def _random_gaussian(rng):
    re = Fraction(rng.randint(1, 6), rng.randint(1, 5)) * rng.choice((1, -1))
    im = Fraction(rng.randint(1, 6), rng.randint(1, 5)) * rng.choice((1, -1))
    return GaussianRational(re, im)


def verify_structure_equations(fd, stage=None, drop_k6_term=False, seed=7):
    """Check the closed structure equations on the G4 stage.

    Verifies the absorption bookkeeping, the three structure equations
    with R = Re Z2, J = Z3, W = -i K2 + Z5 - conj(Z8) (identically in
    the real parameter t), the identifications W = W0/c and
    J = i J0bar/cb^3, d o d = 0 for the three lifted forms, and the
    invariance of every essential slot combination under seeded random
    absorption shifts of pi1, pi2.  stage may be a prebuilt G4 stage.
    """
    st = stage if isinstance(stage, GroupStage) else build_stage(fd, "G4")
    if st.stage != "G4":
        raise ValueError("structure equations close on the G4 stage")
    cf = st.coframe
    reg = st.registry
    q = lambda text: parse_expr(text, reg)
    i_ = q("i")
    table = _extract(st, *_residuals(st))
    mmc = _modified(st, table, drop_k6_term)
    jets = _Jets(fd)

    rho, kap, zet, kab = (
        cf.basis_form(nm) for nm in ("rho", "kappa", "zeta", "kappab")
    )
    pi1, pi2 = mmc.pi1, mmc.pi2
    pi1b = pi1.conj()
    J = table.Z3
    W = -i_ * table.K2 + table.Z5 - table.Z8.conj()
    R = q("1/2") * (table.Z2 + table.Z2.conj())

    checks = [
        check_zero(
            "absorption[a5]",
            "kappa^zetab slot of d kappa vanishes, so pi1 needs no zetab term",
            table.K7,
        ),
        check_equal(
            "absorption[a3]",
            "kappa^zeta and rho^zeta slots agree on the zeta coefficient of pi1",
            table.K5,
            table.R2,
        ),
        check_zero(
            "structure[drho]",
            "d rho = (pi1 + conj(pi1)) ^ rho + i kappa ^ kappab",
            cf.d_named("rho") - wedge(pi1 + pi1b, rho) - wedge(kap, kab) * i_,
        ),
        check_zero(
            "structure[dkappa]",
            "d kappa = pi2 ^ rho + pi1 ^ kappa + zeta ^ kappab",
            cf.d_named("kappa")
            - wedge(pi2, rho)
            - wedge(pi1, kap)
            - wedge(zet, kab),
        ),
        check_zero(
            "structure[dzeta]",
            "d zeta = (pi1 - conj(pi1)) ^ zeta + i pi2 ^ kappa"
            " + R rho^zeta + J rho^kappab + W kappa^zeta",
            cf.d_named("zeta")
            - wedge(pi1 - pi1b, zet)
            - wedge(pi2, kap) * i_
            - wedge(rho, zet) * R
            - wedge(rho, kab) * J
            - wedge(kap, zet) * W,
        ),
        check_equal(
            "value[W]", "W = W0/c", W, q("1/c") * jets.W0.promote(reg)
        ),
        check_equal(
            "value[J]", "J = i J0bar/cb^3", J, q("i/cb^3") * jets.J0bar.promote(reg)
        ),
    ]
    for nm in ("rho", "kappa", "zeta"):
        checks.append(
            check_zero(
                "d2[%s]" % nm,
                "d o d vanishes on the lifted %s" % nm,
                exterior_d(cf.d_named(nm)),
            )
        )

    rng = Random(seed)
    shift1 = cf.one_form(
        {nm: RationalFunction.const(reg, _random_gaussian(rng)) for nm in LIFTED_NAMES}
    )
    shift2 = cf.one_form(
        {nm: RationalFunction.const(reg, _random_gaussian(rng)) for nm in LIFTED_NAMES}
    )
    pt = _extract(st, *_pattern_residuals(st, pi1 - shift1, pi2 - shift2))
    checks.extend(
        [
            check_equal(
                "invariance[b-combo]",
                "conj(R1) - 2 K6 + Z8 unchanged under random absorption shifts",
                pt.R1.conj() - 2 * pt.K6 + pt.Z8,
                table.R1.conj() - 2 * table.K6 + table.Z8,
            ),
            check_equal(
                "invariance[d-combo]",
                "i K3 - Z6 unchanged under random absorption shifts",
                i_ * pt.K3 - pt.Z6,
                i_ * table.K3 - table.Z6,
            ),
            check_equal(
                "invariance[W]",
                "-i K2 + Z5 - conj(Z8) unchanged under random absorption shifts",
                -i_ * pt.K2 + pt.Z5 - pt.Z8.conj(),
                W,
            ),
            check_equal(
                "invariance[J]",
                "Z3 unchanged under random absorption shifts",
                pt.Z3,
                J,
            ),
            check_equal(
                "invariance[R]",
                "Re Z2 unchanged under random absorption shifts",
                pt.Z2 + pt.Z2.conj(),
                table.Z2 + table.Z2.conj(),
            ),
        ]
    )
    return checks


def _conj_map(m):
    return {_ESTRUCTURE_CONJ[nm]: v.conj() for nm, v in m.items()}


def covariant_derivatives(fd, stage=None):
    """Expand dW, dJ, dR over {rho..zetab, pi1, pib1, pi2, pib2, dt}.

    Returns (CovariantTables, checks).  The checks verify the stated
    constrained slots (dW: pi1 -> -W, pi2/pib1/pib2 -> 0,
    zetab -> -2 conj(W); dJ: pib1 -> -3J, pi1/pi2/pib2/zetab -> 0;
    dR: pi1 and pib1 -> -R, pi2 -> -W/2, pib2 -> -conj(W)/2) and that
    nothing depends on dt.  The unconstrained slots stay recorded in the
    tables; the kappab slot of dW defines p = (W_kappab - 2iR)/2.
    stage may be a prebuilt G4 stage.
    """
    st = stage if isinstance(stage, GroupStage) else build_stage(fd, "G4")
    if st.stage != "G4":
        raise ValueError("covariant derivatives live on the G4 stage")
    cf = st.coframe
    reg = st.registry
    q = lambda text: parse_expr(text, reg)
    i_ = q("i")
    table = _extract(st, *_residuals(st))
    jets = _Jets(fd)

    w0 = jets.W0.promote(reg)
    j0bar = jets.J0bar.promote(reg)
    rcore = jets.Rcore.promote(reg)
    W = q("1/c") * w0
    J = q("i/cb^3") * j0bar
    R = q("1/2") * (
        i_ * q("e/c^2") * w0
        - i_ * q("eb/cb^2") * w0.conj()
        + q("1/(c*cb)") * (rcore + rcore.conj())
    )
    checks = [
        check_equal(
            "covariant[W-form]",
            "extracted W agrees with its closed form W0/c",
            -i_ * table.K2 + table.Z5 - table.Z8.conj(),
            W,
        ),
        check_equal(
            "covariant[J-form]",
            "extracted J agrees with its closed form i J0bar/cb^3",
            table.Z3,
            J,
        ),
        check_equal(
            "covariant[R-form]",
            "extracted Re Z2 agrees with its closed form",
            q("1/2") * (table.Z2 + table.Z2.conj()),
            R,
        ),
    ]

    t = RationalFunction.variable(reg, "t")
    im_z2 = q("-i/2") * (table.Z2 - table.Z2.conj())
    a1 = t - q("i/2") * im_z2
    a2 = table.R1 - table.K6.conj()
    a3 = table.R2
    a4 = table.K6
    c_, cb_, e_ = q("c"), q("cb"), q("e")
    dc_map = {
        "pi1": c_,
        "rho": c_ * a1,
        "kappa": c_ * a2,
        "zeta": c_ * a3,
        "kappab": c_ * a4,
    }
    dcb_map = _conj_map(dc_map)
    beta_map = {
        "pi2": RationalFunction.const(reg, 1),
        "rho": i_ * table.Z1,
        "kappa": a1 + table.K1,
        "zeta": table.K2,
        "kappab": table.K3,
        "zetab": table.K4,
    }
    de_map = {}
    for src, scale in ((beta_map, i_ * c_), (dc_map, e_ / c_), (dcb_map, -(e_ / cb_))):
        for nm, v in src.items():
            cur = de_map.get(nm)
            sv = scale * v
            de_map[nm] = sv if cur is None else cur + sv
    subst = {
        "dc": dc_map,
        "dcb": dcb_map,
        "de": de_map,
        "deb": _conj_map(de_map),
    }

    zero = RationalFunction.const(reg, 0)

    def expand(fn):
        out = {nm: zero for nm in ESTRUCTURE_NAMES}
        for idx, cval in cf.d_function(fn).terms.items():
            nm = cf.names[idx[0]]
            if nm in subst:
                for tnm, tv in subst[nm].items():
                    out[tnm] = out[tnm] + cval * tv
            else:
                out[nm] = out[nm] + cval
        return out

    dW = expand(W)
    dJ = expand(J)
    dR = expand(R)
    p_val = q("1/2") * (dW["kappab"] - 2 * i_ * R)

    stated = (
        ("W", dW, "pi1", -W),
        ("W", dW, "pib1", zero),
        ("W", dW, "pi2", zero),
        ("W", dW, "pib2", zero),
        ("W", dW, "zetab", -2 * W.conj()),
        ("W", dW, "dt", zero),
        ("J", dJ, "pi1", zero),
        ("J", dJ, "pib1", -3 * J),
        ("J", dJ, "pi2", zero),
        ("J", dJ, "pib2", zero),
        ("J", dJ, "zetab", zero),
        ("J", dJ, "dt", zero),
        ("R", dR, "pi1", -R),
        ("R", dR, "pib1", -R),
        ("R", dR, "pi2", q("-1/2") * W),
        ("R", dR, "pib2", q("-1/2") * W.conj()),
        ("R", dR, "dt", zero),
    )
    for letter, tab, slot, want in stated:
        checks.append(
            check_equal(
                "covariant[%s:%s]" % (letter, slot),
                "%s slot of d%s" % (slot, letter),
                tab[slot],
                want,
            )
        )
    return CovariantTables(dW, dJ, dR, p_val), checks
