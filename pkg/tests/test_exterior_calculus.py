"""Exterior calculus over named coframes.

Pinned values used below, derived by hand with Lie's formula
dw(X,Y) = X(w(Y)) - Y(w(X)) - w([X,Y]) applied to the frame bracket table:

  d rho0  = P rho0^kappa0 - L1(k) rho0^zeta0 + conj(P) rho0^kappab0
            - L1bar(conj(k)) rho0^zetab0 + i kappa0^kappab0
  d kappa0 = -T(k) rho0^zeta0 - L1(k) kappa0^zeta0 + L1bar(k) zeta0^kappab0
  d zeta0  = 0

On the model surface (1 - z2*zb2) * v = stuff, with
k = -(zb1 + z1*zb2)/(1 - z2*zb2):
  L1bar(k)       = -1/(1 - z2*zb2)
  L1bar(conj(k)) = -z2/(1 - z2*zb2)
which differ, so the zeta0^kappab0 coefficient pins L1bar(k), not its
conjugate partner.
"""

import pytest

from crcartan.cr_geometry import Hypersurface, build_frame
from crcartan.errors import SingularMatrixError
from crcartan.exterior_calculus import (
    Coframe,
    DiffForm,
    change_coframe,
    exterior_d,
    extract_coefficient,
    verify_darboux,
    wedge,
)
from crcartan.scalar_algebra import (
    GR_I,
    RationalFunction,
    base_registry,
    parse_expr,
)

M_LC = "(z1*zb1 + 1/2*z1^2*zb2 + 1/2*zb1^2*z2)/(1 - z2*zb2)"
M_TUBE_CUBIC = "(z1+zb1)^2/(2*(2+z2+zb2)) + (z1+zb1)^3/(2*(2+z2+zb2)^2)"

BASE_NAMES = ("rho0", "kappa0", "zeta0", "kappab0", "zetab0")
BASE_CONJ = {"kappa0": "kappab0", "kappab0": "kappa0",
             "zeta0": "zetab0", "zetab0": "zeta0"}


def frame(text):
    reg = base_registry()
    return build_frame(Hypersurface(parse_expr(text, reg)))


def base_coframe(fd):
    """rho0 = (dv - A1 dz1 - A2 dz2 - conj)/ell, kappa0 = dz1 - k dz2, zeta0 = dz2."""
    reg = fd.registry
    zero = RationalFunction.const(reg, 0)
    one = RationalFunction.const(reg, 1)
    inv_ell = one / fd.ell
    rows = {
        "rho0": (-fd.A1 * inv_ell, -fd.A2 * inv_ell,
                 -fd.A1.conj() * inv_ell, -fd.A2.conj() * inv_ell, inv_ell),
        "kappa0": (one, -fd.k, zero, zero, zero),
        "zeta0": (zero, one, zero, zero, zero),
        "kappab0": (zero, zero, one, -fd.k.conj(), zero),
        "zetab0": (zero, zero, zero, one, zero),
    }
    return Coframe(reg, BASE_NAMES, rows, BASE_CONJ)


def stated_base_table(fd, cf):
    i = RationalFunction.const(fd.registry, GR_I)
    P = fd.P
    l1k = fd.L1.apply(fd.k)
    tk = fd.T.apply(fd.k)
    l1bk = fd.L1bar.apply(fd.k)
    l1bkb = fd.L1bar.apply(fd.k.conj())
    d_rho = (
        cf.basis_form("rho0", "kappa0") * P
        - cf.basis_form("rho0", "zeta0") * l1k
        + cf.basis_form("rho0", "kappab0") * P.conj()
        - cf.basis_form("rho0", "zetab0") * l1bkb
        + cf.basis_form("kappa0", "kappab0") * i
    )
    d_kappa = (
        -cf.basis_form("rho0", "zeta0") * tk
        - cf.basis_form("kappa0", "zeta0") * l1k
        + cf.basis_form("zeta0", "kappab0") * l1bk
    )
    return {
        "rho0": d_rho,
        "kappa0": d_kappa,
        "zeta0": cf.zero(2),
        "kappab0": d_kappa.conj(),
        "zetab0": cf.zero(2),
    }


# ---------------------------------------------------------------------------
# Wedge algebra


def test_wedge_anticommutes():
    cf = base_coframe(frame(M_LC))
    rk = wedge(cf.basis_form("rho0"), cf.basis_form("kappa0"))
    kr = wedge(cf.basis_form("kappa0"), cf.basis_form("rho0"))
    assert rk == -kr
    assert not rk.is_zero()


def test_wedge_repeated_factor_zero():
    cf = base_coframe(frame(M_LC))
    r = cf.basis_form("rho0")
    k = cf.basis_form("kappa0")
    assert wedge(r + k, r) == wedge(k, r)
    assert wedge(r, r).is_zero()


def test_wedge_degree_overflow_is_zero():
    cf = base_coframe(frame(M_LC))
    top = cf.basis_form(*BASE_NAMES)
    assert not top.is_zero()
    assert wedge(top, cf.basis_form("rho0")).is_zero()


def test_wedge_graded_sign():
    cf = base_coframe(frame(M_LC))
    a = wedge(cf.basis_form("rho0"), cf.basis_form("kappa0"))
    b = cf.basis_form("zeta0")
    # (2-form) ^ (1-form) = (-1)^(2*1) (1-form) ^ (2-form)
    assert wedge(a, b) == wedge(b, a)


def test_basis_form_parity():
    cf = base_coframe(frame(M_LC))
    assert cf.basis_form("kappa0", "rho0") == -cf.basis_form("rho0", "kappa0")
    assert cf.basis_form("rho0", "rho0").is_zero()


# ---------------------------------------------------------------------------
# Duality and d on functions


def test_dual_frame_matches_frame_fields():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    assert cf.dual_field("rho0") == fd.T
    assert cf.dual_field("kappa0") == fd.L1
    assert cf.dual_field("zeta0") == fd.K
    assert cf.dual_field("kappab0") == fd.L1bar
    assert cf.dual_field("zetab0") == fd.Kbar


def test_d_function_frame_expansion():
    # dG = T(G) rho0 + L1(G) kappa0 + K(G) zeta0 + conj-direction terms
    fd = frame(M_TUBE_CUBIC)
    cf = base_coframe(fd)
    g = parse_expr("z1*zb1 + v*z2 - i*zb2^2", fd.registry)
    dg = cf.d_function(g)
    assert dg.coefficient("rho0") == fd.T.apply(g)
    assert dg.coefficient("kappa0") == fd.L1.apply(g)
    assert dg.coefficient("zeta0") == fd.K.apply(g)
    assert dg.coefficient("kappab0") == fd.L1bar.apply(g)
    assert dg.coefficient("zetab0") == fd.Kbar.apply(g)


def test_d_z1_is_kappa_plus_k_zeta():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    z1 = RationalFunction.variable(fd.registry, "z1")
    want = cf.one_form({"kappa0": 1, "zeta0": fd.k})
    assert cf.d_function(z1) == want


def test_d_coordinate_differential_closed():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    for j in range(5):
        assert exterior_d(cf.coord_form(j)).is_zero()


# ---------------------------------------------------------------------------
# Structure equations of the base coframe


@pytest.mark.parametrize("text", [M_LC, M_TUBE_CUBIC])
def test_initial_structure_table(text):
    fd = frame(text)
    cf = base_coframe(fd)
    checks = verify_darboux(cf, stated_base_table(fd, cf))
    assert [c.id for c in checks if not c.passed] == []
    assert len(checks) == 5


def test_d_zeta_zero_and_kappa_kappab_coefficient():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    assert exterior_d(cf.basis_form("zeta0")).is_zero()
    d_rho = exterior_d(cf.basis_form("rho0"))
    assert extract_coefficient(d_rho, "kappa0", "kappab0") == parse_expr(
        "i", fd.registry
    )
    assert extract_coefficient(exterior_d(cf.basis_form("zeta0")), "rho0", "zeta0").is_zero()


def test_zeta_kappab_coefficient_uses_unconjugated_k():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    got = extract_coefficient(exterior_d(cf.basis_form("kappa0")), "zeta0", "kappab0")
    l1bk = fd.L1bar.apply(fd.k)
    l1bkb = fd.L1bar.apply(fd.k.conj())
    assert got == l1bk
    assert not (l1bk - l1bkb).is_zero()
    assert not (got - l1bkb).is_zero()


def test_fault_injected_table_fails_one_coefficient():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    stated = stated_base_table(fd, cf)
    i = RationalFunction.const(fd.registry, GR_I)
    stated["rho0"] = stated["rho0"] - cf.basis_form("kappa0", "kappab0") * (i + i)
    checks = verify_darboux(cf, stated)
    bad = [c for c in checks if not c.passed]
    assert len(bad) == 1
    assert bad[0].id == "d(rho0)[kappa0^kappab0]"


def test_darboux_relations_hook():
    fd = frame(M_LC)
    cf = base_coframe(fd)

    def rel(extract):
        return extract("rho0", "kappa0", "kappab0") - parse_expr("i", fd.registry)

    checks = verify_darboux(cf, {}, relations=[("coeff[i kappa^kappab]", "", rel)])
    assert len(checks) == 1 and checks[0].passed


# ---------------------------------------------------------------------------
# d^2 = 0, Leibniz, conjugation


def test_d_squared_zero_on_basis():
    fd = frame(M_TUBE_CUBIC)
    cf = base_coframe(fd)
    for nm in BASE_NAMES:
        dd = exterior_d(exterior_d(cf.basis_form(nm)))
        assert dd.is_zero()


def test_leibniz_rule():
    fd = frame(M_LC)
    reg = fd.registry
    cf = base_coframe(fd)
    f = parse_expr("z1*zb2 + i*v", reg)
    g = parse_expr("zb1 - z2^2", reg)
    a = cf.one_form({"rho0": f, "zeta0": 1})
    b = cf.one_form({"kappa0": g, "zetab0": fd.k})
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b) - wedge(a, exterior_d(b))
    assert lhs == rhs


def test_form_conjugation():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    i = RationalFunction.const(fd.registry, GR_I)
    w = cf.basis_form("kappa0", "kappab0") * i
    # i kappa^kappab is real: conj flips i and swaps kappa/kappab
    assert w.conj() == w
    assert cf.basis_form("kappa0").conj() == cf.basis_form("kappab0")


def test_conj_pairing_validated():
    fd = frame(M_LC)
    reg = fd.registry
    zero = RationalFunction.const(reg, 0)
    one = RationalFunction.const(reg, 1)
    rows = {
        "a": (one, zero, zero, zero, zero),
        "b": (zero, one, zero, zero, zero),
        "ab": (zero, zero, one, zero, zero),
        "bb": (zero, zero, zero, one, zero),
        "c": (zero, zero, zero, zero, parse_expr("i", reg)),
    }
    conj = {"a": "ab", "ab": "a", "b": "bb", "bb": "b"}
    with pytest.raises(ValueError):
        # c is declared self-conjugate but its row has an i coefficient
        Coframe(reg, ("a", "b", "ab", "bb", "c"), rows, conj)


# ---------------------------------------------------------------------------
# Coframe changes


def test_change_coframe_zeta_scaling():
    # second coframe rescales zeta0 by L1bar(k); zeta0 pulls back to its inverse
    fd = frame(M_LC)
    reg = fd.registry
    cf = base_coframe(fd)
    l1bk = fd.L1bar.apply(fd.k)
    rows = {nm: cf.rows[nm] for nm in BASE_NAMES}
    rows["zeta0"] = tuple(c * l1bk for c in cf.rows["zeta0"])
    rows["zetab0"] = tuple(c * l1bk.conj() for c in cf.rows["zetab0"])
    cf2 = Coframe(reg, BASE_NAMES, rows, BASE_CONJ)
    moved = change_coframe(cf.basis_form("zeta0"), cf2)
    assert moved == cf2.basis_form("zeta0") * (1 / l1bk)
    back = change_coframe(moved, cf)
    assert back == cf.basis_form("zeta0")


def test_change_coframe_identity():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    w = wedge(cf.basis_form("rho0"), cf.basis_form("kappa0")) * fd.k
    assert change_coframe(w, cf) is w


def test_singular_coframe_rejected():
    fd = frame(M_LC)
    reg = fd.registry
    cf = base_coframe(fd)
    rows = {nm: cf.rows[nm] for nm in BASE_NAMES}
    rows["zeta0"] = rows["kappa0"]
    rows["zetab0"] = rows["kappab0"]
    cf2 = Coframe(reg, BASE_NAMES, rows, BASE_CONJ)
    with pytest.raises(SingularMatrixError):
        cf2.d_function(fd.k)


# ---------------------------------------------------------------------------
# Abstract coframe with v-dependent rows (machinery only, no hypersurface)


def test_d_squared_zero_abstract_coframe():
    reg = base_registry()
    one = RationalFunction.const(reg, 1)
    zero = RationalFunction.const(reg, 0)
    v = parse_expr("v", reg)
    rows = {
        "t1": (one, zero, zero, zero, parse_expr("z1*zb1", reg)),
        "t2": (parse_expr("v", reg), one, zero, zero, zero),
        "tb1": (zero, zero, one, zero, parse_expr("z1*zb1", reg)),
        "tb2": (zero, zero, v, one, zero),
        "t0": (zero, zero, zero, zero, one + parse_expr("z2*zb2", reg)),
    }
    cf = Coframe(
        reg,
        ("t1", "t2", "tb1", "tb2", "t0"),
        rows,
        {"t1": "tb1", "tb1": "t1", "t2": "tb2", "tb2": "t2"},
    )
    for nm in cf.names:
        assert exterior_d(exterior_d(cf.basis_form(nm))).is_zero()
    g = parse_expr("v^2*z1 - zb2", reg)
    dg = cf.d_function(g)
    assert exterior_d(dg).is_zero()
