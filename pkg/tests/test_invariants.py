"""Coframe refinement chain and the scalar invariants built from it.

Pinned oracle values for the cubic tube surface, evaluated exactly at
z1 = 1/8 + i/16, z2 = -1/8 + i/16, v = 1/4 and cross-checked against the
finite-difference oracle at the same point (agreement ~1e-8):

  B0 = -6/5,  H0 = -2/5,  J0bar = -32/25,  W0 = 0,  Rcore = 0.

All three quantities come out real because the surface is a tube: every
frame scalar depends on Re z1, Re z2 only.  On the model surface and the
quadric tube all five invariants vanish identically.
"""

from fractions import Fraction

import pytest

from crcartan.cr_geometry import Hypersurface, build_frame
from crcartan.errors import CrcartanError
from crcartan.exterior_calculus import change_coframe
from crcartan.invariants import (
    CHAIN2_NAMES,
    CHAIN3_NAMES,
    DB0Decomposition,
    InvariantSet,
    base_coframe,
    build_coframe_chain,
    chain_coefficients,
    compute_invariants,
    db0_decomposition,
    stated_chain_tables,
    verify_base_identities,
    verify_chain_tables,
    verify_d2_identities,
)
from crcartan.numeric_oracle import NumericOracle
from crcartan.reports import all_passed, failing
from crcartan.scalar_algebra import GaussianRational, base_registry, parse_expr

M_LC = "(z1*zb1 + 1/2*z1^2*zb2 + 1/2*zb1^2*z2)/(1 - z2*zb2)"
M_TUBE_MODEL = "(z1+zb1)^2/(2*(2+z2+zb2))"
M_TUBE_CUBIC = "(z1+zb1)^2/(2*(2+z2+zb2)) + (z1+zb1)^3/(2*(2+z2+zb2)^2)"

POINT = ("1/8", "1/16", "-1/8", "1/16", "1/4")


def frame(text):
    reg = base_registry()
    return build_frame(Hypersurface(parse_expr(text, reg)))


def exact_point(pt):
    x1, y1, x2, y2, v = (Fraction(c) for c in pt)
    return {
        "z1": GaussianRational(x1, y1),
        "zb1": GaussianRational(x1, -y1),
        "z2": GaussianRational(x2, y2),
        "zb2": GaussianRational(x2, -y2),
        "v": GaussianRational(v),
    }


# ---------------------------------------------------------------------------
# Chain construction


def test_chain_names():
    chain = build_coframe_chain(frame(M_TUBE_CUBIC))
    assert len(chain) == 3
    assert chain[1].names == CHAIN2_NAMES
    assert chain[2].names == CHAIN3_NAMES


def test_chain_round_trip():
    fd = frame(M_TUBE_CUBIC)
    cf0 = base_coframe(fd)
    last = build_coframe_chain(fd)[2]
    reg = fd.hyp.F.registry
    coeffs = dict(zip(cf0.names,
                      (parse_expr(t, reg) for t in
                       ("v", "z1*zb2", "1", "z2", "zb1"))))
    w = cf0.one_form(coeffs)
    back = change_coframe(change_coframe(w, last), cf0)
    assert back == w


def test_zetapp_reduces_to_zetap_when_shift_vanishes():
    fd = frame(M_TUBE_CUBIC)
    reg = fd.hyp.F.registry
    zero = parse_expr("0", reg)
    chain = build_coframe_chain(fd, h0_override=zero)
    assert chain[2].rows["zetapp0"] == chain[1].rows["zetap0"]
    assert chain[2].rows["zetabpp0"] == chain[1].rows["zetabp0"]


def pair(cf, name, x):
    reg = cf.registry
    row = cf.rows[name]
    out = row[0] * x.coeff(reg.names[0])
    for j in range(1, len(row)):
        out = out + row[j] * x.coeff(reg.names[j])
    return out


def test_base_coframe_annihilators():
    fd = frame(M_LC)
    cf = base_coframe(fd)
    for x in (fd.L1, fd.L2, fd.L1bar):
        assert pair(cf, "rho0", x).is_zero()
    assert pair(cf, "rho0", fd.T) == parse_expr("1", fd.hyp.F.registry)


# ---------------------------------------------------------------------------
# Invariant values


def test_model_invariants_vanish():
    inv = compute_invariants(frame(M_LC))
    assert isinstance(inv, InvariantSet)
    for nm in ("B0", "H0", "W0", "J0bar", "Rcore"):
        assert getattr(inv, nm).is_zero(), nm


def test_tube_model_invariants_vanish():
    inv = compute_invariants(frame(M_TUBE_MODEL))
    for nm in ("B0", "H0", "W0", "J0bar", "Rcore"):
        assert getattr(inv, nm).is_zero(), nm


def test_cubic_tube_invariants():
    inv = compute_invariants(frame(M_TUBE_CUBIC))
    pt = exact_point(POINT)
    assert inv.B0.eval_exact(pt) == GaussianRational(Fraction(-6, 5))
    assert inv.H0.eval_exact(pt) == GaussianRational(Fraction(-2, 5))
    assert inv.J0bar.eval_exact(pt) == GaussianRational(Fraction(-32, 25))
    assert not inv.J0bar.is_zero()
    assert inv.W0.is_zero()
    assert inv.Rcore.is_zero()


def test_db0_decomposition_fields():
    fd = frame(M_TUBE_CUBIC)
    dec = db0_decomposition(fd)
    assert isinstance(dec, DB0Decomposition)
    lkb = fd.L1bar.apply(fd.k.conj())
    assert dec.Y0 == -lkb * compute_invariants(fd).B0


def test_chain_coefficient_relations():
    fd = frame(M_TUBE_CUBIC)
    c = chain_coefficients(fd)
    inv = compute_invariants(fd)
    assert c["K3p"] == inv.H0 * GaussianRational(0, 2)
    assert c["R2p"] == c["K5p"]
    assert (c["Rb2p"] + c["Z9p"]).is_zero()
    assert c["Rb1p"] + c["Z8p"] == c["K6p"] + c["K6p"]
    assert inv.W0 == c["K2p"] * GaussianRational(0, -1) + c["Z5p"] - c["Z8p"].conj()


# ---------------------------------------------------------------------------
# Stated structure tables


@pytest.mark.parametrize("text", [M_LC, M_TUBE_CUBIC])
def test_chain_tables(text):
    checks = verify_chain_tables(frame(text))
    assert all_passed(checks), [c.id for c in failing(checks)]
    assert len(checks) == 21


def test_stated_tables_cover_chain():
    fd = frame(M_TUBE_CUBIC)
    tables = stated_chain_tables(fd)
    assert [sorted(t) for t in tables] == [
        sorted(cf.names) for cf in build_coframe_chain(fd)
    ]


# ---------------------------------------------------------------------------
# Identities


@pytest.mark.parametrize("text", [M_LC, M_TUBE_CUBIC])
def test_base_identities(text):
    checks = verify_base_identities(frame(text))
    assert all_passed(checks), [c.id for c in failing(checks)]
    assert len(checks) == 6


def test_base_identities_fault_injection():
    fd = frame(M_TUBE_CUBIC)
    bad = compute_invariants(fd).H0 + 1
    checks = verify_base_identities(fd, h0_override=bad)
    assert [c.id for c in failing(checks)] == ["d(zetapp0)[rho0^zetabpp0]"]


@pytest.mark.parametrize("text", [M_LC, M_TUBE_CUBIC])
def test_d2_identities(text):
    checks = verify_d2_identities(frame(text))
    assert all_passed(checks), [c.id for c in failing(checks)]
    assert len(checks) == 10


def test_j0bar_contracted_vs_expanded_guard():
    # compute_invariants compares the short and long forms internally and
    # raises CrcartanError on mismatch; reaching a result means they agree.
    inv = compute_invariants(frame(M_TUBE_CUBIC))
    assert inv.J0bar is not None
    assert issubclass(CrcartanError, Exception)


# ---------------------------------------------------------------------------
# Numeric oracle


def test_numeric_oracle_matches_exact_values():
    fd = frame(M_TUBE_CUBIC)
    inv = compute_invariants(fd)
    named = {"k": fd.k, "ell": fd.ell, "P": fd.P, "B0": inv.B0,
             "H0": inv.H0, "W0": inv.W0, "J0bar": inv.J0bar,
             "Rcore": inv.Rcore}
    oracle = NumericOracle(fd.hyp.F)
    got = oracle.values(POINT)
    pt = exact_point(POINT)
    for nm in oracle.names:
        g = named[nm].eval_exact(pt)
        want = complex(float(g.re), float(g.im))
        assert abs(got[nm] - want) <= 1e-6 * max(1.0, abs(want)), nm


def test_numeric_oracle_model_invariants_near_zero():
    fd = frame(M_LC)
    oracle = NumericOracle(fd.hyp.F)
    got = oracle.values(("1/8", "1/16", "1/8", "-1/16", "1/8"))
    for nm in ("B0", "H0", "W0", "J0bar", "Rcore"):
        assert abs(got[nm]) < 1e-6, nm
    assert abs(got["ell"]) > 1.0
