"""Frame construction, classification, bracket table.

Hand-computed oracle values for F = z1*zb1 and for the rank-1 model surface
are frozen below; they were derived by hand before the module existed:

  F = z1*zb1:                A1 = -i zb1, A2 = 0, ell = -2, k = 0.
  F = model (see M_LC):      A1 = -i (zb1 + z1 zb2)/(1 - z2 zb2),
                             ell = -2/(1 - z2 zb2),
                             k = -(zb1 + z1 zb2)/(1 - z2 zb2),
                             L1bar(k) = -1/(1 - z2 zb2),  P = 0.
"""

import pytest

from crcartan.cr_geometry import (
    Hypersurface,
    VectorField,
    build_frame,
    classify,
    lie_bracket,
    verify_bracket_table,
    verify_function_identities,
)
from crcartan.errors import MembershipError
from crcartan.reports import all_passed, failing
from crcartan.scalar_algebra import base_registry, parse_expr

REG = base_registry()

M_LC = "(z1*zb1 + 1/2*z1^2*zb2 + 1/2*zb1^2*z2)/(1 - z2*zb2)"
M_TUBE_MODEL = "(z1+zb1)^2/(2*(2+z2+zb2))"
M_TUBE_CUBIC = (
    "(z1+zb1)^2/(2*(2+z2+zb2)) + (z1+zb1)^3/(2*(2+z2+zb2)^2)"
)


def surf(text):
    return Hypersurface(parse_expr(text, REG))


def rf(text):
    return parse_expr(text, REG)


# ---------------------------------------------------------------------------
# Vector fields


def test_vector_field_apply():
    x = VectorField.basis(REG, "z1")
    f = rf("z1^2*v")
    assert x.apply(f) == rf("2*z1*v")


def test_lie_bracket_coordinates():
    x = VectorField(REG, {"z1": rf("1"), "v": rf("z1")})
    y = VectorField(REG, {"v": rf("1")})
    b = lie_bracket(x, y)
    assert b.is_zero()
    z = VectorField(REG, {"z1": rf("v")})
    b2 = lie_bracket(y, z)  # [d/dv, v d/dz1] = d/dz1
    assert b2 == VectorField(REG, {"z1": rf("1")})


def test_vector_field_conj():
    x = VectorField(REG, {"z1": rf("i*z2")})
    assert x.conj() == VectorField(REG, {"zb1": rf("-i*zb2")})


# ---------------------------------------------------------------------------
# Hypersurface validation


def test_hypersurface_rejects_nonreal():
    with pytest.raises(MembershipError):
        surf("i*z1*zb1")


def test_hypersurface_rejects_noncentered():
    with pytest.raises(MembershipError):
        surf("1 + z1*zb1")
    with pytest.raises(MembershipError):
        surf("z1*zb1/(z2+zb2)")


# ---------------------------------------------------------------------------
# Frozen frame values


def test_frame_hermitian_quadric():
    fd = build_frame(surf("z1*zb1"))
    assert fd.A1 == rf("-i*zb1")
    assert fd.A2 == rf("0")
    assert fd.ell == rf("-2")
    assert fd.k == rf("0")


def test_frame_model():
    fd = build_frame(surf(M_LC))
    assert fd.A1 == rf("-i*(zb1 + z1*zb2)/(1 - z2*zb2)")
    assert fd.ell == rf("-2/(1 - z2*zb2)")
    assert fd.k == rf("-(zb1 + z1*zb2)/(1 - z2*zb2)")
    assert fd.L1bar.apply(fd.k) == rf("-1/(1 - z2*zb2)")
    assert fd.P == rf("0")
    # reality constraints
    assert fd.ell.is_real()
    assert fd.T.coeff("v").is_real()


def test_degenerate_inputs():
    with pytest.raises(MembershipError):
        build_frame(surf("0"))
    with pytest.raises(MembershipError):
        build_frame(surf("z2*zb2"))  # (1,1) entry identically zero


# ---------------------------------------------------------------------------
# Classification


def test_classify_model():
    rep = classify(surf(M_LC))
    assert rep.det_levi_zero
    assert rep.entry11_nonzero
    assert rep.two_nondeg
    assert rep.accepted()
    assert rep.levi[0][0] == rf("-2/(1 - z2*zb2)")
    fd = build_frame(surf(M_LC))
    assert rep.k == fd.k


def test_classify_rank2_rejected():
    rep = classify(surf("z1*zb1 + z2*zb2"))
    assert not rep.det_levi_zero
    assert not rep.accepted()
    assert rep.reasons


def test_classify_two_degenerate_rejected():
    rep = classify(surf("z1*zb1"))
    assert rep.det_levi_zero
    assert rep.entry11_nonzero
    assert not rep.two_nondeg
    assert not rep.accepted()


def test_classify_tube_examples():
    for text in (M_TUBE_MODEL, M_TUBE_CUBIC):
        rep = classify(surf(text))
        assert rep.accepted(), (text, rep.reasons)


# ---------------------------------------------------------------------------
# Bracket table and functional identities


@pytest.mark.parametrize("text", [M_LC, M_TUBE_MODEL, M_TUBE_CUBIC])
def test_bracket_table(text):
    fd = build_frame(surf(text))
    checks = verify_bracket_table(fd)
    assert len(checks) == 10
    assert all_passed(checks), [c.id for c in failing(checks)]


@pytest.mark.parametrize("text", [M_LC, M_TUBE_MODEL, M_TUBE_CUBIC])
def test_function_identities(text):
    fd = build_frame(surf(text))
    checks = verify_function_identities(fd)
    assert len(checks) == 7
    assert all_passed(checks), [c.id for c in failing(checks)]


def test_t_is_scaled_bracket():
    # T = ell d/dv must be i[L1, L1bar] exactly
    fd = build_frame(surf(M_LC))
    br = lie_bracket(fd.L1, fd.L1bar).scale(rf("i"))
    assert br == fd.T
