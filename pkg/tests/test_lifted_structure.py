"""Group-lifted coframes, torsion ladder, and the closed structure
equations.

The fast surface is the model M_LC (every invariant vanishes, so all
slot identities degenerate gracefully); the cubic tube exercises the
nonvanishing branches: J != 0 there, K6 != 0 at the bottom stage, and
the primed chain coefficients feed nontrivial cancellations into the
essential-slot identities.  Everything is exact; no tolerances.
"""

from fractions import Fraction

import pytest

from crcartan.cr_geometry import Hypersurface, build_frame
from crcartan.lifted_structure import (
    ESTRUCTURE_NAMES,
    GroupStage,
    LIFTED_NAMES,
    ModifiedMC,
    STAGE_IDS,
    TorsionTable,
    build_modified_mc,
    build_stage,
    covariant_derivatives,
    torsion,
    verify_structure_equations,
)
from crcartan.reports import all_passed, failing
from crcartan.scalar_algebra import (
    GaussianRational,
    base_registry,
    eval_point,
    parse_expr,
)

M_LC = "(z1*zb1 + 1/2*z1^2*zb2 + 1/2*zb1^2*z2)/(1 - z2*zb2)"
M_TUBE_CUBIC = "(z1+zb1)^2/(2*(2+z2+zb2)) + (z1+zb1)^3/(2*(2+z2+zb2)^2)"

_FRAMES = {}
_STAGES = {}


def frame(text):
    if text not in _FRAMES:
        _FRAMES[text] = build_frame(Hypersurface(parse_expr(text, base_registry())))
    return _FRAMES[text]


def stage(text, sid):
    key = (text, sid)
    if key not in _STAGES:
        _STAGES[key] = build_stage(frame(text), sid)
    return _STAGES[key]


def check_ids(checks):
    return [c.id for c in checks]


# ---------------------------------------------------------------------------
# Stage construction


def test_stage_registry_and_coframe_names():
    st = stage(M_LC, "G10")
    assert isinstance(st, GroupStage)
    assert st.registry.nvars == 15
    assert st.coframe.names == LIFTED_NAMES + (
        "dc", "dcb", "db", "dbb", "dd", "ddb", "de", "deb", "df", "dfb"
    )
    assert st.registry.conj_names["c"] == "cb"
    assert st.subs == {}


def test_g4_stage_carries_t_and_subs():
    st = stage(M_LC, "G4")
    assert st.registry.nvars == 10
    assert st.registry.conj_names["t"] == "t"
    assert st.coframe.names[-1] == "dt"
    assert sorted(st.subs) == ["b", "bb", "d", "db", "f", "fb"]
    for nm, cnm in (("b", "bb"), ("d", "db"), ("f", "fb")):
        assert (st.subs[nm].conj() - st.subs[cnm]).is_zero()


def test_unknown_stage_raises():
    with pytest.raises(ValueError):
        build_stage(frame(M_LC), "G2")


def test_alpha_is_dc_over_c_at_every_stage():
    for sid in STAGE_IDS:
        st = stage(M_LC, sid)
        reg = st.registry
        want = st.coframe.one_form({"dc": parse_expr("1/c", reg)})
        assert (st.mc.alpha - want).is_zero(), sid


# ---------------------------------------------------------------------------
# Torsion ladder


def test_torsion_model_g10():
    table, checks = torsion(frame(M_LC), stage(M_LC, "G10"))
    assert isinstance(table, TorsionTable)
    assert all_passed(checks), check_ids(failing(checks))
    assert check_ids(checks) == [
        "shape[rho:kappa^zeta]",
        "shape[rho:kappa^zetab]",
        "shape[rho:zeta^kappab]",
        "shape[rho:zeta^zetab]",
        "shape[rho:kappa^kappab]",
        "shape[kappa:kappa^zetab]",
        "torsion[K8]",
        "normalize[f]",
    ]


def test_torsion_model_ladder():
    for sid in ("G8", "G6", "G4"):
        table, checks = torsion(frame(M_LC), stage(M_LC, sid))
        assert all_passed(checks), (sid, check_ids(failing(checks)))


def test_torsion_g6_check_list():
    _, checks = torsion(frame(M_LC), stage(M_LC, "G6"))
    assert check_ids(checks)[7:] == [
        "fixed[K8]",
        "fixed[b-combo]",
        "torsion[R2]",
        "relation[K5=R2]",
        "relation[Z9]",
        "torsion[d-combo]",
        "normalize[d]",
    ]


def test_torsion_cubic_ladder():
    for sid in STAGE_IDS:
        table, checks = torsion(frame(M_TUBE_CUBIC), stage(M_TUBE_CUBIC, sid))
        assert all_passed(checks), (sid, check_ids(failing(checks)))
    # the final table has a live J slot and a live K6 slot
    assert not table.Z3.is_zero()
    assert not table.K6.is_zero()
    assert table.Z4.is_zero()


def test_torsion_accepts_stage_id():
    table, checks = torsion(frame(M_LC), "G8")
    assert all_passed(checks)


# ---------------------------------------------------------------------------
# Modified connection forms


def test_modified_mc_shape():
    st = stage(M_LC, "G4")
    mmc = build_modified_mc(frame(M_LC), stage=st)
    assert isinstance(mmc, ModifiedMC)
    reg = st.registry
    assert (mmc.pi1.coefficient("dc") - parse_expr("1/c", reg)).is_zero()
    assert mmc.pi1.coefficient("rho").depends_on("t")
    assert mmc.pi2.coefficient("kappa").depends_on("t")
    assert not mmc.pi1.coefficient("kappa").depends_on("t")


def test_modified_mc_rejects_other_stages():
    with pytest.raises(ValueError):
        build_modified_mc(frame(M_LC), stage=stage(M_LC, "G6"))


# ---------------------------------------------------------------------------
# Structure equations


def test_structure_equations_model():
    checks = verify_structure_equations(frame(M_LC), stage=stage(M_LC, "G4"))
    assert all_passed(checks), check_ids(failing(checks))
    assert check_ids(checks) == [
        "absorption[a5]",
        "absorption[a3]",
        "structure[drho]",
        "structure[dkappa]",
        "structure[dzeta]",
        "value[W]",
        "value[J]",
        "d2[rho]",
        "d2[kappa]",
        "d2[zeta]",
        "invariance[b-combo]",
        "invariance[d-combo]",
        "invariance[W]",
        "invariance[J]",
        "invariance[R]",
    ]


def test_structure_equations_model_other_seed():
    checks = verify_structure_equations(
        frame(M_LC), stage=stage(M_LC, "G4"), seed=11
    )
    assert all_passed(checks), check_ids(failing(checks))


def test_structure_equations_cubic():
    checks = verify_structure_equations(
        frame(M_TUBE_CUBIC), stage=stage(M_TUBE_CUBIC, "G4")
    )
    assert all_passed(checks), check_ids(failing(checks))


def test_dropped_connection_term_breaks_structure_equations():
    # precondition: the dropped slot is alive on this surface
    table, _ = torsion(frame(M_TUBE_CUBIC), stage(M_TUBE_CUBIC, "G4"))
    assert not table.K6.is_zero()
    checks = verify_structure_equations(
        frame(M_TUBE_CUBIC), stage=stage(M_TUBE_CUBIC, "G4"), drop_k6_term=True
    )
    assert sorted(check_ids(failing(checks))) == [
        "structure[dkappa]",
        "structure[drho]",
        "structure[dzeta]",
    ]


# ---------------------------------------------------------------------------
# Covariant derivatives


def test_covariant_model_tables_vanish():
    tables, checks = covariant_derivatives(frame(M_LC), stage=stage(M_LC, "G4"))
    assert all_passed(checks), check_ids(failing(checks))
    for tab in (tables.dW, tables.dJ, tables.dR):
        assert tuple(tab) == ESTRUCTURE_NAMES
        assert all(v.is_zero() for v in tab.values())
    assert tables.p.is_zero()


def test_covariant_cubic():
    st = stage(M_TUBE_CUBIC, "G4")
    tables, checks = covariant_derivatives(frame(M_TUBE_CUBIC), stage=st)
    assert all_passed(checks), check_ids(failing(checks))
    # dJ is genuinely nonzero: the pib1 slot carries -3J
    assert not tables.dJ["pib1"].is_zero()
    table, _ = torsion(frame(M_TUBE_CUBIC), st)
    point = {
        "z1": GaussianRational(Fraction(1, 8), Fraction(1, 16)),
        "zb1": GaussianRational(Fraction(1, 8), Fraction(-1, 16)),
        "z2": GaussianRational(Fraction(-1, 8), Fraction(1, 16)),
        "zb2": GaussianRational(Fraction(-1, 8), Fraction(-1, 16)),
        "v": GaussianRational(Fraction(1, 4)),
        "c": GaussianRational(2, 1),
        "cb": GaussianRational(2, -1),
        "e": GaussianRational(Fraction(1, 3), Fraction(1, 2)),
        "eb": GaussianRational(Fraction(1, 3), Fraction(-1, 2)),
        "t": GaussianRational(Fraction(3, 7)),
    }
    got = eval_point(tables.dJ["pib1"], point)
    want = eval_point(-3 * table.Z3, point)
    assert abs(got - want) < 1e-12
