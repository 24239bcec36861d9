import dataclasses
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gktorus import gk, inoue, linalg
from gktorus.symforms import T, cos, exp, rat, sin, to_sexpr

DATA = inoue.parameters_from_matrix(inoue.companion(1, 0))
FRAME = gk.inoue_frame(DATA)

BAD_PSI = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
QUAT_PSI = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]


def _passed(checks):
    return {c.item: c.passed for c in checks}


def test_frame_invariants_of_worked_example():
    f = FRAME
    assert to_sexpr(f.l) == "(exp (mul -1 t))"
    assert to_sexpr(f.v / f.l) == "(rat -1 2)"
    assert (f.w / f.l).is_const()
    assert float((f.w / f.l).value) == pytest.approx(-DATA.p)
    assert gk.torsion_value(f) == pytest.approx(1.0)


def test_coframe_is_dual_and_glues():
    cf = gk.build_coframe(FRAME)
    assert to_sexpr(cf.up[0].coeff("x1")) == "(exp (mul -1 t))"
    assert to_sexpr(cf.F_plus.coeff("x2", "x3")) == "(exp t)"
    E0, E1 = cf.matrix(0.0), cf.matrix(DATA.t0)
    assert np.max(np.abs(E1 @ DATA.rho() - E0)) < 1e-12


def test_frame_conditions_pass_for_standard_frame():
    checks = gk.check_frame_conditions(FRAME, DATA)
    assert all(c.passed for c in checks)
    assert [c.item for c in checks] == ["glue", "boundary_v", "boundary_w", "constancy"]


def test_nonconstant_torsion_coefficient_fails():
    half = exp(rat(-1, 2) * T)
    f = gk.FrameFamily(1 + T, half * cos(DATA.p * T), -(half * sin(DATA.p * T)), DATA.t0)
    res = _passed(gk.check_frame_conditions(f, DATA))
    assert not res["constancy"]
    with pytest.raises(gk.AssemblyError) as err:
        gk.assemble_gk(f, gk.FlatFiber(), data=DATA)
    assert any(c.item == "constancy" for c in err.value.failures)


def test_kahler_degenerate_frame_is_flagged():
    f = gk.FrameFamily(exp(T), 1, 0, 1.0)
    assert gk.torsion_value(f) == 0
    s = gk.assemble_gk(f, gk.FlatFiber())
    assert all(c.passed for c in gk.verify_gk(s))
    rep = gk.torsion_report(s)
    assert rep["torsion_free"] and rep["flag"] == "torsion-free (Kahler)"
    assert len(s.H) == 0


def test_degenerate_frame_raises():
    with pytest.raises(gk.DegenerateFrame):
        gk.build_coframe(gk.FrameFamily(exp(T), 0, 0, 1.0))
    with pytest.raises(gk.DegenerateFrame):
        gk.build_coframe(gk.FrameFamily(T, 1, 0, 1.0))


@pytest.mark.parametrize("mode, kind", [("kahler", "split"), ("hyperkahler", "non_split")])
def test_verify_all_items(mode, kind):
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, mode), data=DATA)
    checks = gk.verify_gk(s)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert {c.item for c in checks} >= {"a", "b", "c", "d", "e", "f"}
    split = gk.classify_split(s)
    assert split.kind == kind
    if kind == "non_split":
        assert split.sigma_is_minus_omega3_inverse


def test_torsion_form_of_worked_example():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "hyperkahler"), data=DATA)
    assert to_sexpr(s.H.coeff("x1", "x2", "x3")) == "-1"
    assert not gk.torsion_report(s)["torsion_free"]


def test_sign_corrupted_structure_fails():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "kahler"), data=DATA)
    bad = [row[:] for row in s.I_plus]
    bad[2][1] = -bad[2][1]  # e_2 -> -e_3 while e_3 -> -e_2 is kept
    broken = dataclasses.replace(s, I_plus=bad)
    checks = gk.verify_gk(broken)
    worst = max(c.max_residual for c in checks if not c.passed)
    assert worst >= 0.1
    assert not _passed(checks)["a"]


def test_fiber_map_rejected_in_hyperkahler_mode():
    with pytest.raises(gk.AssemblyError) as err:
        gk.assemble_gk(FRAME, gk.FlatFiber(1, "hyperkahler"), gk.FiberMap.of(BAD_PSI), DATA)
    items = {c.item for c in err.value.failures}
    assert "psi_omega2" in items
    # the same map is fine when only J1 has to be preserved
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "kahler"), gk.FiberMap.of(BAD_PSI), DATA)
    assert all(c.passed for c in s.preconditions)


def test_quaternionic_fiber_map_accepted():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "hyperkahler"), gk.FiberMap.of(QUAT_PSI), DATA)
    assert all(c.passed for c in gk.verify_gk(s))


def test_non_unimodular_fiber_map_rejected():
    M = [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    with pytest.raises(gk.AssemblyError):
        gk.assemble_gk(FRAME, gk.FlatFiber(), gk.FiberMap.of(M), DATA)


def test_empty_fiber():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(0), data=DATA)
    assert len(s.I_plus) == 4
    assert all(c.passed for c in gk.verify_gk(s))
    assert gk.classify_split(s).kind == "split"


def test_fiber_quaternion_relations():
    fib = gk.FlatFiber(2, "hyperkahler")
    assert all(c.passed for c in fib.check())
    assert fib.omega(1).coeff("y1", "y2").value == 1
    assert fib.omega(1).coeff("y3", "y4").value == -1
    assert fib.omega(2).coeff("y2", "y3").value == 1
    assert fib.omega(3).coeff("y1", "y3").value == -1


def test_sigma_on_fiber_is_j3():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "hyperkahler"), data=DATA)
    sigma = gk.classify_split(s).sigma
    block = [row[3:7] for row in sigma[3:7]]
    assert block == gk.FlatFiber(1).J(3)
    assert sigma[0][0] == 0 and sigma[1][2] == Fraction(0)


def test_metric_and_structures_orthogonal():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "hyperkahler"), data=DATA)
    for M in (s.I_plus, s.I_minus):
        assert linalg.matmul(linalg.transpose(M), M) == s.metric


@settings(max_examples=8, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-3.0, 3.0))
def test_random_standard_frames_verify(scale, radius, phase):
    f = gk.inoue_frame(DATA, scale, radius, phase)
    assert gk.torsion_value(f) == pytest.approx(1 / (scale * radius ** 2), rel=1e-9)
    s = gk.assemble_gk(f, gk.FlatFiber(1, "hyperkahler"), data=DATA)
    assert all(c.passed for c in gk.verify_gk(s, fd_check=False))


def test_json_shape():
    s = gk.assemble_gk(FRAME, gk.FlatFiber(1, "kahler"), data=DATA)
    js = s.to_json()
    assert js["H"] == {"x1^x2^x3": "-1"}
    assert js["fiber"] == {"k": 1, "mode": "kahler"}
