from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gktorus import cohomology as coh
from gktorus import formality as fm
from gktorus import inoue, linalg

RHO = inoue.companion(1, 0)
QUAT_PSI = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]


def _block_actions():
    rho = coh.PullbackAction.from_coordinate_map(RHO)
    psi = coh.PullbackAction.from_coordinate_map(QUAT_PSI)
    return rho.product(psi).actions()


def test_koszul_signs():
    A = fm.CDGA([("x", 1), ("y", 1), ("z", 2)])
    x, y, z = A.gen("x"), A.gen("y"), A.gen("z")
    assert A.add(A.mul(x, y), A.mul(y, x)) == {}
    assert A.mul(x, x) == {}
    assert A.add(A.mul(x, z), A.scale(-1, A.mul(z, x))) == {}
    assert A.mul(z, z) != {}


def test_parse_and_print_roundtrip():
    A = fm.lambda_presentation()
    p = A.parse("b1*b2 - 1/2*a*c + b3^2")
    assert A.parse(A.to_str(p)) == p
    with pytest.raises(fm.CDGAError):
        A.parse("b1*q")


def test_d_squared_check_rejects_bad_presentation():
    with pytest.raises(fm.CDGAError):
        fm.CDGA([("x", 1), ("y", 1), ("z", 2)], {"y": "z", "z": "x*y"})


def test_leibniz_on_monomials():
    A = fm.lambda_presentation()
    for k in range(1, 7):
        for m in A.basis(k):
            assert A.d(A.d({m: Fraction(1)})) == {}
    l12, b3, a = A.gen("l12"), A.gen("b3"), A.gen("a")
    lhs = A.d(A.mul(a, l12, b3))
    rhs = A.scale(-1, A.mul(a, A.d(l12), b3))
    assert lhs == rhs


def test_basis_sizes_and_cutoff():
    A = fm.lambda_presentation()
    assert [len(A.basis(k)) for k in range(10)] == [1, 1, 4, 14, 20, 50, 105, 165, 315, 535]
    with pytest.raises(fm.CDGAError):
        A.basis(11)


def test_sm_model_and_invariant_forms():
    data = inoue.parameters_from_matrix(RHO)
    S = fm.sm_model()
    assert fm.cdga_cohomology(S, 4).dims == (1, 1, 0, 1, 1)
    target = fm.inoue_invariant_algebra(data.p)
    assert fm.cdga_cohomology(target, 4).dims == (1, 1, 0, 1, 1)
    v = fm.check_quasi_iso(S, target, {"a": "theta", "b": "e1*e2*e3"}, 4, "chain")
    assert v.chain_map and v.is_quasi_iso


def test_quasi_iso_detects_killed_class():
    S = fm.sm_model()
    v = fm.check_quasi_iso(S, S, {"a": "a", "b": "0"}, 4, "chain")
    assert v.chain_map and not v.is_quasi_iso
    assert v.first_failure == 3


def test_presentation_with_lambda_generators():
    A = fm.lambda_presentation()
    H = fm.cdga_cohomology(A, 8)
    # frozen values computed by this exact presentation
    assert H.dims == (1, 1, 4, 5, 2, 21, 20, 20, 56)
    assert H.dims[:5] == (1, 1, 4, 5, 2)


def test_degree_five_cocycle_is_not_exact():
    A = fm.lambda_presentation()
    H = fm.cdga_cohomology(A, 5)
    z = A.parse("-b1*l12 + b2*l11")
    assert A.d(z) == {}
    assert any(H.class_of(z, 5))


def test_nu_iso_only_through_degree_four():
    A = fm.lambda_presentation()
    v = fm.check_quasi_iso(A, A, fm.lambda_projection(), 8, "cohomology")
    assert v.chain_map
    assert v.first_failure == 5
    assert all(d["iso"] for d in v.per_degree[:5])


def test_lambda_generators_do_not_map_to_zero_on_torus_forms():
    # closed invariant forms of the 4-torus: b_i as constant 2-forms
    T4 = fm.CDGA([("y1", 1), ("y2", 1), ("y3", 1), ("y4", 1)])
    phi = {"a": "0", "c": "0", "b1": "y1*y2", "b2": "y1*y3 + y2*y4", "b3": "y1*y4 - y2*y3", "b4": "y3*y4"}
    phi.update({f"l{i}{j}": "0" for i, j in fm.lambda_pairs()})
    v = fm.check_quasi_iso(fm.lambda_presentation(), T4, phi, 4, "chain")
    assert set(v.offending) == {"l22", "l33"}


def test_mapping_torus_cohomology_matches_through_degree_four():
    table = coh.mapping_torus_cohomology(_block_actions())
    H = fm.cdga_cohomology(fm.lambda_presentation(), 8)
    assert table.dims[:5] == H.dims[:5]
    assert table.dims != H.dims


def test_jordan_two_block():
    jd = fm.jordan_filtration([[0, 1], [0, 0]])
    assert jd.r == 2 and jd.G_dims == [1, 1]
    assert jd.maps[1] == [[Fraction(1)]]


def test_jordan_three_block_and_rank_oracle():
    F = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    jd = fm.jordan_filtration(F)
    assert jd.r == 3 and jd.G_dims == [2, 1, 1]
    # dim ker F^j from ranks of powers
    n = 4
    assert jd.kernel_dims == [0] + [n - linalg.rank(linalg.matpow(F, j)) for j in range(1, 4)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=3))
def test_jordan_filtration_length_is_largest_block(sizes):
    n = sum(sizes)
    F = linalg.zeros(n, n)
    start = 0
    for s in sizes:
        for i in range(start, start + s - 1):
            F[i][i + 1] = Fraction(1)
        start += s
    jd = fm.jordan_filtration(F)
    assert jd.r == max(sizes)
    assert sum(jd.G_dims) == n
    assert jd.kernel_dims == [0] + [n - linalg.rank(linalg.matpow(F, j)) for j in range(1, jd.r + 1)]


def test_jordan_criteria_synthetic_verdicts():
    two = fm.bfm_formality_test([[[1]], [[-1]], [[1, 1], [0, 1]]])
    assert two["verdict"].startswith("non-formal") and "criterion 1" in two["verdict"]
    three = fm.bfm_formality_test([[[1]], [[-1]], [[1, 1, 0], [0, 1, 1], [0, 0, 1]]])
    assert three["r"] == 3 and "r>=2" in three["verdict"]
    diag = fm.bfm_formality_test([[[1]], [[-1]], [[1, 0], [0, 2]]])
    assert diag["verdict"] == "inconclusive" and diag["r"] == 1
    first = fm.bfm_formality_test([[[1]], [[1, 0], [0, -1]]])
    assert first["criterion"].startswith("not applicable")


def test_jordan_criteria_on_shipped_actions_is_inconclusive():
    assert fm.bfm_formality_test(_block_actions())["verdict"] == "inconclusive"
    rho = coh.PullbackAction.from_coordinate_map(RHO)
    assert fm.bfm_formality_test(rho.actions())["verdict"] == "inconclusive"


def test_minimal_model_fragment():
    M = fm.minimal_model_low_degree([[[1]], [[-1]], [[1, 1, 0], [0, 1, 1], [0, 0, 1]]], 2)
    assert M.d_squared_failures() == []
    assert M.to_json()["differential"] == {"v2_1": "a*v1_1", "v3_1": "a*v2_1"}
    with pytest.raises(fm.CDGAError):
        fm.minimal_model_low_degree([[[1]], [[1]]], 1)


def test_json_roundtrip():
    A = fm.lambda_presentation()
    B = fm.CDGA.from_json(A.to_json())
    assert B.names == A.names
    assert fm.cdga_cohomology(B, 4).dims == (1, 1, 4, 5, 2)
