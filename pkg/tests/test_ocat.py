import numpy as np
import numpy.testing as npt
import pytest

from toposval.linalg import DensityMatrix, HermitianOperator, StateVector
from toposval.ocat import (
    EigenvalueMap,
    ODecomposition,
    OcatError,
    OperatorCategory,
    apply_map,
    characterize_check,
    check_sieve_on_o,
    discover_morphism,
    elementary_support,
    func_subset_check,
    identity_map,
    nu_psi_o,
    o_coarse_grain,
    support_subobject_check,
)
from toposval.sampling import random_category, random_density, random_state


def decomp(*diag, id="A"):
    return ODecomposition.from_operator(
        HermitianOperator(np.diag(np.array(diag, dtype=float))), id=id)


def test_discover_morphism_square():
    f = discover_morphism(decomp(1, 4, 9, id="B"), decomp(1, 2, 3))
    assert f is not None
    assert f.pairs == ((1.0, 1.0), (2.0, 4.0), (3.0, 9.0))


def test_discover_morphism_constant():
    one = ODecomposition.from_operator(HermitianOperator(np.eye(3)), "one")
    f = discover_morphism(one, decomp(1, 2, 3))
    assert f is not None and set(v for _, v in f.pairs) == {1.0}


def test_discover_morphism_absent():
    # target is not constant on the anchor's degenerate eigenspace
    assert discover_morphism(decomp(1, 2, 2, id="B"), decomp(1, 1, 2)) is None


def test_discover_morphism_reflexive():
    a = decomp(1, 1, 5)
    f = discover_morphism(a, a)
    assert f.pairs == ((1.0, 1.0), (5.0, 5.0))


def test_o_coarse_grain_injective_is_identity():
    a = decomp(1, 2, 3)
    f = EigenvalueMap.from_dict({1.0: 10.0, 2.0: 20.0, 3.0: 30.0})
    delta = frozenset({2.0})
    npt.assert_allclose(
        o_coarse_grain(f, a, delta).entries, np.diag([0.0, 1, 0]), atol=1e-12)


def test_o_coarse_grain_square_preimage():
    a = decomp(-1, 1, 2)
    sq = EigenvalueMap.from_dict({-1.0: 1.0, 1.0: 1.0, 2.0: 4.0})
    e = o_coarse_grain(sq, a, frozenset({1.0}))
    npt.assert_allclose(e.entries, np.diag([1.0, 1, 0]), atol=1e-12)


def test_o_coarse_grain_full_and_empty():
    a = decomp(1, 2, 2)
    f = identity_map(a)
    npt.assert_allclose(
        o_coarse_grain(f, a, frozenset(a.spectrum)).entries, np.eye(3), atol=1e-12)
    npt.assert_allclose(
        o_coarse_grain(f, a, frozenset()).entries, np.zeros((3, 3)), atol=1e-12)
    with pytest.raises(OcatError):
        o_coarse_grain(f, a, frozenset({7.0}))


def test_o_coarse_grain_growth():
    rng = np.random.default_rng(7)
    for _ in range(50):
        dim = int(rng.integers(2, 6))
        cat, aid = random_category(rng, dim)
        a = cat.objects[aid]
        n = len(a.spectrum)
        mask = int(rng.integers(0, 1 << n))
        delta = frozenset(a.spectrum[i] for i in range(n) if mask >> i & 1)
        e_delta = a.projector_for(delta)
        for m in cat.morphisms_into(aid):
            e = o_coarse_grain(m.map, a, delta)
            assert e_delta.leq(e)


def test_elementary_support_examples():
    a = decomp(1, 2, 3)
    psi = StateVector(np.array([0, 1, 0], dtype=complex))
    assert elementary_support(psi, a) == frozenset({2.0})
    plus = StateVector(np.array([1, 1, 0]) / np.sqrt(2))
    assert elementary_support(plus, a) == frozenset({1.0, 2.0})
    rho = DensityMatrix(np.eye(2) / 2)
    assert elementary_support(rho, decomp(4, 4)) == frozenset({4.0})


def test_nu_psi_o_trivial_cases():
    a = decomp(1, 2)
    one = ODecomposition.from_operator(HermitianOperator(np.eye(2)), "one")
    cat = OperatorCategory([a, one])
    psi = random_state(np.random.default_rng(1), 2)
    assert nu_psi_o(psi, a, frozenset(a.spectrum), cat) == frozenset(
        {("A", "A"), ("one", "A")})
    assert nu_psi_o(psi, a, frozenset(), cat) == frozenset()


def test_nu_psi_o_two_morphisms():
    a = decomp(1, 2)
    one = ODecomposition.from_operator(HermitianOperator(np.eye(2)), "one")
    cat = OperatorCategory([a, one])
    psi = StateVector(np.array([0.0, 1.0]))
    members = nu_psi_o(psi, a, frozenset({2.0}), cat)
    assert members == frozenset({("A", "A"), ("one", "A")})
    other = StateVector(np.array([1.0, 0.0]))
    assert nu_psi_o(other, a, frozenset({2.0}), cat) == frozenset({("one", "A")})


def test_characterize_trivial_delta_cases():
    rng = np.random.default_rng(2)
    cat, aid = random_category(rng, 3)
    a = cat.objects[aid]
    psi = random_state(rng, 3)
    s = elementary_support(psi, a)
    rep = characterize_check(psi, a, s, cat)
    assert rep["passed"]
    assert (aid, aid) in {tuple(x) for x in rep["definitional"]}


def test_characterize_disjoint_delta():
    a = decomp(1, 2)
    one = ODecomposition.from_operator(HermitianOperator(np.eye(2)), "one")
    cat = OperatorCategory([a, one])
    psi = StateVector(np.array([1.0, 0.0]))   # support {1}
    rep = characterize_check(psi, a, frozenset({2.0}), cat)
    assert rep["passed"]
    ids = {tuple(x) for x in rep["definitional"]}
    assert ("A", "A") not in ids        # identity excluded
    assert ("one", "A") in ids          # the collapsing arrow survives


def test_characterize_seeded_draws():
    rng = np.random.default_rng(97)
    for _ in range(120):
        dim = int(rng.integers(2, 6))
        cat, aid = random_category(rng, dim)
        a = cat.objects[aid]
        n = len(a.spectrum)
        mask = int(rng.integers(0, 1 << n))
        delta = frozenset(a.spectrum[i] for i in range(n) if mask >> i & 1)
        state = random_state(rng, dim) if rng.random() < 0.5 else random_density(rng, dim)
        assert characterize_check(state, a, delta, cat)["passed"]
        ok, w = check_sieve_on_o(state, a, delta, cat)
        assert ok, w


def test_func_subset_injective_trivial():
    a = decomp(1, 2, 3)
    f = EigenvalueMap.from_dict({1.0: 7.0, 2.0: 8.0, 3.0: 9.0})
    psi = random_state(np.random.default_rng(3), 3)
    assert func_subset_check(psi, a, f)["passed"]


def test_func_subset_square_example():
    a = decomp(-1, 1, 2)
    sq = EigenvalueMap.from_dict({-1.0: 1.0, 1.0: 1.0, 2.0: 4.0})
    psi = StateVector(np.array([1, 1, 0]) / np.sqrt(2))
    rep = func_subset_check(psi, a, sq)
    assert rep["passed"]
    assert rep["pushed_support"] == [1.0] and rep["image_support"] == [1.0]


def test_func_subset_seeded_draws():
    rng = np.random.default_rng(103)
    for _ in range(80):
        dim = int(rng.integers(2, 6))
        cat, _ = random_category(rng, dim)
        state = random_state(rng, dim) if rng.random() < 0.5 else random_density(rng, dim)
        rep = support_subobject_check(state, cat)
        assert rep["passed"], rep["failures"]


def test_composition_closure():
    rng = np.random.default_rng(41)
    for _ in range(25):
        dim = int(rng.integers(2, 6))
        cat, _ = random_category(rng, dim)
        ok, w = cat.check_composition_closure()
        assert ok, w
        for oid in cat.ids:
            assert (oid, oid) in cat.morphisms   # identities discovered


def test_apply_map_spectrum_is_image():
    a = decomp(1, 1, 2, 3)
    f = EigenvalueMap.from_dict({1.0: 5.0, 2.0: 5.0, 3.0: 6.0})
    b = apply_map(f, a)
    assert b.spectrum == (5.0, 6.0)
    npt.assert_allclose(b.operator.entries, np.diag([5.0, 5, 5, 6]), atol=1e-12)
