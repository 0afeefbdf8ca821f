import numpy as np
import pytest

from toposval.contexts import Character, ContextError, LatticeElement
from toposval.presheaves import (
    GlobalElementG,
    SieveError,
    SubobjectSigma,
    check_nat_iso,
    clo_sigma_restrict,
    coarse_grain,
    coarse_grain_bruteforce,
    empty_sieve,
    make_sieve,
    pullback,
    sigma_restrict,
    subobject_from_global_element,
    true_sieve,
)
from toposval.sampling import random_poset


def all_masks(poset, cid):
    return range(1 << poset.context(cid).n_atoms)


def test_sigma_restrict(fixa):
    k2 = Character("V1", 2)
    assert sigma_restrict(fixa, "V2", "V1", k2) == Character("V2", 1)
    assert sigma_restrict(fixa, "V1", "V1", k2) == k2
    assert sigma_restrict(fixa, "Vtriv", "V1", k2) == Character("Vtriv", 0)


def test_coarse_grain_examples(fixa):
    full = LatticeElement("V1", 0b111)
    assert coarse_grain(fixa, "V2", "V1", full).mask == 0b11
    assert coarse_grain(fixa, "V2", "V1", LatticeElement("V1", 0)).mask == 0
    # P1 at V1 is not in the coarse lattice; the least element above it is P1+P2
    assert coarse_grain(fixa, "V2", "V1", LatticeElement("V1", 0b010)).mask == 0b10
    # P0 is already coarse
    assert coarse_grain(fixa, "V2", "V1", LatticeElement("V1", 0b001)).mask == 0b01


def test_coarse_grain_agrees_with_bruteforce(fixa):
    for sub, sup in fixa.pairs():
        for mask in all_masks(fixa, sup):
            p = LatticeElement(sup, mask)
            assert coarse_grain(fixa, sub, sup, p) == coarse_grain_bruteforce(fixa, sub, sup, p)


def test_coarse_grain_functorial_and_monotone():
    for seed in range(30):
        poset = random_poset(np.random.default_rng(seed), max_contexts=6, max_atoms=5)
        for sub, sup in poset.pairs():
            for mask in all_masks(poset, sup):
                p = LatticeElement(sup, mask)
                # oracle agreement on every instance
                assert coarse_grain(poset, sub, sup, p) == \
                    coarse_grain_bruteforce(poset, sub, sup, p)
                # growth: p <= lift(coarse_grain(p))
                cg = coarse_grain(poset, sub, sup, p)
                assert poset.lift_mask(sub, sup, cg.mask) & mask == mask
                # monotonicity
                for other in all_masks(poset, sup):
                    if mask & other == mask:
                        cq = coarse_grain(poset, sub, sup, LatticeElement(sup, other))
                        assert cg.mask & cq.mask == cg.mask
        # functoriality along chains
        for v3, v2 in poset.pairs():
            for v2b, v1 in poset.pairs():
                if v2b != v2:
                    continue
                for mask in all_masks(poset, v1):
                    p = LatticeElement(v1, mask)
                    via = coarse_grain(poset, v3, v2, coarse_grain(poset, v2, v1, p))
                    direct = coarse_grain(poset, v3, v1, p)
                    assert via == direct


def test_clo_sigma_restrict(fixa):
    v1 = fixa.context("V1")
    all_chars = frozenset(Character("V1", i) for i in range(3))
    assert clo_sigma_restrict(fixa, "V2", "V1", all_chars) == frozenset(
        {Character("V2", 0), Character("V2", 1)})
    assert clo_sigma_restrict(fixa, "V2", "V1", frozenset()) == frozenset()
    k12 = frozenset({Character("V1", 1), Character("V1", 2)})
    assert clo_sigma_restrict(fixa, "V2", "V1", k12) == frozenset({Character("V2", 1)})


def test_sieve_validation(fixa):
    with pytest.raises(SieveError):
        make_sieve(fixa, "V2", {"V1"})          # member above the apex
    with pytest.raises(SieveError):
        make_sieve(fixa, "V1", {"V2"})          # not downward closed (misses Vtriv)
    s = make_sieve(fixa, "V1", {"V2", "Vtriv"})
    assert s.members == frozenset({"V2", "Vtriv"})
    assert true_sieve(fixa, "V1").members == frozenset({"V1", "V2", "Vtriv"})
    assert empty_sieve(fixa, "V2").members == frozenset()


def test_sieve_poset_stamp(fixa, dim2_poset):
    s = true_sieve(fixa, "V1")
    with pytest.raises(SieveError):
        pullback(dim2_poset, "Vtriv", "V1", s)


def test_sieve_ordering(fixa):
    lesser = make_sieve(fixa, "V1", {"Vtriv"})
    greater = make_sieve(fixa, "V1", {"V2", "Vtriv"})
    assert lesser <= greater
    assert not greater <= lesser
    with pytest.raises(SieveError):
        lesser <= true_sieve(fixa, "V2")   # different apex


def test_pullback_examples(fixa):
    assert pullback(fixa, "V2", "V1", true_sieve(fixa, "V1")) == true_sieve(fixa, "V2")
    assert pullback(fixa, "V2", "V1", empty_sieve(fixa, "V1")) == empty_sieve(fixa, "V2")
    s = make_sieve(fixa, "V1", {"V2", "Vtriv"})
    assert pullback(fixa, "V2", "V1", s) == true_sieve(fixa, "V2")


def test_pullback_functorial():
    for seed in range(20):
        poset = random_poset(np.random.default_rng(seed), max_contexts=6, max_atoms=4)
        rng = np.random.default_rng(seed + 1000)
        for v3, v2 in poset.pairs():
            for v2b, v1 in poset.pairs():
                if v2b != v2:
                    continue
                down = poset.down_set(v1)
                picked = {d for d in down if rng.random() < 0.5}
                closed = set()
                for m in picked:
                    closed.update(poset.down_set(m))
                s = make_sieve(poset, v1, closed)
                via = pullback(poset, v3, v2, pullback(poset, v2, v1, s))
                assert via == pullback(poset, v3, v1, s)


def test_check_nat_iso_fixa(fixa):
    report = check_nat_iso(fixa)
    assert report["passed"]
    assert report["failures"] == []
    assert report["pairsChecked"] == 6  # 3 identity + 3 proper


def test_check_nat_iso_single_context():
    poset = random_poset(np.random.default_rng(0), dim=2, max_contexts=1, max_atoms=2)
    report = check_nat_iso(poset)
    assert report["passed"]


def test_check_nat_iso_random_posets():
    for seed in range(10):
        poset = random_poset(np.random.default_rng(seed), max_contexts=8, max_atoms=6)
        assert check_nat_iso(poset)["passed"]


def test_global_element_matching(fixa):
    ge = GlobalElementG(fixa, {"V1": 0b001, "V2": 0b01, "Vtriv": 0b1})
    assert ge.satisfies_matching
    with pytest.raises(ContextError):
        GlobalElementG(fixa, {"V1": 0b001, "V2": 0b11, "Vtriv": 0b1})
    broken = GlobalElementG(fixa, {"V1": 0b001, "V2": 0b11, "Vtriv": 0b1}, enforce=False)
    assert not broken.satisfies_matching
    with pytest.raises(ContextError):
        GlobalElementG(fixa, {"V1": 0b1000, "V2": 0b01, "Vtriv": 0b1}, enforce=False)
    with pytest.raises(ContextError):
        SubobjectSigma(fixa, {"V1": frozenset({5}), "V2": frozenset(), "Vtriv": frozenset()},
                       enforce=False)


def test_subobject_from_global_element(fixa):
    full = GlobalElementG(fixa, {"V1": 0b111, "V2": 0b11, "Vtriv": 0b1})
    sub = subobject_from_global_element(full)
    assert sub.assignment == {"V1": frozenset({0, 1, 2}), "V2": frozenset({0, 1}),
                              "Vtriv": frozenset({0})}

    ge = GlobalElementG(fixa, {"V1": 0b001, "V2": 0b01, "Vtriv": 0b1})
    sub = subobject_from_global_element(ge)
    assert sub.assignment["V1"] == frozenset({0})
    assert sub.assignment["V2"] == frozenset({0})
    assert sub.assignment["Vtriv"] == frozenset({0})
    assert sub.satisfies_law

    broken = GlobalElementG(fixa, {"V1": 0b001, "V2": 0b11, "Vtriv": 0b1}, enforce=False)
    with pytest.raises(ContextError):
        subobject_from_global_element(broken)


def test_subobject_from_state_supports(fixa):
    # cross-module: state supports form a global element whose certain
    # characters obey the subobject law
    from toposval.linalg import DensityMatrix
    from toposval.valuations import nu_rho, supports_global_element
    import numpy as np

    ge = supports_global_element(nu_rho(DensityMatrix(np.diag([1.0, 0, 0])), fixa))
    assert ge.satisfies_matching
    sub = subobject_from_global_element(ge)
    assert sub.satisfies_law and sub.is_tight


def test_subobject_law_flags(fixa):
    loose = SubobjectSigma(
        fixa,
        {"V1": frozenset({0}), "V2": frozenset({0, 1}), "Vtriv": frozenset({0})},
    )
    assert loose.satisfies_law and not loose.is_tight
    with pytest.raises(ContextError):
        SubobjectSigma(
            fixa,
            {"V1": frozenset({0, 1}), "V2": frozenset(), "Vtriv": frozenset({0})},
        )
