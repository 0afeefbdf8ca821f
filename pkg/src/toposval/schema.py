"""Relation-parameterized valuations and the six-property survey.

Given an interval valuation `a` and a binary relation R, a valuation with
sets of morphisms as values arises by testing R at the coarse stage:
a stage enters when R holds between a's value there and the coarse-grained
proposition.  Which laws of a generalized valuation the result obeys
depends only on R (and mild conditions on `a`); the surveys below check
each law exhaustively over the finite poset, alongside the
characterizations and sufficient conditions that explain the outcome.

Three forms are covered: lattice elements against a projector relation,
character sets against a set relation, and eigenvalue sets over a finite
operator category.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contexts import ContextError, ContextPoset, LatticeElement, v_of_p
from .ocat import OperatorCategory
from .presheaves import (
    GlobalElementG,
    SubobjectSigma,
    clo_sigma_restrict,
    coarse_grain,
)
from .valuations import MorphismSetValuation

HOLDS = "holds-exhaustively"
FAILS = "witness-of-failure"


@dataclass(frozen=True)
class Relation:
    """A binary relation on a context's lattice, given as masks.

    `test(context_id, left_mask, right_mask)`; deterministic and total on
    every lattice of the poset it is used with.
    """

    name: str
    test: Callable[[str, int, int], bool]


def _le(cid, l, r):
    return l & r == l


def _ge(cid, l, r):
    return l & r == r


def _eq(cid, l, r):
    return l == r


def _nonzero_product(cid, l, r):
    return l & r != 0


BUILTIN_RELATIONS = {
    "le": Relation("le", _le),
    "ge": Relation("ge", _ge),
    "eq": Relation("eq", _eq),
    "nonzero-product": Relation("nonzero-product", _nonzero_product),
    "always-true": Relation("always-true", lambda cid, l, r: True),
    "always-false": Relation("always-false", lambda cid, l, r: False),
}


def random_relation(rng: np.random.Generator, poset: ContextPoset, name: str = "random") -> Relation:
    """A seeded boolean table over (context, left mask, right mask), so
    replays are exact."""
    table: dict[tuple[str, int, int], bool] = {}
    for cid in poset.ids:
        n = poset.context(cid).n_atoms
        for l in range(1 << n):
            for r in range(1 << n):
                table[(cid, l, r)] = bool(rng.random() < 0.5)
    return Relation(name, lambda cid, l, r: table[(cid, l, r)])


@dataclass(frozen=True)
class SetRelation:
    """A binary relation on subsets of a context's spectrum (atom-index sets)."""

    name: str
    test: Callable[[str, frozenset[int], frozenset[int]], bool]


BUILTIN_SET_RELATIONS = {
    "subset": SetRelation("subset", lambda cid, l, r: l <= r),
    "superset": SetRelation("superset", lambda cid, l, r: l >= r),
    "eq": SetRelation("eq", lambda cid, l, r: l == r),
    "intersects": SetRelation("intersects", lambda cid, l, r: bool(l & r)),
    "always-true": SetRelation("always-true", lambda cid, l, r: True),
    "always-false": SetRelation("always-false", lambda cid, l, r: False),
}


def _schema_valuation(a: GlobalElementG, rel: Relation) -> MorphismSetValuation:
    poset = a.poset

    def rule(cid: str, mask: int) -> frozenset[str]:
        return frozenset(
            sub for sub in poset.down_set(cid)
            if rel.test(sub, a.assignment[sub],
                        coarse_grain(poset, sub, cid, LatticeElement(cid, mask)).mask)
        )

    return MorphismSetValuation(poset, rule, name=f"alpha^(a,{rel.name})")


def alpha_a_R(a: GlobalElementG, rel: Relation) -> MorphismSetValuation:
    """The schema valuation: membership by evaluating R at the coarse stage."""
    if not a.satisfies_matching:
        raise ContextError("the projector assignment is not a global element")
    return _schema_valuation(a, rel)


def _status(ok: bool, witness: dict | None) -> dict:
    return {"status": HOLDS if ok else FAILS, "witness": None if ok else witness}


def survey_properties(a: GlobalElementG, rel: Relation) -> dict:
    """Exhaustive six-property report for the lattice-relation schema.

    Sievehood and monotonicity carry, next to the direct check on the
    generated valuation, the characterization on R itself and the simpler
    sufficient condition; the two code paths for sievehood are independent
    and their agreement is part of the report.

    Non-matching assignments are admitted (the report records the flag):
    when the assignment really matches up, coarse-graining is a function of
    the left argument, so relations like equality are automatically stable;
    the failing direction of the characterizations only shows up on broken
    assignments.
    """
    poset = a.poset
    alpha = _schema_valuation(a, rel)
    report: dict = {"relation": rel.name, "a_is_global_element": a.satisfies_matching,
                    "properties": {}, "analyses": {}}

    # (i) sievehood: direct downward-closure of every member set
    ok, witness = alpha.is_sieve_valued()
    report["properties"]["sievehood"] = _status(ok, witness)

    # (i) characterization: R stable under coarse-graining, computed on R alone
    stable, w = _stable_under_coarse_graining(a, rel)
    report["analyses"]["stability_under_coarse_graining"] = _status(stable, w)
    report["analyses"]["sievehood_paths_agree"] = ok == stable

    # (i) sufficient condition: coarse-graining preserves R on both arguments
    pres, w = _preserved_by_coarse_graining(poset, rel)
    report["analyses"]["coarse_graining_preserves_relation"] = _status(pres, w)

    # (ii) functional composition, for any R whatsoever
    ok, witness = _func_holds(alpha)
    report["properties"]["func"] = _status(ok, witness)

    # (iii) null proposition, direct and characterized
    ok, witness = _null_holds(alpha)
    report["properties"]["null"] = _status(ok, witness)
    char_ok = True
    char_w = None
    for sub, sup in poset.pairs():
        if rel.test(sub, a.assignment[sub], 0):
            char_ok, char_w = False, {"v1": sup, "v2": sub}
            break
    report["analyses"]["null_characterization"] = _status(char_ok, char_w)
    report["analyses"]["null_paths_agree"] = ok == char_ok

    # (iv) monotonicity, direct, characterized, and the sufficient condition
    ok, witness = _monotone_holds(alpha)
    report["properties"]["monotonicity"] = _status(ok, witness)
    iso, w = _isotone_under_coarse_graining(a, rel)
    report["analyses"]["isotone_under_coarse_graining"] = _status(iso, w)
    report["analyses"]["monotonicity_paths_agree"] = ok == iso
    stab, w = _stable_under_enlargement(a, rel)
    report["analyses"]["stable_under_enlargement"] = _status(stab, w)

    # (v) exclusivity, in the literal refuting-stage form
    ok, witness = _exclusivity_holds(a, rel)
    report["properties"]["exclusivity"] = _status(ok, witness)

    # (vi) unit proposition
    ok, witness = _unit_holds(a, rel, alpha)
    report["properties"]["unit"] = _status(ok, witness)

    report["all_hold"] = all(
        v["status"] == HOLDS for v in report["properties"].values()
    )
    return report


def _stable_under_coarse_graining(a: GlobalElementG, rel: Relation):
    poset = a.poset
    for sup in poset.ids:
        n = poset.context(sup).n_atoms
        for mask in range(1 << n):
            p = LatticeElement(sup, mask)
            for mid in poset.down_set(sup):
                if not rel.test(mid, a.assignment[mid],
                                coarse_grain(poset, mid, sup, p).mask):
                    continue
                for sub in poset.down_set(mid):
                    if not rel.test(sub, a.assignment[sub],
                                    coarse_grain(poset, sub, sup, p).mask):
                        return False, {"v1": sup, "v2": mid, "v3": sub, "mask": mask}
    return True, None


def _preserved_by_coarse_graining(poset: ContextPoset, rel: Relation):
    for sub, sup in poset.pairs(proper_only=True):
        n = poset.context(sup).n_atoms
        for x in range(1 << n):
            for y in range(1 << n):
                if rel.test(sup, x, y):
                    cx = coarse_grain(poset, sub, sup, LatticeElement(sup, x)).mask
                    cy = coarse_grain(poset, sub, sup, LatticeElement(sup, y)).mask
                    if not rel.test(sub, cx, cy):
                        return False, {"v1": sup, "v2": sub, "x": x, "y": y}
    return True, None


def _func_holds(alpha: MorphismSetValuation):
    poset = alpha.poset
    for sub, sup in poset.pairs():
        n = poset.context(sup).n_atoms
        for mask in range(1 << n):
            cg = coarse_grain(poset, sub, sup, LatticeElement(sup, mask))
            lhs = alpha.members(sub, cg.mask)
            rhs = frozenset(m for m in alpha.members(sup, mask) if poset.leq(m, sub))
            if lhs != rhs:
                return False, {"v1": sup, "v2": sub, "mask": mask,
                               "lhs": sorted(lhs), "rhs": sorted(rhs)}
    return True, None


def _null_holds(alpha: MorphismSetValuation):
    for cid in alpha.poset.ids:
        if alpha.members(cid, 0):
            return False, {"v1": cid, "members": sorted(alpha.members(cid, 0))}
    return True, None


def _monotone_holds(alpha: MorphismSetValuation):
    poset = alpha.poset
    for cid in poset.ids:
        n = poset.context(cid).n_atoms
        for p in range(1 << n):
            for q in range(1 << n):
                if p & q == p and not alpha.members(cid, p) <= alpha.members(cid, q):
                    return False, {"v1": cid, "p": p, "q": q}
    return True, None


def _isotone_under_coarse_graining(a: GlobalElementG, rel: Relation):
    poset = a.poset
    for sub, sup in poset.pairs():
        n = poset.context(sup).n_atoms
        for p in range(1 << n):
            for q in range(1 << n):
                if p & q != p:
                    continue
                cp = coarse_grain(poset, sub, sup, LatticeElement(sup, p)).mask
                cq = coarse_grain(poset, sub, sup, LatticeElement(sup, q)).mask
                if rel.test(sub, a.assignment[sub], cp) and not rel.test(sub, a.assignment[sub], cq):
                    return False, {"v1": sup, "v2": sub, "p": p, "q": q}
    return True, None


def _stable_under_enlargement(a: GlobalElementG, rel: Relation):
    poset = a.poset
    for cid in poset.ids:
        n = poset.context(cid).n_atoms
        for s in range(1 << n):
            for t in range(1 << n):
                if s & t == s and rel.test(cid, a.assignment[cid], s) \
                        and not rel.test(cid, a.assignment[cid], t):
                    return False, {"v1": cid, "s": s, "t": t}
    return True, None


def _exclusivity_holds(a: GlobalElementG, rel: Relation):
    poset = a.poset
    for sup in poset.ids:
        n = poset.context(sup).n_atoms
        down = poset.down_set(sup)
        for p in range(1 << n):
            if not all(
                rel.test(sub, a.assignment[sub],
                         coarse_grain(poset, sub, sup, LatticeElement(sup, p)).mask)
                for sub in down
            ):
                continue
            for q in range(1 << n):
                if p & q != 0:
                    continue
                refuting = any(
                    not rel.test(sub, a.assignment[sub],
                                 coarse_grain(poset, sub, sup, LatticeElement(sup, q)).mask)
                    for sub in down
                )
                if not refuting:
                    return False, {"v1": sup, "p": p, "q": q}
    return True, None


def _unit_holds(a: GlobalElementG, rel: Relation, alpha: MorphismSetValuation):
    poset = a.poset
    for cid in poset.ids:
        if not alpha.is_true(cid, poset.context(cid).full_mask):
            # name the refusing stage for the witness
            full = poset.context(cid).full_mask
            for sub in poset.down_set(cid):
                cg = coarse_grain(poset, sub, cid, LatticeElement(cid, full)).mask
                if not rel.test(sub, a.assignment[sub], cg):
                    return False, {"v1": cid, "v2": sub}
            return False, {"v1": cid}
    return True, None


def survey_properties_sigma(a: SubobjectSigma, rel: SetRelation) -> dict:
    """Six-property survey for the character-set schema: membership by
    relating a's character set to the restriction of the proposition's
    certain set.  Regularity (non-emptiness, tightness) is reported, not
    enforced."""
    poset = a.poset

    def rule(cid: str, mask: int) -> frozenset[str]:
        chars = v_of_p(poset.context(cid), LatticeElement(cid, mask))
        out = []
        for sub in poset.down_set(cid):
            restricted = frozenset(
                k.atom_index for k in clo_sigma_restrict(poset, sub, cid, chars)
            )
            if rel.test(sub, a.assignment[sub], restricted):
                out.append(sub)
        return frozenset(out)

    alpha = MorphismSetValuation(poset, rule, name=f"alpha^(a,{rel.name})_sigma")
    report: dict = {
        "relation": rel.name,
        "regularity": {
            "nonempty_everywhere": all(a.assignment[cid] for cid in poset.ids),
            "subobject_law": a.satisfies_law,
            "tight": a.is_tight,
        },
        "properties": {},
    }

    ok, w = alpha.is_sieve_valued()
    report["properties"]["sievehood"] = _status(ok, w)
    ok, w = _func_holds(alpha)
    report["properties"]["func"] = _status(ok, w)
    ok, w = _null_holds(alpha)
    report["properties"]["null"] = _status(ok, w)
    ok, w = _monotone_holds(alpha)
    report["properties"]["monotonicity"] = _status(ok, w)

    ok = True
    w = None
    for cid in poset.ids:
        n = poset.context(cid).n_atoms
        for p in range(1 << n):
            if not alpha.is_true(cid, p):
                continue
            for q in range(1 << n):
                if p & q == 0 and alpha.is_true(cid, q):
                    ok, w = False, {"v1": cid, "p": p, "q": q}
                    break
            if not ok:
                break
        if not ok:
            break
    report["properties"]["exclusivity"] = _status(ok, w)

    ok = True
    w = None
    for cid in poset.ids:
        if not alpha.is_true(cid, poset.context(cid).full_mask):
            ok, w = False, {"v1": cid}
            break
    report["properties"]["unit"] = _status(ok, w)

    report["all_hold"] = all(v["status"] == HOLDS for v in report["properties"].values())
    return report


def survey_properties_o(a: dict[str, frozenset[float]], rel_name: str,
                        category: OperatorCategory) -> dict:
    """Six-property survey for the eigenvalue-set schema over an operator
    category: a stage (arrow) enters when the relation holds between a's
    eigenvalue set at the arrow's source and the image of the proposition's
    eigenvalue set.  Subsethood is the distinguished relation."""
    set_rels = {
        "subset": lambda l, r: l <= r,
        "superset": lambda l, r: l >= r,
        "eq": lambda l, r: l == r,
        "intersects": lambda l, r: bool(l & r),
        "always-true": lambda l, r: True,
        "always-false": lambda l, r: False,
    }
    if rel_name not in set_rels:
        raise KeyError(f"unknown set relation {rel_name!r}")
    test = set_rels[rel_name]

    regularity = {
        "nonempty_everywhere": all(a.get(oid) for oid in category.ids),
        "covers_category": set(a) >= set(category.ids),
    }
    if not regularity["covers_category"]:
        return {"relation": rel_name, "regularity": regularity,
                "properties": {}, "all_hold": False,
                "skipped": "assignment does not cover the category"}

    def members(aid: str, delta: frozenset[float]) -> frozenset[tuple[str, str]]:
        return frozenset(
            (m.src, m.dst)
            for m in category.morphisms_into(aid)
            if test(a[m.src], m.map.image(delta))
        )

    def subsets(aid: str):
        spec = category.objects[aid].spectrum
        for mask in range(1 << len(spec)):
            yield frozenset(spec[i] for i in range(len(spec)) if mask >> i & 1)

    def all_into(aid: str) -> frozenset[tuple[str, str]]:
        return frozenset((m.src, m.dst) for m in category.morphisms_into(aid))

    report: dict = {"relation": rel_name, "regularity": regularity, "properties": {}}

    # (i) sievehood: closure under precomposition
    ok = True
    w = None
    for aid in category.ids:
        for delta in subsets(aid):
            mem = members(aid, delta)
            for (src, dst) in mem:
                for g in category.morphisms_into(src):
                    if (g.src, aid) not in mem:
                        ok, w = False, {"a": aid, "delta": sorted(delta),
                                        "f": (src, dst), "g": (g.src, g.dst)}
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            break
    report["properties"]["sievehood"] = _status(ok, w)

    # (ii) FUNC along every arrow
    ok = True
    w = None
    for f in list(category.morphisms.values()):
        aid, bid = f.dst, f.src
        for delta in subsets(aid):
            f_delta = f.map.image(delta)
            lhs = members(bid, f_delta)
            rhs = frozenset(
                (g.src, g.dst) for g in category.morphisms_into(bid)
                if (g.src, aid) in members(aid, delta)
            )
            if lhs != rhs:
                ok, w = False, {"f": (bid, aid), "delta": sorted(delta)}
                break
        if not ok:
            break
    report["properties"]["func"] = _status(ok, w)

    # (iii) null
    ok = True
    w = None
    for aid in category.ids:
        if members(aid, frozenset()):
            ok, w = False, {"a": aid}
            break
    report["properties"]["null"] = _status(ok, w)

    # (iv) monotonicity
    ok = True
    w = None
    for aid in category.ids:
        for d1 in subsets(aid):
            for d2 in subsets(aid):
                if d1 <= d2 and not members(aid, d1) <= members(aid, d2):
                    ok, w = False, {"a": aid, "d1": sorted(d1), "d2": sorted(d2)}
                    break
            if not ok:
                break
        if not ok:
            break
    report["properties"]["monotonicity"] = _status(ok, w)

    # (v) exclusivity
    ok = True
    w = None
    for aid in category.ids:
        full = all_into(aid)
        for d1 in subsets(aid):
            if members(aid, d1) != full:
                continue
            for d2 in subsets(aid):
                if d1 & d2 == frozenset() and members(aid, d2) == full:
                    ok, w = False, {"a": aid, "d1": sorted(d1), "d2": sorted(d2)}
                    break
            if not ok:
                break
        if not ok:
            break
    report["properties"]["exclusivity"] = _status(ok, w)

    # (vi) unit
    ok = True
    w = None
    for aid in category.ids:
        sigma = frozenset(category.objects[aid].spectrum)
        if members(aid, sigma) != all_into(aid):
            ok, w = False, {"a": aid}
            break
    report["properties"]["unit"] = _status(ok, w)

    report["all_hold"] = all(v["status"] == HOLDS for v in report["properties"].values())
    return report
