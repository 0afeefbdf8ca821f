"""Spectral and coarse-graining presheaves over a finite context poset.

Assigns each context its character set (spectrum) and its projector
lattice; the morphism actions are functional restriction and the
least-upper-coarsening map.  Sieves are downward-closed subsets of a
context's down-set and serve as the truth values; the subobject classifier
is present through `Sieve` and `pullback`, which is all the machinery the
valuations need.  `check_nat_iso` verifies that restriction of character
sets and coarse-graining of lattice elements are the same thing, stage by
stage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .contexts import Character, ContextError, ContextPoset, LatticeElement, v_of_p


class SieveError(ValueError):
    """Not a sieve: member above the apex, or not downward closed."""


@dataclass(frozen=True)
class Sieve:
    """A downward-closed set of subcontexts of the apex, in a fixed poset."""

    apex: str
    members: frozenset[str]
    poset_version: str

    def __le__(self, other: "Sieve") -> bool:
        if self.apex != other.apex or self.poset_version != other.poset_version:
            raise SieveError("sieves on different apexes/posets are incomparable")
        return self.members <= other.members


def make_sieve(poset: ContextPoset, apex: str, members) -> Sieve:
    """Validate and build a sieve on `apex` from an iterable of context ids."""
    members = frozenset(members)
    for m in members:
        if not poset.leq(m, apex):
            raise SieveError(f"{m!r} is not below the apex {apex!r}")
    for m in members:
        for below in poset.down_set(m):
            if below not in members:
                raise SieveError(
                    f"not downward closed: {below!r} <= {m!r} but missing"
                )
    return Sieve(apex, members, poset.version)


def is_downward_closed(poset: ContextPoset, apex: str, members: frozenset[str]) -> bool:
    return all(poset.leq(m, apex) for m in members) and all(
        below in members for m in members for below in poset.down_set(m)
    )


def true_sieve(poset: ContextPoset, apex: str) -> Sieve:
    """The principal sieve: every subcontext of the apex."""
    return Sieve(apex, frozenset(poset.down_set(apex)), poset.version)


def empty_sieve(poset: ContextPoset, apex: str) -> Sieve:
    return Sieve(apex, frozenset(), poset.version)


def sigma_restrict(poset: ContextPoset, sub: str, sup: str, kappa: Character) -> Character:
    """Restrict a character of `sup` to `sub`: pick the sub-atom containing its atom."""
    if kappa.context_id != sup:
        raise ContextError("character does not live at the given context")
    pmap = poset.partition_map(sub, sup)
    for j, block in enumerate(pmap):
        if block >> kappa.atom_index & 1:
            return Character(sub, j)
    raise ContextError("partition map does not cover the atom")  # unreachable on valid posets


def coarse_grain(poset: ContextPoset, sub: str, sup: str, p: LatticeElement) -> LatticeElement:
    """The least element of the sub-context's lattice above `p`.

    Production path: a sub-atom enters exactly when its block of sup-atoms
    meets the mask.  Agrees with the brute-force lattice infimum
    (`coarse_grain_bruteforce`), which is kept as an independent oracle.
    """
    if p.context_id != sup:
        raise ContextError("lattice element does not live at the given context")
    pmap = poset.partition_map(sub, sup)
    mask = 0
    for j, block in enumerate(pmap):
        if block & p.mask:
            mask |= 1 << j
    return LatticeElement(sub, mask)


def coarse_grain_bruteforce(poset: ContextPoset, sub: str, sup: str, p: LatticeElement) -> LatticeElement:
    """Infimum of all sub-lattice elements dominating `p`, by full enumeration."""
    if p.context_id != sup:
        raise ContextError("lattice element does not live at the given context")
    n = poset.context(sub).n_atoms
    dominating = [
        q for q in range(1 << n)
        if poset.lift_mask(sub, sup, q) & p.mask == p.mask
    ]
    if not dominating:
        raise ContextError("no dominating element; partition map is broken")
    inf = dominating[0]
    for q in dominating[1:]:
        inf &= q
    if poset.lift_mask(sub, sup, inf) & p.mask != p.mask:
        raise ContextError("infimum does not dominate; lattice is not closed under meets")
    return LatticeElement(sub, inf)


def clo_sigma_restrict(
    poset: ContextPoset, sub: str, sup: str, chars: frozenset[Character]
) -> frozenset[Character]:
    """Image of a character set under restriction (the power-object action)."""
    return frozenset(sigma_restrict(poset, sub, sup, k) for k in chars)


def pullback(poset: ContextPoset, sub: str, sup: str, s: Sieve) -> Sieve:
    """Pull a sieve on `sup` back to `sub`: keep the members below `sub`."""
    if s.apex != sup:
        raise SieveError("sieve apex does not match the given context")
    if s.poset_version != poset.version:
        raise SieveError("sieve was built against a different poset")
    if not poset.leq(sub, sup):
        raise ContextError(f"{sub!r} is not included in {sup!r}")
    members = frozenset(m for m in s.members if poset.leq(m, sub))
    return Sieve(sub, members, poset.version)


@dataclass(frozen=True, eq=False)
class GlobalElementG:
    """A per-context lattice element that matches up under coarse-graining.

    `enforce=False` admits a broken assignment (for witness construction);
    `satisfies_matching` records whether the matching law actually holds.
    """

    poset: ContextPoset
    assignment: dict[str, int]  # context id -> mask
    satisfies_matching: bool

    def __init__(self, poset: ContextPoset, assignment: dict[str, int], enforce: bool = True):
        assignment = dict(assignment)
        if set(assignment) != set(poset.ids):
            raise ContextError("assignment must cover every context of the poset")
        for cid, mask in assignment.items():
            if not 0 <= mask <= poset.context(cid).full_mask:
                raise ContextError(f"mask {mask} out of range at {cid!r}")
        ok, _ = _matching_law(poset, assignment)
        if enforce and not ok:
            raise ContextError("assignment violates the coarse-graining matching law")
        object.__setattr__(self, "poset", poset)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "satisfies_matching", ok)

    def element(self, cid: str) -> LatticeElement:
        return LatticeElement(cid, self.assignment[cid])


def _matching_law(poset: ContextPoset, assignment: dict[str, int]):
    for sub, sup in poset.pairs(proper_only=True):
        want = coarse_grain(poset, sub, sup, LatticeElement(sup, assignment[sup])).mask
        if assignment[sub] != want:
            return False, (sub, sup)
    return True, None


@dataclass(frozen=True, eq=False)
class SubobjectSigma:
    """A per-context character set closed under restriction.

    The subobject law asks restriction of the finer set to land inside the
    coarser one; the `tight` variant asks for equality.  As with
    `GlobalElementG`, `enforce=False` admits broken assignments and the
    flags record what actually holds.
    """

    poset: ContextPoset
    assignment: dict[str, frozenset[int]]  # context id -> atom indices
    satisfies_law: bool
    is_tight: bool

    def __init__(self, poset: ContextPoset, assignment: dict[str, frozenset[int]], enforce: bool = True):
        assignment = {k: frozenset(v) for k, v in assignment.items()}
        if set(assignment) != set(poset.ids):
            raise ContextError("assignment must cover every context of the poset")
        for cid, indices in assignment.items():
            n = poset.context(cid).n_atoms
            if any(not 0 <= i < n for i in indices):
                raise ContextError(f"atom index out of range at {cid!r}")
        law = True
        tight = True
        for sub, sup in poset.pairs(proper_only=True):
            image = _restrict_indices(poset, sub, sup, assignment[sup])
            if not image <= assignment[sub]:
                law = False
            if image != assignment[sub]:
                tight = False
        if enforce and not law:
            raise ContextError("assignment violates the subobject law")
        object.__setattr__(self, "poset", poset)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "satisfies_law", law)
        object.__setattr__(self, "is_tight", tight)

    def characters(self, cid: str) -> frozenset[Character]:
        return frozenset(Character(cid, i) for i in self.assignment[cid])


def _restrict_indices(poset: ContextPoset, sub: str, sup: str, indices) -> frozenset[int]:
    return frozenset(
        sigma_restrict(poset, sub, sup, Character(sup, i)).atom_index for i in indices
    )


def subobject_from_global_element(gamma: GlobalElementG) -> SubobjectSigma:
    """The character sets certain of a matching family of projectors."""
    if not gamma.satisfies_matching:
        raise ContextError("not a global element: matching law violated")
    poset = gamma.poset
    assignment = {
        cid: frozenset(
            k.atom_index
            for k in v_of_p(poset.context(cid), gamma.element(cid))
        )
        for cid in poset.ids
    }
    return SubobjectSigma(poset, assignment)


def check_nat_iso(poset: ContextPoset) -> dict:
    """Verify, for every pair and every lattice element, that restricting the
    certain-character set equals the certain-character set of the
    coarse-graining; also that distinct lattice elements keep distinct
    character sets at every stage.

    Returns {"passed", "pairsChecked", "elementsChecked", "failures"}.
    """
    failures = []
    pairs_checked = 0
    elements_checked = 0
    for sub, sup in poset.pairs():
        pairs_checked += 1
        v1 = poset.context(sup)
        for mask in range(1 << v1.n_atoms):
            elements_checked += 1
            p = LatticeElement(sup, mask)
            lhs = clo_sigma_restrict(poset, sub, sup, v_of_p(v1, p))
            rhs = v_of_p(poset.context(sub), coarse_grain(poset, sub, sup, p))
            if lhs != rhs:
                failures.append({
                    "v1": sup,
                    "v2": sub,
                    "mask": mask,
                    "lhs": sorted(k.atom_index for k in lhs),
                    "rhs": sorted(k.atom_index for k in rhs),
                })
    for cid in poset.ids:
        v = poset.context(cid)
        seen: dict[frozenset[int], int] = {}
        for mask in range(1 << v.n_atoms):
            chars = frozenset(
                k.atom_index for k in v_of_p(v, LatticeElement(cid, mask))
            )
            if chars in seen:
                failures.append({
                    "v1": cid, "v2": cid, "mask": mask,
                    "lhs": sorted(chars), "rhs": sorted(chars),
                    "collidesWithMask": seen[chars],
                })
            seen[chars] = mask
    return {
        "passed": not failures,
        "pairsChecked": pairs_checked,
        "elementsChecked": elements_checked,
        "failures": failures,
    }
