"""Contexts, their projector lattices, spectra and the inclusion poset.

A context is a commutative algebra presented by its atoms: an orthogonal
resolution of the identity.  Its lattice is the Boolean algebra of sums of
atoms, encoded as integer bit masks over atom indices; its spectrum is the
set of characters, one per atom.  Inclusion of contexts is partition
coarsening.  Once a poset is built, every atom-of-the-coarse-context is
recorded as a bit mask over the fine context's atoms, and all downstream
reasoning is exact on those masks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HermitianOperator,
    Projector,
    commutes,
    eig_hermitian,
    identity_projector,
)
from .tolerances import DEFAULT, Tolerances

MAX_ATOMS_FOR_LATTICE = 20


class ContextError(ValueError):
    """Malformed context, lattice element or poset input."""


def _canonical_key(p: Projector) -> tuple:
    """Deterministic sort key over matrix entries (descending, so the
    standard-basis atoms keep their natural order)."""
    flat = p.entries.reshape(-1)
    return tuple(
        x for z in flat for x in (-round(z.real, 9) - 0.0, -round(z.imag, 9) - 0.0)
    )


@dataclass(frozen=True, eq=False)
class Context:
    """A commutative algebra given by its ordered list of atoms."""

    id: str
    atoms: tuple[Projector, ...]

    def __init__(self, id: str, atoms, tol: Tolerances = DEFAULT, canonicalize: bool = True):
        atoms = tuple(atoms)
        if not atoms:
            raise ContextError("a context needs at least one atom")
        dim = atoms[0].dim
        for a in atoms:
            if a.dim != dim:
                raise ContextError("atoms of mixed dimension")
            if a.rank < 1:
                raise ContextError("zero atom in context")
        for a, b in itertools.combinations(atoms, 2):
            if not a.orthogonal_to(b, tol):
                raise ContextError(f"atoms of context {id!r} are not orthogonal")
        total = sum(a.entries for a in atoms)
        if np.max(np.abs(total - np.eye(dim))) > tol.atom:
            raise ContextError(f"atoms of context {id!r} do not resolve the identity")
        if canonicalize:
            atoms = tuple(sorted(atoms, key=_canonical_key))
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "atoms", atoms)

    @property
    def dim(self) -> int:
        return self.atoms[0].dim

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def full_mask(self) -> int:
        return (1 << self.n_atoms) - 1

    def projector(self, mask: int) -> Projector:
        """The lattice projector for a bit mask over atom indices."""
        if mask < 0 or mask > self.full_mask:
            raise ContextError(f"mask {mask} out of range for context {self.id!r}")
        if mask == 0:
            return Projector(np.zeros((self.dim, self.dim)))
        m = sum(self.atoms[i].entries for i in range(self.n_atoms) if mask >> i & 1)
        return Projector(m)

    def member_mask(self, p: Projector, tol: Tolerances = DEFAULT) -> int | None:
        """The mask whose projector equals `p`, or None if p is not in the lattice."""
        if p.dim != self.dim:
            raise ContextError("dimension mismatch")
        mask = 0
        for i, a in enumerate(self.atoms):
            overlap = float(np.trace(a.entries @ p.entries).real)
            if overlap > a.rank / 2:
                mask |= 1 << i
        if self.projector(mask).equals(p, tol):
            return mask
        return None


def trivial_context(dim: int, id: str = "Vtriv") -> Context:
    return Context(id, [identity_projector(dim)])


@dataclass(frozen=True)
class LatticeElement:
    """A projector of a context's lattice, encoded as an atom-index bit mask."""

    context_id: str
    mask: int


@dataclass(frozen=True)
class Character:
    """A multiplicative functional on a context: the selection of one atom."""

    context_id: str
    atom_index: int


def context_from_operators(
    ops: list[HermitianOperator],
    id: str = "V",
    tol: Tolerances = DEFAULT,
    tol_group: float | None = None,
) -> Context:
    """The context generated by commuting operators: atoms are their joint
    eigenspace projectors (common refinement of the individual spectral
    decompositions)."""
    if not ops:
        raise ContextError("need at least one operator")
    dim = ops[0].dim
    for a, b in itertools.combinations(ops, 2):
        if not commutes(a, b, tol):
            raise ContextError("operators do not commute pairwise")
    tg = tol.eig_group if tol_group is None else tol_group
    blocks: list[np.ndarray] = [np.eye(dim, dtype=complex)]
    for op in ops:
        eig = eig_hermitian(op, tol_group=tg, tol=tol)
        refined = []
        for block in blocks:
            for _, proj in eig:
                prod = block @ proj.entries
                prod = (prod + prod.conj().T) / 2
                evals, evecs = np.linalg.eigh(prod)
                vecs = evecs[:, evals > 0.5]
                if vecs.shape[1] == 0:
                    continue
                refined.append(vecs @ vecs.conj().T)
        blocks = refined
    atoms = [Projector(b, tol=tol) for b in blocks]
    ctx = Context(id, atoms, tol=tol)
    for op in ops:
        for _, proj in eig_hermitian(op, tol_group=tg, tol=tol):
            if ctx.member_mask(proj, tol) is None:
                raise ContextError("joint refinement failed: spectral projector not in lattice")
    return ctx


def inclusion(v2: Context, v1: Context, tol: Tolerances = DEFAULT) -> bool:
    """True iff v2 <= v1: every atom of v2 is a sum of atoms of v1."""
    if v2.dim != v1.dim:
        raise ContextError("dimension mismatch")
    return _partition_map(v2, v1, tol) is not None


def _partition_map(v2: Context, v1: Context, tol: Tolerances) -> tuple[int, ...] | None:
    """For v2 <= v1, the mask over v1's atoms composing each atom of v2."""
    maps = []
    for a2 in v2.atoms:
        mask = v1.member_mask(a2, tol)
        if mask is None:
            return None
        maps.append(mask)
    return tuple(maps)


def lattice_elements(v: Context) -> list[LatticeElement]:
    """All 2^n masks of the context's Boolean lattice."""
    if v.n_atoms > MAX_ATOMS_FOR_LATTICE:
        raise ContextError(f"context {v.id!r} has too many atoms to enumerate")
    return [LatticeElement(v.id, m) for m in range(1 << v.n_atoms)]


def evaluate(v: Context, kappa: Character, a: HermitianOperator, tol: Tolerances = DEFAULT) -> float:
    """Gelfand evaluation of an algebra member at a character.

    `a` must be constant on each atom's range (i.e. lie in the algebra);
    the value at `kappa` is the constant on its atom.
    """
    if kappa.context_id != v.id:
        raise ContextError("character does not belong to this context")
    if a.dim != v.dim:
        raise ContextError("dimension mismatch")
    values = []
    for atom in v.atoms:
        c = float(np.trace(atom.entries @ a.entries).real) / atom.rank
        if np.max(np.abs(atom.entries @ a.entries - c * atom.entries)) > tol.atom:
            raise ContextError("operator is not in the context's algebra")
        values.append(c)
    return values[kappa.atom_index]


def v_of_p(v: Context, p: LatticeElement) -> frozenset[Character]:
    """The characters valuing the lattice element at 1: one per atom in the mask."""
    if p.context_id != v.id:
        raise ContextError("lattice element belongs to a different context")
    return frozenset(
        Character(v.id, i) for i in range(v.n_atoms) if p.mask >> i & 1
    )


@dataclass(frozen=True, eq=False)
class ContextPoset:
    """A finite fragment of the inclusion poset of contexts.

    Stores, for every comparable pair (v2 <= v1), the partition map giving
    each v2-atom as a bit mask over v1's atoms; everything downstream works
    on these exact encodings.  Immutable; `version` stamps derived data
    such as sieves.
    """

    contexts: dict[str, Context] = field(default_factory=dict)
    order: frozenset[tuple[str, str]] = frozenset()          # (sub, super) pairs, reflexive
    partition_maps: dict[tuple[str, str], tuple[int, ...]] = field(default_factory=dict)
    version: str = ""

    def __post_init__(self):
        ids = sorted(self.contexts)
        object.__setattr__(self, "version", "|".join(ids))

    @property
    def ids(self) -> list[str]:
        return sorted(self.contexts)

    @property
    def includes_trivial(self) -> bool:
        return any(c.n_atoms == 1 for c in self.contexts.values())

    def context(self, cid: str) -> Context:
        return self.contexts[cid]

    def leq(self, sub: str, sup: str) -> bool:
        return (sub, sup) in self.order

    def down_set(self, cid: str) -> list[str]:
        """Ids of all contexts <= cid (cid included), sorted."""
        return [x for x in self.ids if self.leq(x, cid)]

    def up_set(self, cid: str) -> list[str]:
        return [x for x in self.ids if self.leq(cid, x)]

    def maximal_ids(self) -> list[str]:
        return [
            x for x in self.ids
            if not any(self.leq(x, y) and x != y for y in self.ids)
        ]

    def pairs(self, proper_only: bool = False) -> list[tuple[str, str]]:
        """All comparable (sub, super) pairs, identity pairs included by default."""
        out = [p for p in self.order if not proper_only or p[0] != p[1]]
        return sorted(out)

    def cover_pairs(self) -> list[tuple[str, str]]:
        """Hasse edges: (sub, super) with nothing strictly between."""
        out = []
        for sub, sup in self.pairs(proper_only=True):
            between = any(
                self.leq(sub, mid) and self.leq(mid, sup) and mid not in (sub, sup)
                for mid in self.ids
            )
            if not between:
                out.append((sub, sup))
        return out

    def partition_map(self, sub: str, sup: str) -> tuple[int, ...]:
        if (sub, sup) not in self.partition_maps:
            raise ContextError(f"{sub!r} is not included in {sup!r}")
        return self.partition_maps[(sub, sup)]

    def lift_mask(self, sub: str, sup: str, mask: int) -> int:
        """Express a sub-context lattice element as a mask over the super-context."""
        pmap = self.partition_map(sub, sup)
        out = 0
        for j in range(len(pmap)):
            if mask >> j & 1:
                out |= pmap[j]
        return out


def build_poset(
    contexts: list[Context],
    add_trivial: bool = False,
    close_under_meets: bool = False,
    dim: int | None = None,
    tol: Tolerances = DEFAULT,
) -> ContextPoset:
    """Build the inclusion poset of the given contexts.

    Duplicate algebras (mutual inclusion) are merged onto the first id seen.
    With `add_trivial` the one-atom context is inserted; with
    `close_under_meets` common coarsenings (algebra intersections) are added
    until closure.  `dim` is only needed when no contexts are given.

    Which finite fragment of the full inclusion order is rich enough for a
    given law is the caller's choice; every verification in this package is
    relative to the supplied poset.
    """
    ctxs: list[Context] = []
    if contexts:
        dim = contexts[0].dim
        for c in contexts:
            if c.dim != dim:
                raise ContextError("contexts of mixed dimension")
    elif add_trivial and dim is None:
        raise ContextError("no contexts given: pass dim to add the trivial context")
    for c in contexts:
        if not any(inclusion(c, d, tol) and inclusion(d, c, tol) for d in ctxs):
            ctxs.append(c)
    if add_trivial and not any(c.n_atoms == 1 for c in ctxs):
        ctxs.append(trivial_context(dim))
    if close_under_meets:
        ctxs = _close_under_meets(ctxs, tol)
    ids = [c.id for c in ctxs]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ContextError(f"distinct contexts share ids: {dupes}")
    order = set()
    pmaps = {}
    for a in ctxs:
        for b in ctxs:
            pm = _partition_map(a, b, tol)
            if pm is not None:
                order.add((a.id, b.id))
                pmaps[(a.id, b.id)] = pm
    poset = ContextPoset(
        contexts={c.id: c for c in ctxs},
        order=frozenset(order),
        partition_maps=pmaps,
    )
    _check_partial_order(poset)
    return poset


def _close_under_meets(ctxs: list[Context], tol: Tolerances) -> list[Context]:
    """Add pairwise algebra intersections until closure (trivial meets skipped)."""
    out = list(ctxs)
    made = 1
    while made:
        made = 0
        for a, b in itertools.combinations(list(out), 2):
            m = _meet(a, b, tol)
            if m is None:
                continue
            if not any(inclusion(m, d, tol) and inclusion(d, m, tol) for d in out):
                meet_id = f"meet({a.id},{b.id})"
                out.append(Context(meet_id, m.atoms, tol=tol))
                made += 1
    return out


def _meet(a: Context, b: Context, tol: Tolerances) -> Context | None:
    """The intersection algebra of two contexts; None when it is trivial."""
    if a.n_atoms > MAX_ATOMS_FOR_LATTICE:
        raise ContextError("meet enumeration bound exceeded")
    common: list[int] = []
    for mask in range(1, 1 << a.n_atoms):
        if b.member_mask(a.projector(mask), tol) is not None:
            common.append(mask)
    # atoms of the meet = minimal non-zero common elements
    minimal = [m for m in common if not any(o != m and o & m == o for o in common)]
    if len(minimal) <= 1:
        return None
    atoms = [a.projector(m) for m in minimal]
    return Context("meet", atoms, tol=tol)


def _check_partial_order(poset: ContextPoset) -> None:
    ids = poset.ids
    for x in ids:
        if not poset.leq(x, x):
            raise ContextError("inclusion is not reflexive")
    for x, y in itertools.combinations(ids, 2):
        if poset.leq(x, y) and poset.leq(y, x):
            raise ContextError(f"distinct contexts {x!r}, {y!r} are mutually included")
    for x in ids:
        for y in ids:
            for z in ids:
                if poset.leq(x, y) and poset.leq(y, z) and not poset.leq(x, z):
                    raise ContextError("inclusion is not transitive")
