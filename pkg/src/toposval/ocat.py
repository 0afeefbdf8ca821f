"""The category of discrete-spectrum self-adjoint operators.

Objects are operators carried with their spectral decomposition; a
morphism B -> A exists when B is a function of A, and is represented by
that function's restriction to the spectrum of A.  In finite dimension
every spectrum is finite, so images of spectra are spectra on the nose and
the support/coarse-graining identities hold exactly.  Eigenvalues are
snapped to canonical representatives so that all set operations on reals
are exact.

A vector state is recoverable from the (operator, eigenvalue-set) pairs it
makes certain, so its certainty valuation both determines and is
determined by its totally-true assignments.  That is a fact about the
family, recorded here for reference; no operation hangs off it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DensityMatrix,
    HermitianOperator,
    Projector,
    StateVector,
    certain,
    eig_hermitian,
)
from .tolerances import DEFAULT, Tolerances


class OcatError(ValueError):
    """Bad operator-category input (unknown eigenvalue, unmatched spectrum...)."""


def canonical_values(values, tol: float = DEFAULT.eig_match) -> list[float]:
    """Chain-group a list of reals at the given width and return one
    representative per group (the smallest member), sorted."""
    vs = sorted(float(v) for v in values)
    reps = []
    for v in vs:
        if not reps or v - reps[-1][-1] > tol:
            reps.append([v])
        else:
            reps[-1].append(v)
    return [g[0] for g in reps]


def snap(value: float, anchors, tol: float = DEFAULT.eig_match) -> float:
    """The anchor closest to `value`, required to be within tolerance."""
    best = min(anchors, key=lambda a: abs(a - value))
    if abs(best - value) > tol:
        raise OcatError(f"value {value} does not match any anchor within {tol}")
    return best


@dataclass(frozen=True, eq=False)
class ODecomposition:
    """An operator with its ordered distinct eigenvalues and eigenprojectors."""

    id: str
    operator: HermitianOperator
    spectrum: tuple[float, ...]
    eigenprojectors: tuple[Projector, ...]

    @classmethod
    def from_operator(cls, op: HermitianOperator, id: str = "A",
                      tol: Tolerances = DEFAULT) -> "ODecomposition":
        pairs = eig_hermitian(op, tol_group=tol.eig_group, tol=tol)
        return cls(
            id=id,
            operator=op,
            spectrum=tuple(lam for lam, _ in pairs),
            eigenprojectors=tuple(p for _, p in pairs),
        )

    @property
    def dim(self) -> int:
        return self.operator.dim

    def projector_for(self, subset: frozenset[float]) -> Projector:
        """The spectral projector of a subset of the spectrum."""
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for lam, p in zip(self.spectrum, self.eigenprojectors):
            if lam in subset:
                m = m + p.entries
        return Projector(m)

    def check_subset(self, subset) -> frozenset[float]:
        out = frozenset(float(x) for x in subset)
        for x in out:
            if x not in self.spectrum:
                raise OcatError(f"{x} is not an eigenvalue of {self.id!r}")
        return out


@dataclass(frozen=True)
class EigenvalueMap:
    """A real function restricted to an operator's spectrum.

    Values are canonicalized at construction (grouped at the matching
    width), so applying the map and forming image sets are exact set
    operations afterwards.
    """

    pairs: tuple[tuple[float, float], ...]

    @classmethod
    def from_dict(cls, d: dict[float, float], tol: float = DEFAULT.eig_match) -> "EigenvalueMap":
        reps = canonical_values(d.values(), tol)
        snapped = {float(k): snap(float(v), reps, tol) for k, v in d.items()}
        return cls(tuple(sorted(snapped.items())))

    def __call__(self, lam: float) -> float:
        for k, v in self.pairs:
            if k == lam:
                return v
        raise OcatError(f"{lam} is outside the domain of the map")

    @property
    def domain(self) -> tuple[float, ...]:
        return tuple(k for k, _ in self.pairs)

    def image(self, subset: frozenset[float]) -> frozenset[float]:
        return frozenset(self(x) for x in subset)

    def preimage(self, subset: frozenset[float]) -> frozenset[float]:
        return frozenset(k for k, v in self.pairs if v in subset)


def identity_map(a: ODecomposition) -> EigenvalueMap:
    return EigenvalueMap.from_dict({lam: lam for lam in a.spectrum})


def apply_map(f: EigenvalueMap, a: ODecomposition, id: str | None = None) -> ODecomposition:
    """Construct f(A) directly from A's decomposition; the spectrum of the
    result is exactly the image of A's spectrum (no re-diagonalization)."""
    if set(f.domain) != set(a.spectrum):
        raise OcatError("map domain does not equal the operator's spectrum")
    values = sorted(set(f(lam) for lam in a.spectrum))
    projs = []
    for v in values:
        m = np.zeros((a.dim, a.dim), dtype=complex)
        for lam, p in zip(a.spectrum, a.eigenprojectors):
            if f(lam) == v:
                m = m + p.entries
        projs.append(Projector(m))
    entries = sum(v * p.entries for v, p in zip(values, projs))
    return ODecomposition(
        id=id or f"f({a.id})",
        operator=HermitianOperator(entries),
        spectrum=tuple(values),
        eigenprojectors=tuple(projs),
    )


def discover_morphism(b: ODecomposition, a: ODecomposition,
                      tol: Tolerances = DEFAULT) -> EigenvalueMap | None:
    """The function with B = f(A), if it exists: B must act as a scalar on
    every eigenspace of A, and the scalars must reconstruct B."""
    if b.dim != a.dim:
        raise OcatError("dimension mismatch")
    mapping: dict[float, float] = {}
    for lam, e in zip(a.spectrum, a.eigenprojectors):
        c = float(np.trace(b.operator.entries @ e.entries).real) / e.rank
        if np.max(np.abs(b.operator.entries @ e.entries - c * e.entries)) > tol.eig_match:
            return None
        try:
            mapping[lam] = snap(c, b.spectrum, tol.eig_match)
        except OcatError:
            return None
    recon = sum(mapping[lam] * e.entries for lam, e in zip(a.spectrum, a.eigenprojectors))
    if np.max(np.abs(recon - b.operator.entries)) > tol.recon:
        return None
    if set(mapping.values()) != set(b.spectrum):
        return None  # b has spectral weight outside the image: not a function of a
    return EigenvalueMap(tuple(sorted(mapping.items())))


def o_coarse_grain(f: EigenvalueMap, a: ODecomposition, delta,
                   tol: Tolerances = DEFAULT) -> Projector:
    """The spectral projector of "f(A) lands in f(delta)".

    Computed directly as the preimage sum, and cross-checked against the
    independent infimum over the spectral algebra of f(A); the two paths
    must select exactly the same eigenvalues.
    """
    delta = a.check_subset(delta)
    f_delta = f.image(delta)
    pre = f.preimage(f_delta)
    direct = a.projector_for(pre)

    b = apply_map(f, a)
    e_delta = a.projector_for(delta)
    n = len(b.spectrum)
    kept = None
    for mask in range(1 << n):
        q = frozenset(b.spectrum[i] for i in range(n) if mask >> i & 1)
        qp = b.projector_for(q)
        if e_delta.leq(qp, tol):
            kept = q if kept is None else kept & q
    if kept is None:
        raise OcatError("no dominating element in the spectral algebra")
    inf_pre = frozenset(lam for lam in a.spectrum if f(lam) in kept)
    if inf_pre != pre:
        raise OcatError(
            f"coarse-graining paths disagree: preimage {sorted(pre)} vs infimum {sorted(inf_pre)}"
        )
    return direct


def elementary_support(state: StateVector | DensityMatrix, a: ODecomposition,
                       tol: Tolerances = DEFAULT) -> frozenset[float]:
    """The least set of eigenvalues carrying probability 1 for the state."""
    if state.dim != a.dim:
        raise OcatError("dimension mismatch")
    out = []
    for lam, e in zip(a.spectrum, a.eigenprojectors):
        if isinstance(state, StateVector):
            if np.linalg.norm(e.entries @ state.amplitudes) > tol.vector_support:
                out.append(lam)
        else:
            if float(np.trace(state.entries @ e.entries).real) > tol.support_trace:
                out.append(lam)
    return frozenset(out)


def state_certain(state: StateVector | DensityMatrix, p: Projector,
                  tol: Tolerances = DEFAULT) -> bool:
    """Probability-1 test for either kind of state."""
    if isinstance(state, StateVector):
        return bool(np.linalg.norm(p.entries @ state.amplitudes - state.amplitudes)
                    < tol.vector_support)
    return certain(state, p, tol)


@dataclass(frozen=True)
class Morphism:
    """src = f(dst): the map carries eigenvalues of dst to eigenvalues of src."""

    src: str
    dst: str
    map: EigenvalueMap


class OperatorCategory:
    """A finite full subcategory: a list of operators with all morphisms
    discovered pairwise (identities included)."""

    def __init__(self, objects: list[ODecomposition], tol: Tolerances = DEFAULT):
        ids = [o.id for o in objects]
        if len(set(ids)) != len(ids):
            raise OcatError("duplicate operator ids")
        dims = {o.dim for o in objects}
        if len(dims) > 1:
            raise OcatError("operators of mixed dimension")
        self.objects = {o.id: o for o in objects}
        self.morphisms: dict[tuple[str, str], Morphism] = {}
        for b in objects:
            for a in objects:
                f = discover_morphism(b, a, tol)
                if f is not None:
                    self.morphisms[(b.id, a.id)] = Morphism(b.id, a.id, f)

    @property
    def ids(self) -> list[str]:
        return sorted(self.objects)

    def morphisms_into(self, aid: str) -> list[Morphism]:
        return sorted(
            (m for (src, dst), m in self.morphisms.items() if dst == aid),
            key=lambda m: (m.src, m.dst),
        )

    def compose(self, g: Morphism, f: Morphism) -> EigenvalueMap:
        """Eigenvalue map of the composite (g after f as arrows): given
        f: B -> A and g: C -> B, the composite C -> A sends each eigenvalue
        of A through f's map then g's map."""
        if g.dst != f.src:
            raise OcatError("morphisms do not compose")
        return EigenvalueMap(tuple(
            (lam, g.map(f.map(lam))) for lam in f.map.domain
        ))

    def check_composition_closure(self) -> tuple[bool, dict | None]:
        """Every composable pair must have a discovered composite whose map
        agrees with the composition pointwise on the spectrum."""
        for f in self.morphisms.values():
            for g in self.morphisms.values():
                if g.dst != f.src:
                    continue
                h = self.morphisms.get((g.src, f.dst))
                if h is None:
                    return False, {"f": (f.src, f.dst), "g": (g.src, g.dst),
                                   "missing": (g.src, f.dst)}
                composed = self.compose(g, f)
                if h.map.pairs != composed.pairs:
                    return False, {"f": (f.src, f.dst), "g": (g.src, g.dst),
                                   "composite_mismatch": (g.src, f.dst)}
        return True, None


def nu_psi_o(state: StateVector | DensityMatrix, a: ODecomposition, delta,
             category: OperatorCategory, tol: Tolerances = DEFAULT) -> frozenset[tuple[str, str]]:
    """Morphisms into `a` along which the proposition coarse-grains to a
    probability-1 projector for the state."""
    delta = a.check_subset(delta)
    out = []
    for m in category.morphisms_into(a.id):
        e = o_coarse_grain(m.map, a, delta, tol)
        if state_certain(state, e, tol):
            out.append((m.src, m.dst))
    return frozenset(out)


def characterize_check(state: StateVector | DensityMatrix, a: ODecomposition, delta,
                       category: OperatorCategory, tol: Tolerances = DEFAULT) -> dict:
    """The probability-1 morphism set must equal the support
    characterization: arrows whose map sends the elementary support inside
    the image of the proposition's eigenvalue set."""
    delta = a.check_subset(delta)
    definitional = nu_psi_o(state, a, delta, category, tol)
    s = elementary_support(state, a, tol)
    by_support = frozenset(
        (m.src, m.dst)
        for m in category.morphisms_into(a.id)
        if m.map.image(s) <= m.map.image(delta)
    )
    return {
        "passed": definitional == by_support,
        "definitional": sorted(definitional),
        "by_support": sorted(by_support),
        "support": sorted(s),
        "delta": sorted(delta),
    }


def check_sieve_on_o(state, a: ODecomposition, delta,
                     category: OperatorCategory, tol: Tolerances = DEFAULT) -> tuple[bool, dict | None]:
    """The probability-1 morphism set is closed under precomposition."""
    members = nu_psi_o(state, a, delta, category, tol)
    for (src, dst) in members:
        f = category.morphisms[(src, dst)]
        for g in category.morphisms_into(src):
            if (g.src, a.id) not in members:
                return False, {"f": (src, dst), "g": (g.src, g.dst)}
    return True, None


def func_subset_check(state: StateVector | DensityMatrix, a: ODecomposition,
                      f: EigenvalueMap, tol: Tolerances = DEFAULT) -> dict:
    """Pushing the elementary support through the map must give exactly the
    elementary support of the image operator (equality, not mere
    containment, on discrete spectra)."""
    b = apply_map(f, a)
    lhs = f.image(elementary_support(state, a, tol))
    rhs = elementary_support(state, b, tol)
    return {
        "passed": lhs == rhs,
        "subset": lhs <= rhs,
        "pushed_support": sorted(lhs),
        "image_support": sorted(rhs),
    }


def support_subobject_check(state, category: OperatorCategory,
                            tol: Tolerances = DEFAULT) -> dict:
    """The subset-law of supports, swept over every morphism of the category."""
    failures = []
    checked = 0
    for m in category.morphisms.values():
        checked += 1
        a = category.objects[m.dst]
        res = func_subset_check(state, a, m.map, tol)
        if not res["passed"]:
            failures.append({"src": m.src, "dst": m.dst, **res})
    return {"passed": not failures, "morphismsChecked": checked, "failures": failures}
