"""Dense complex linear algebra substrate.

Hermitian eigendecomposition with eigenvalue grouping, projector
construction, subspace tests and density-matrix supports.  Everything here
is small and dense (dims ~16 at most); all downstream lattice work reasons
exactly on integer masks, so this module is the only place where raw
floating point decisions are made.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tolerances import DEFAULT, Tolerances


class LinalgError(ValueError):
    """Invalid numerical input (non-Hermitian, dependent vectors, ...)."""


class GroupingError(LinalgError):
    """Eigenvalue cluster that cannot be resolved at the given width."""


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {m.shape}")
    return m


def _frozen(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A bounded self-adjoint operator on a finite-dimensional Hilbert space."""

    entries: np.ndarray

    def __init__(self, entries, tol: Tolerances = DEFAULT):
        m = _as_complex_matrix(entries)
        if np.max(np.abs(m - m.conj().T)) > tol.herm:
            raise LinalgError("matrix is not Hermitian within tolerance")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class Projector:
    """An orthogonal projector; rank is the trace rounded to the nearest integer."""

    entries: np.ndarray
    rank: int

    def __init__(self, entries, tol: Tolerances = DEFAULT):
        m = _as_complex_matrix(entries)
        if np.max(np.abs(m - m.conj().T)) > tol.herm:
            raise LinalgError("projector is not Hermitian within tolerance")
        if np.max(np.abs(m @ m - m)) > tol.proj_idem:
            raise LinalgError("projector is not idempotent within tolerance")
        tr = float(np.trace(m).real)
        rank = int(round(tr))
        if abs(tr - rank) > tol.trace_rank:
            raise LinalgError(f"projector trace {tr} is not close to an integer")
        object.__setattr__(self, "entries", _frozen(m))
        object.__setattr__(self, "rank", rank)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def leq(self, other: "Projector", tol: Tolerances = DEFAULT) -> bool:
        """Subspace containment self <= other, decided as other*self == self."""
        if self.dim != other.dim:
            raise LinalgError("dimension mismatch")
        return bool(np.max(np.abs(other.entries @ self.entries - self.entries)) < tol.certain)

    def orthogonal_to(self, other: "Projector", tol: Tolerances = DEFAULT) -> bool:
        return bool(np.max(np.abs(self.entries @ other.entries)) < tol.atom)

    def equals(self, other: "Projector", tol: Tolerances = DEFAULT) -> bool:
        return bool(np.max(np.abs(self.entries - other.entries)) < tol.atom)


def identity_projector(dim: int) -> Projector:
    return Projector(np.eye(dim))


def zero_projector(dim: int) -> Projector:
    return Projector(np.zeros((dim, dim)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A PSD, trace-one state; caches the projector onto its range."""

    entries: np.ndarray
    support_projector: Projector

    def __init__(self, entries, tol: Tolerances = DEFAULT):
        m = _as_complex_matrix(entries)
        if np.max(np.abs(m - m.conj().T)) > tol.herm:
            raise LinalgError("density matrix is not Hermitian within tolerance")
        evals, evecs = np.linalg.eigh(m)
        if evals.min() < tol.psd_floor:
            raise LinalgError(f"negative eigenvalue {evals.min()} below PSD floor")
        if abs(float(np.trace(m).real) - 1.0) > tol.trace_one:
            raise LinalgError("density matrix trace is not 1 within tolerance")
        # support = span of eigenvectors carrying weight above the support threshold
        keep = evals > tol.support_trace
        vecs = evecs[:, keep]
        supp = Projector(vecs @ vecs.conj().T)
        if np.max(np.abs(supp.entries @ m - m)) > 1e-8:
            raise LinalgError("support projector does not reproduce the state")
        object.__setattr__(self, "entries", _frozen(m))
        object.__setattr__(self, "support_projector", supp)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class StateVector:
    """A unit vector; `density()` gives the corresponding pure state."""

    amplitudes: np.ndarray

    def __init__(self, amplitudes, tol: Tolerances = DEFAULT):
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > tol.unit_norm:
            raise LinalgError("state vector is not normalised within tolerance")
        v = np.array(v)
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


def eig_hermitian(
    h: HermitianOperator,
    tol_group: float = DEFAULT.eig_group,
    tol: Tolerances = DEFAULT,
) -> list[tuple[float, Projector]]:
    """Grouped eigendecomposition: strictly increasing eigenvalues with
    mutually orthogonal eigenprojectors summing to the identity.

    Raw eigenvalues are chained into clusters wherever consecutive gaps are
    <= tol_group.  A cluster wider than tol_group is ambiguous (two raw
    eigenvalues straddle the grouping width without a clean gap) and is
    reported as an error rather than silently merged or split.
    """
    if tol_group <= 0:
        raise LinalgError("tol_group must be positive")
    evals, evecs = np.linalg.eigh(h.entries)
    groups: list[list[int]] = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[i - 1] <= tol_group:
            groups[-1].append(i)
        else:
            groups.append([i])
    out: list[tuple[float, Projector]] = []
    for g in groups:
        width = evals[g[-1]] - evals[g[0]]
        if width > tol_group:
            raise GroupingError(
                f"eigenvalue cluster {[float(evals[i]) for i in g]} is wider than "
                f"the grouping width {tol_group}; refusing to guess"
            )
        vecs = evecs[:, g]
        proj = Projector(vecs @ vecs.conj().T, tol=tol)
        out.append((float(np.mean(evals[g])), proj))
    # post-conditions: reconstruction and resolution of the grouped spectrum
    recon = sum(lam * p.entries for lam, p in out)
    if np.max(np.abs(recon - h.entries)) > tol.recon:
        raise LinalgError("spectral reconstruction failed")
    for (l1, _), (l2, _) in zip(out, out[1:]):
        if l2 - l1 <= tol_group:
            raise GroupingError("grouped eigenvalues are not separated by tol_group")
    return out


def projector_from_span(vectors, tol: Tolerances = DEFAULT) -> Projector:
    """Orthogonal projector onto the span of the given vectors.

    The vectors must be linearly independent (rank checked via SVD); the
    resulting rank equals the number of vectors.
    """
    vs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if not vs:
        raise LinalgError("empty span")
    a = np.column_stack(vs)
    if np.linalg.norm(a) == 0:
        raise LinalgError("zero vector in span")
    svals = np.linalg.svd(a, compute_uv=False)
    if svals.min() < 1e-8 * max(1.0, svals.max()):
        raise LinalgError("vectors are linearly dependent within rank tolerance")
    q, _ = np.linalg.qr(a)
    p = Projector(q @ q.conj().T, tol=tol)
    if p.rank != len(vs):
        raise LinalgError("projector rank does not match the number of vectors")
    return p


def commutes(a: HermitianOperator, b: HermitianOperator, tol: Tolerances = DEFAULT) -> bool:
    """Max-abs commutator test; pre-condition for sharing a context."""
    if a.dim != b.dim:
        raise LinalgError("dimension mismatch")
    comm = a.entries @ b.entries - b.entries @ a.entries
    return bool(np.max(np.abs(comm)) < tol.commute)


def certain(rho: DensityMatrix, p: Projector, tol: Tolerances = DEFAULT) -> bool:
    """Born-rule probability-1 test, decided as support containment.

    tr(rho P) = 1 exactly when the support of rho lies inside the range of
    P; the containment form P*S = S is robust at the boundary where a
    floating trace comparison would flap.
    """
    if rho.dim != p.dim:
        raise LinalgError("dimension mismatch")
    s = rho.support_projector.entries
    return bool(np.max(np.abs(p.entries @ s - s)) < tol.certain)
