"""Seeded fixtures and random draws used by checks, witness searches and tests.

Random contexts are partitions of a random orthonormal basis, so their
atoms stay numerically clean; random posets mix a few bases with
coarsenings of each so that comparable pairs actually occur.
"""

from __future__ import annotations

import numpy as np

from .contexts import Context, ContextPoset, build_poset, trivial_context
from .linalg import DensityMatrix, HermitianOperator, Projector, StateVector
from .tolerances import DEFAULT, Tolerances


def fix_a() -> ContextPoset:
    """The canonical dim-3 chain: diagonal context, its {P0, P1+P2}
    coarsening, and the trivial context."""
    p0 = Projector(np.diag([1, 0, 0]).astype(complex))
    p1 = Projector(np.diag([0, 1, 0]).astype(complex))
    p2 = Projector(np.diag([0, 0, 1]).astype(complex))
    p12 = Projector(np.diag([0, 1, 1]).astype(complex))
    v1 = Context("V1", [p0, p1, p2])
    v2 = Context("V2", [p0, p12])
    return build_poset([v1, v2, trivial_context(3)])


def diag_plus_trivial(dim: int = 2) -> ContextPoset:
    """Diagonal basis context plus the trivial context."""
    atoms = [Projector(np.diag([1.0 if i == j else 0.0 for i in range(dim)])) for j in range(dim)]
    return build_poset([Context("Vdiag", atoms), trivial_context(dim)])


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_partition(rng: np.random.Generator, dim: int, max_blocks: int | None = None) -> list[list[int]]:
    """A random set partition of range(dim) with at most max_blocks blocks."""
    cap = dim if max_blocks is None else min(max_blocks, dim)
    n_blocks = int(rng.integers(1, cap + 1))
    blocks: list[list[int]] = [[] for _ in range(n_blocks)]
    idx = list(rng.permutation(dim))
    for j in range(n_blocks):
        blocks[j].append(int(idx[j]))
    for i in idx[n_blocks:]:
        blocks[int(rng.integers(0, n_blocks))].append(int(i))
    return [sorted(b) for b in blocks if b]


def coarsen_partition(rng: np.random.Generator, blocks: list[list[int]]) -> list[list[int]]:
    """Merge random blocks of a partition (proper coarsening when possible)."""
    if len(blocks) == 1:
        return blocks
    i, j = rng.choice(len(blocks), size=2, replace=False)
    merged = sorted(blocks[int(i)] + blocks[int(j)])
    rest = [b for k, b in enumerate(blocks) if k not in (int(i), int(j))]
    return [merged] + rest


def context_from_basis(basis: np.ndarray, blocks: list[list[int]], cid: str,
                       tol: Tolerances = DEFAULT) -> Context:
    atoms = []
    for b in blocks:
        vecs = basis[:, b]
        atoms.append(Projector(vecs @ vecs.conj().T, tol=tol))
    return Context(cid, atoms, tol=tol)


def random_poset(
    rng: np.random.Generator,
    dim: int | None = None,
    max_contexts: int = 12,
    max_atoms: int = 6,
) -> ContextPoset:
    """A random finite poset: a few random bases, each with a chain of
    coarsenings, plus the trivial context."""
    if dim is None:
        dim = int(rng.integers(2, 7))
    n_bases = int(rng.integers(1, 4))
    ctxs = []
    counter = 0
    budget = max_contexts - 1  # leave room for the trivial context
    for b in range(n_bases):
        basis = random_unitary(rng, dim)
        blocks = random_partition(rng, dim, max_blocks=max_atoms)
        chain_len = int(rng.integers(1, 4))
        for _ in range(chain_len):
            if len(ctxs) >= budget:
                break
            ctxs.append(context_from_basis(basis, blocks, f"C{counter}"))
            counter += 1
            blocks = coarsen_partition(rng, blocks)
    return build_poset(ctxs, add_trivial=True, dim=dim)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    if rank is None:
        rank = int(rng.integers(1, dim + 1))
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v / np.linalg.norm(v))


def random_hermitian(rng: np.random.Generator, dim: int) -> HermitianOperator:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator((g + g.conj().T) / 2)


def random_degenerate_hermitian(
    rng: np.random.Generator, dim: int, n_eigenvalues: int | None = None
) -> HermitianOperator:
    """Random Hermitian with eigenvalues drawn from a small integer set, so
    degenerate spectra occur with high probability."""
    if n_eigenvalues is None:
        n_eigenvalues = int(rng.integers(1, dim + 1))
    u = random_unitary(rng, dim)
    pool = rng.choice(np.arange(-3, 4), size=n_eigenvalues, replace=False)
    evals = pool[rng.integers(0, n_eigenvalues, size=dim)]
    return HermitianOperator(u @ np.diag(evals.astype(complex)) @ u.conj().T)


def random_category(rng: np.random.Generator, dim: int):
    """A small operator category: a possibly-degenerate anchor, two random
    functions of it, the unit, and sometimes an unrelated operator.
    Returns (category, anchor id)."""
    from .ocat import EigenvalueMap, ODecomposition, OperatorCategory, apply_map

    a = ODecomposition.from_operator(random_degenerate_hermitian(rng, dim), id="A")
    objects = [a]
    for i in range(2):
        f = EigenvalueMap.from_dict({
            lam: float(rng.integers(-2, 3)) for lam in a.spectrum
        })
        objects.append(apply_map(f, a, id=f"F{i}"))
    objects.append(ODecomposition.from_operator(
        HermitianOperator(np.eye(dim, dtype=complex)), id="one"))
    if rng.random() < 0.3:
        objects.append(ODecomposition.from_operator(
            random_hermitian(rng, dim), id="loose"))
    # ids must be unique even when two draws of F coincide as operators
    return OperatorCategory(objects), "A"
