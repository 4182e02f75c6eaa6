"""Commutants and Wedderburn structure of finite-dimensional dagger-algebras.

An algebra is stored in the coordinates of its unit's range: if the unit is
a projector ``P`` of rank ``r`` with isometry ``V`` (``V V^H = P``), every basis
element is an ``r x r`` matrix and ``V B V^H`` is its image in ``B(H)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .channel import Projector
from .errors import DegenerateSample, StructureInconsistent
from .linalg import DEFAULT_TOL, RANK_TOL, STRICT_TOL

# clustering of sampled central / relative-commutant spectra
SAMPLE_CLUSTER_TOL = 1e-6
PATTERN_TOL = 1e-7


@dataclass(frozen=True)
class MatrixAlgebra:
    ambient_dim: int
    unit: Projector
    isometry: np.ndarray
    basis: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def rank(self) -> int:
        """Dimension of the unit's range, i.e. the size of the basis matrices."""
        return self.isometry.shape[1]

    def embed(self, x: np.ndarray) -> np.ndarray:
        return self.isometry @ x @ self.isometry.conj().T

    def compress(self, x: np.ndarray) -> np.ndarray:
        return self.isometry.conj().T @ x @ self.isometry

    def embedded_basis(self) -> list[np.ndarray]:
        return [self.embed(b) for b in self.basis]

    def membership_residual(self, x: np.ndarray) -> float:
        """Distance from compressed ``x`` to the algebra."""
        return linalg.span_residual(x, self.basis)

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> np.ndarray:
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        x = sum(ci * b for ci, b in zip(c, self.basis))
        if hermitian:
            x = 0.5 * (x + x.conj().T)
        return x / max(float(np.linalg.norm(x)), 1e-300)

    def invariant_residuals(self) -> dict[str, float]:
        """Closure under adjoint and product, and the unit acting as identity."""
        eye = np.eye(self.rank)
        adj = max((self.membership_residual(b.conj().T) for b in self.basis), default=0.0)
        prod = 0.0
        for bi in self.basis:
            for bj in self.basis:
                prod = max(prod, self.membership_residual(bi @ bj))
        unit = max((float(np.linalg.norm(eye @ b - b)) for b in self.basis), default=0.0)
        unit = max(unit, self.membership_residual(eye))
        return {"adjoint_closure": adj, "product_closure": prod, "unit": unit}


def algebra_from_span(ops: Sequence[np.ndarray], unit: Projector | None = None) -> MatrixAlgebra:
    """Wrap the span of compressed matrices ``ops`` as a :class:`MatrixAlgebra`."""
    ops = [np.asarray(o, dtype=np.complex128) for o in ops]
    r = ops[0].shape[0]
    unit = unit or Projector.identity(r)
    return MatrixAlgebra(unit.dim, unit, unit.isometry(), tuple(linalg.orthonormalize_hs(ops)))


def full_algebra(d: int) -> MatrixAlgebra:
    units = []
    for i in range(d * d):
        e = np.zeros(d * d, dtype=np.complex128)
        e[i] = 1.0
        units.append(e.reshape(d, d))
    p = Projector.identity(d)
    return MatrixAlgebra(d, p, np.eye(d, dtype=np.complex128), tuple(units))


def _gen_scale(gens: Sequence[np.ndarray]) -> float:
    # ||[X, G]||_F <= 2 ||G||_2 ||X||_F; floors rank decisions for near-scalar generators
    return 2.0 * max(float(np.linalg.norm(g, 2)) for g in gens)


def _commutator_stack(gens: Sequence[np.ndarray]):
    def apply(x):
        return np.stack([x @ g - g @ x for g in gens])

    return apply


def commutant_compressed(mats: Sequence[np.ndarray], r: int, rank_tol: float = RANK_TOL) -> list[np.ndarray]:
    """HS-orthonormal basis of ``{X in M_r : [X, A] = [X, A^H] = 0}``."""
    gens = []
    for a in mats:
        gens.append(a)
        gens.append(a.conj().T)
    if not gens:
        return list(full_algebra(r).basis)
    return linalg.kernel_of_linear_map(_commutator_stack(gens), r, rank_tol, scale=_gen_scale(gens))


def commutant(ops: Sequence[np.ndarray], unit: Projector | None = None, rank_tol: float = RANK_TOL) -> MatrixAlgebra:
    """Commutant inside ``B(PH)`` of the compressions ``P A P`` of ``ops`` and their adjoints.

    ``ops`` are ``d x d`` operators on the ambient space; ``unit`` defaults to
    the identity.
    """
    ops = [np.asarray(o, dtype=np.complex128) for o in ops]
    d = ops[0].shape[0]
    unit = unit if unit is not None else Projector.identity(d)
    v = unit.isometry()
    comp = [v.conj().T @ a @ v for a in ops]
    basis = commutant_compressed(comp, unit.rank, rank_tol)
    return MatrixAlgebra(d, unit, v, tuple(basis))


def relative_commutant(a: MatrixAlgebra, rank_tol: float = RANK_TOL) -> MatrixAlgebra:
    """Commutant of ``a`` inside ``B(PH)``, with the same unit."""
    # the basis is dagger-closed, so commuting with it suffices
    basis = linalg.kernel_of_linear_map(_commutator_stack(a.basis), a.rank, rank_tol, scale=_gen_scale(a.basis))
    return MatrixAlgebra(a.ambient_dim, a.unit, a.isometry, tuple(basis))


def center(a: MatrixAlgebra, comm: MatrixAlgebra | None = None, rank_tol: float = RANK_TOL) -> list[np.ndarray]:
    """HS-orthonormal basis of ``A`` intersected with its commutant."""
    comm = comm or relative_commutant(a, rank_tol)
    qa = np.stack([b.reshape(-1) for b in a.basis], axis=1)
    qc = np.stack([b.reshape(-1) for b in comm.basis], axis=1)
    ker = linalg.kernel_of_matrix(np.concatenate([qa, -qc], axis=1), rank_tol)
    elems = [(qa @ ker[: a.dim, i]).reshape(a.rank, a.rank) for i in range(ker.shape[1])]
    return linalg.orthonormalize_hs(elems, rank_tol)


@dataclass(frozen=True)
class StructureDecomposition:
    """Unitary ``U`` and blocks with ``U A U^H = sum_k 1_{m_k} (x) M_{n_k}``.

    ``compressed_isometries[k]`` maps ``C^m (x) C^n`` into the unit's range
    (column ``j * n + b``); ``block_isometries[k]`` is the same map composed
    with the unit's isometry, landing in the ambient space.
    """

    unitary: np.ndarray
    blocks: tuple[tuple[int, int], ...]
    block_isometries: tuple[np.ndarray, ...]
    compressed_isometries: tuple[np.ndarray, ...]
    algebra_dim: int
    commutant_dim: int
    center_dim: int
    seed: int

    def offsets(self) -> list[int]:
        out, o = [], 0
        for m, n in self.blocks:
            out.append(o)
            o += m * n
        return out

    def bookkeeping(self) -> dict[str, float | bool]:
        r = self.unitary.shape[0]
        return {
            "sum_mn_equals_rank": sum(m * n for m, n in self.blocks) == r,
            "sum_n2_equals_dim": sum(n * n for _, n in self.blocks) == self.algebra_dim,
            "sum_m2_equals_commutant_dim": sum(m * m for m, _ in self.blocks) == self.commutant_dim,
            "blocks_equal_center_dim": len(self.blocks) == self.center_dim,
            "unitarity_residual": float(np.linalg.norm(self.unitary.conj().T @ self.unitary - np.eye(r))),
        }


def _sample_cluster_tol(w: np.ndarray) -> float:
    if len(w) == 0:
        return 0.0
    diameter = float(w[0] - w[-1])
    radius = float(np.max(np.abs(w)))
    return max(SAMPLE_CLUSTER_TOL * diameter, DEFAULT_TOL * radius, 1e-300)


def _random_hermitian_in(basis: Sequence[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    r = basis[0].shape[0]
    h = np.zeros((r, r), dtype=np.complex128)
    for b, (g1, g2) in zip(basis, rng.normal(size=(len(basis), 2))):
        h += g1 * 0.5 * (b + b.conj().T) + g2 * 0.5j * (b.conj().T - b)
    return 0.5 * (h + h.conj().T)


def _clustered_eig(h: np.ndarray) -> linalg.EigenSystem:
    es = linalg.hermitian_eig(h)
    tol = _sample_cluster_tol(es.eigenvalues)
    return linalg.EigenSystem(es.eigenvalues, es.eigenvectors, linalg.cluster_sorted(es.eigenvalues, tol), tol, es.sweeps)


def _intertwiner(a_first: list[np.ndarray], a_other: list[np.ndarray], n: int) -> np.ndarray:
    """Unitary ``Y`` with ``Y a_first = a_other Y`` for every pair, unique up to phase."""

    def apply(y):
        return np.stack([y @ x1 - xj @ y for x1, xj in zip(a_first, a_other)])

    ker = linalg.kernel_of_linear_map(apply, n, check_linearity=False, scale=_gen_scale(a_first))
    if len(ker) != 1:
        raise StructureInconsistent(f"intertwiner space has dimension {len(ker)}, expected 1")
    y = ker[0] * np.sqrt(n)
    res = float(np.linalg.norm(y.conj().T @ y - np.eye(n)))
    if res > DEFAULT_TOL:
        raise StructureInconsistent("intertwiner is not unitary", {"unitarity": res})
    return y


def _try_decompose(a, comm, zbasis, rng):
    r = a.rank
    es = _clustered_eig(_random_hermitian_in(zbasis, rng))
    if len(es.clusters) != len(zbasis):
        return None
    h_rel = _random_hermitian_in(comm.basis, rng)
    blocks = []
    for k in range(len(es.clusters)):
        f = es.cluster_basis(k)
        q = f.shape[1]
        rel = _clustered_eig(f.conj().T @ h_rel @ f)
        sizes = {len(c) for c in rel.clusters}
        if len(sizes) != 1:
            return None
        m = len(rel.clusters)
        n = q // m
        parts = [f @ rel.cluster_basis(j) for j in range(m)]
        first = [parts[0].conj().T @ b @ parts[0] for b in a.basis]
        cols = [parts[0]]
        for fj in parts[1:]:
            other = [fj.conj().T @ b @ fj for b in a.basis]
            cols.append(fj @ _intertwiner(first, other, n))
        w = np.concatenate(cols, axis=1)
        blocks.append((m, n, w))
    return blocks


def _block_key(m: int, n: int, w_amb: np.ndarray):
    weights = np.round(np.sum(np.abs(w_amb) ** 2, axis=1), 6)
    return (-n, -m, tuple(-weights))


def structure_decompose(
    a: MatrixAlgebra,
    seed: int = 0,
    max_retries: int = 8,
    rank_tol: float = RANK_TOL,
) -> StructureDecomposition:
    """Unitary ``U`` and blocks ``[(m_k, n_k)]`` for a unital dagger-algebra.

    Minimal central projections come from the spectrum of a random Hermitian
    central element; inside each block a random Hermitian element of the
    relative commutant splits the range into ``m_k`` eigenspaces of dimension
    ``n_k``, which are then aligned by intertwiners solved as linear systems.
    Attempt ``i`` draws from ``default_rng(seed + i)``.
    """
    comm = relative_commutant(a, rank_tol)
    zbasis = center(a, comm, rank_tol)
    if not zbasis:
        raise StructureInconsistent("algebra has a trivial center; is it unital?")
    for attempt in range(max_retries + 1):
        blocks = _try_decompose(a, comm, zbasis, np.random.default_rng(seed + attempt))
        if blocks is not None:
            break
    else:
        raise DegenerateSample(f"random samples failed to separate blocks after {max_retries + 1} attempts (seed {seed})")

    blocks.sort(key=lambda t: _block_key(t[0], t[1], a.isometry @ t[2]))
    wcat = np.concatenate([w for _, _, w in blocks], axis=1)
    dec = StructureDecomposition(
        unitary=wcat.conj().T,
        blocks=tuple((m, n) for m, n, _ in blocks),
        block_isometries=tuple(a.isometry @ w for _, _, w in blocks),
        compressed_isometries=tuple(w for _, _, w in blocks),
        algebra_dim=a.dim,
        commutant_dim=comm.dim,
        center_dim=len(zbasis),
        seed=seed,
    )
    book = dec.bookkeeping()
    failed = [k for k, v in book.items() if v is False]
    if failed or book["unitarity_residual"] > STRICT_TOL:
        raise StructureInconsistent(f"decomposition bookkeeping failed: {failed or 'unitarity'}", book)
    return dec


@dataclass(frozen=True)
class DecompositionReport:
    off_pattern_residual: float
    factor_residual: float
    unitarity_residual: float
    passed: bool
    threshold: float = PATTERN_TOL


def pattern_residuals(x: np.ndarray, blocks: Sequence[tuple[int, int]]) -> tuple[float, float]:
    """Largest entry off the ``sum_k 1_m (x) M_n`` pattern, and largest deviation between
    the ``m`` diagonal copies within a block."""
    r = x.shape[0]
    mask = np.zeros((r, r), dtype=bool)
    factor = 0.0
    o = 0
    for m, n in blocks:
        sl = slice(o, o + m * n)
        t = x[sl, sl].reshape(m, n, m, n)
        for j in range(m):
            mask[o + j * n : o + (j + 1) * n, o + j * n : o + (j + 1) * n] = True
        copies = np.stack([t[j, :, j, :] for j in range(m)])
        factor = max(factor, float(np.max(np.abs(copies - copies.mean(axis=0)))))
        o += m * n
    off = float(np.max(np.abs(x[~mask]), initial=0.0))
    return off, factor


def verify_decomposition(a: MatrixAlgebra, s: StructureDecomposition, threshold: float = PATTERN_TOL) -> DecompositionReport:
    """Conjugate every basis element by ``U`` and measure how far it is from the block pattern."""
    u = s.unitary
    r = a.rank
    if u.shape != (r, r) or sum(m * n for m, n in s.blocks) != r:
        return DecompositionReport(np.inf, np.inf, np.inf, False, threshold)
    off = factor = 0.0
    for b in a.basis:
        o, f = pattern_residuals(u @ b @ u.conj().T, s.blocks)
        off = max(off, o)
        factor = max(factor, f)
    unit = float(np.linalg.norm(u.conj().T @ u - np.eye(r)))
    return DecompositionReport(off, factor, unit, off < threshold and factor < threshold and unit < threshold, threshold)


__all__ = [
    "DecompositionReport",
    "MatrixAlgebra",
    "StructureDecomposition",
    "algebra_from_span",
    "center",
    "commutant",
    "commutant_compressed",
    "full_algebra",
    "pattern_residuals",
    "relative_commutant",
    "structure_decompose",
    "verify_decomposition",
]
