"""Dense complex linear algebra used by every downstream module.

Three primitives: :func:`hermitian_eig` (cyclic Jacobi), :func:`kernel_of_linear_map`
(null spaces of linear maps on matrix space) and :func:`orthonormalize_hs`
(Hilbert-Schmidt orthonormal bases). The Jacobi sweeps run in a compiled
Cython kernel when one was built; set ``NOISELESS_PURE_PYTHON=1`` to force the
vectorized pure-Python path.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from ..errors import NonHermitian, NonlinearMap, ShapeMismatch
from . import _jacobi

DEFAULT_TOL = 1e-8
STRICT_TOL = 1e-10
RANK_TOL = 1e-8

if os.environ.get("NOISELESS_PURE_PYTHON") == "1":
    _jacobi_eigh = _jacobi.jacobi_eigh
    BACKEND = "python"
else:
    try:
        from ._jacobi_ext import jacobi_eigh as _jacobi_eigh

        BACKEND = "cython"
    except ImportError:  # extension not built
        _jacobi_eigh = _jacobi.jacobi_eigh
        BACKEND = "python"


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending, unitary eigenvector columns, eigenvalue clusters."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    cluster_tol: float
    sweeps: int = 0

    def cluster_values(self) -> list[float]:
        return [float(np.mean(self.eigenvalues[list(c)])) for c in self.clusters]

    def cluster_basis(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, list(self.clusters[k])]

    def spectral_projections(self) -> list[np.ndarray]:
        out = []
        for k in range(len(self.clusters)):
            vk = self.cluster_basis(k)
            out.append(vk @ vk.conj().T)
        return out

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def cluster_sorted(values: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    """Group indices of descending ``values`` wherever consecutive gaps are <= tol."""
    if len(values) == 0:
        return ()
    clusters = [[0]]
    for i in range(1, len(values)):
        if values[i - 1] - values[i] > tol:
            clusters.append([i])
        else:
            clusters[-1].append(i)
    return tuple(tuple(c) for c in clusters)


def hermitian_eig(a, cluster_tol: float = DEFAULT_TOL, max_sweeps: int = 64) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix with eigenvalue clustering.

    Parameters
    ----------
    a : array_like
        Square complex matrix with ``||A - A^H||_F <= 1e-8 max(1, ||A||_F)``.
    cluster_tol : float
        Absolute gap; consecutive sorted eigenvalues closer than this share a cluster.
    max_sweeps : int
        Jacobi sweep cap; :class:`~noiseless.errors.NoConvergence` past it.
    """
    a = _as_square(a)
    asym = float(np.linalg.norm(a - a.conj().T))
    if asym > 1e-8 * max(1.0, float(np.linalg.norm(a))):
        raise NonHermitian(asym)
    a = 0.5 * (a + a.conj().T)
    w, v, sweeps = _jacobi_eigh(a, max_sweeps)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    return EigenSystem(w, v, cluster_sorted(w, cluster_tol), cluster_tol, sweeps)


def eigvalsh(a) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix."""
    return hermitian_eig(a).eigenvalues


def numerical_rank(s: np.ndarray, rank_tol: float = RANK_TOL, scale: float = 0.0) -> int:
    """Count singular values above ``rank_tol * max(max(s), scale)``.

    ``scale`` is an optional floor for maps whose entries may all be rounding
    noise, e.g. commutators of nearly equal matrices.
    """
    if len(s) == 0:
        return 0
    ref = max(float(s[0]), scale)
    if ref == 0.0:
        return 0
    return int(np.sum(s > rank_tol * ref))


def vec(x: np.ndarray) -> np.ndarray:
    """Row-major vectorization."""
    return np.asarray(x).reshape(-1)


def map_matrix(apply: Callable[[np.ndarray], np.ndarray], d: int) -> np.ndarray:
    """Matrix of a linear map on d x d matrices, columns indexed row-major by E_ij."""
    cols = []
    for idx in range(d * d):
        e = np.zeros(d * d, dtype=np.complex128)
        e[idx] = 1.0
        cols.append(np.asarray(apply(e.reshape(d, d)), dtype=np.complex128).reshape(-1))
    return np.stack(cols, axis=1)


def _check_linear(apply, mat: np.ndarray, d: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.linalg.norm(mat)))
    worst = 0.0
    for _ in range(2):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        lhs = np.asarray(apply(a * x + b * y), dtype=np.complex128).reshape(-1)
        rhs = a * (mat @ vec(x)) + b * (mat @ vec(y))
        norm_in = abs(a) * np.linalg.norm(x) + abs(b) * np.linalg.norm(y)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / (scale * norm_in))
    if worst > 1e-10:
        raise NonlinearMap(worst)


def kernel_of_matrix(mat: np.ndarray, rank_tol: float = RANK_TOL, scale: float = 0.0) -> np.ndarray:
    """Orthonormal columns spanning the null space of ``mat`` (relative SV threshold)."""
    rows, n = mat.shape
    if mat.size == 0:
        return np.eye(n, dtype=np.complex128)
    if rows > n:
        # R has the singular values and right singular vectors of mat
        mat = np.linalg.qr(mat, mode="r")
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    r = numerical_rank(s, rank_tol, scale)
    return vh[r:].conj().T


def kernel_of_linear_map(
    apply: Callable[[np.ndarray], np.ndarray],
    d: int,
    rank_tol: float = RANK_TOL,
    check_linearity: bool = True,
    seed: int = 0,
    scale: float = 0.0,
) -> list[np.ndarray]:
    """HS-orthonormal basis of ``{X in M_d : apply(X) = 0}``.

    ``apply`` may return any array shape; it is flattened. The map is
    tabulated on the matrix units, so the kernel dimension is ``d**2`` minus
    the numerical rank of that ``(*, d**2)`` matrix; ``scale`` floors the
    rank threshold (see :func:`numerical_rank`).
    """
    mat = map_matrix(apply, d)
    if check_linearity:
        _check_linear(apply, mat, d, seed)
    ker = kernel_of_matrix(mat, rank_tol, scale)
    return [ker[:, i].reshape(d, d) for i in range(ker.shape[1])]


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def orthonormalize_hs(ops: Sequence[np.ndarray], rank_tol: float = RANK_TOL) -> list[np.ndarray]:
    """HS-orthonormal basis for ``span(ops)``; length equals the numerical rank."""
    ops = [np.asarray(o, dtype=np.complex128) for o in ops]
    if not ops:
        return []
    shape = ops[0].shape
    if any(o.shape != shape for o in ops):
        raise ShapeMismatch("all operators must share one shape")
    stack = np.stack([o.reshape(-1) for o in ops], axis=1)
    u, s, _ = np.linalg.svd(stack, full_matrices=False)
    r = numerical_rank(s, rank_tol)
    return [u[:, i].reshape(shape) for i in range(r)]


def hs_gram(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Gram matrix ``G_ij = Tr(A_i^H A_j)``."""
    if not ops:
        return np.zeros((0, 0), dtype=np.complex128)
    stack = np.stack([np.asarray(o).reshape(-1) for o in ops], axis=1)
    return stack.conj().T @ stack


def span_residual(x: np.ndarray, basis: Sequence[np.ndarray]) -> float:
    """Frobenius distance from ``x`` to ``span(basis)``; basis must be HS-orthonormal."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if not basis:
        return float(np.linalg.norm(x))
    stack = np.stack([np.asarray(b).reshape(-1) for b in basis], axis=1)
    return float(np.linalg.norm(x - stack @ (stack.conj().T @ x)))


def containment_residual(sub: Sequence[np.ndarray], basis: Sequence[np.ndarray]) -> float:
    """Largest span residual of the elements of ``sub`` against ``span(basis)``."""
    return max((span_residual(x, basis) for x in sub), default=0.0)


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of ``a`` and ``b``."""
    return scipy.linalg.subspace_angles(np.asarray(a), np.asarray(b))


def orth_columns(vectors: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) for the column span of ``vectors``."""
    vectors = np.asarray(vectors, dtype=np.complex128)
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, : numerical_rank(s, rank_tol)]


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded random density matrix ``G G^H / Tr(G G^H)`` with complex Gaussian G."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_densities(count: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` seeded random density matrices stacked as ``(count, d, d)``."""
    g = rng.normal(size=(count, d, d)) + 1j * rng.normal(size=(count, d, d))
    rho = g @ np.conj(np.swapaxes(g, 1, 2))
    return rho / np.einsum("tii->t", rho).real[:, None, None]


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + g.conj().T)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


__all__ = [
    "BACKEND",
    "DEFAULT_TOL",
    "EigenSystem",
    "RANK_TOL",
    "STRICT_TOL",
    "cluster_sorted",
    "commutator",
    "containment_residual",
    "eigvalsh",
    "hermitian_eig",
    "hs_gram",
    "kernel_of_linear_map",
    "kernel_of_matrix",
    "map_matrix",
    "numerical_rank",
    "orth_columns",
    "orthonormalize_hs",
    "principal_angles",
    "random_densities",
    "random_density",
    "random_hermitian",
    "random_unitary",
    "span_residual",
    "vec",
]
