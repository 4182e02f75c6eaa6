"""Pure-Python cyclic Jacobi eigensolver for dense complex Hermitian matrices.

Rotations follow a round-robin (tournament) ordering, so every round is a
set of disjoint index pairs and is applied as one vectorized numpy update.
The compiled kernel in ``_jacobi_ext`` visits the same pairs in the same
order, one rotation at a time.
"""
from __future__ import annotations

import numpy as np

from ..errors import NoConvergence

_TINY = 1e-300
_STALL = 1e-12


def round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Return ``n - 1`` (or ``n``) rounds of disjoint pairs with ``p < q``."""
    m = n if n % 2 == 0 else n + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p >= n or q >= n:
                continue
            if p > q:
                p, q = q, p
            ps.append(p)
            qs.append(q)
        if ps:
            rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(a: np.ndarray, max_sweeps: int = 64, tol: float = 1e-14):
    """Diagonalize Hermitian ``a``; return ``(eigenvalues, eigenvectors, sweeps)``.

    Eigenvalues are unsorted. ``a`` is not modified.
    """
    a = np.array(a, dtype=np.complex128, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n < 2:
        return a.diagonal().real.copy(), v, 0
    fro = float(np.linalg.norm(a))
    rounds = round_robin(n)
    prev = np.inf
    for sweep in range(max_sweeps + 1):
        off = _off_norm(a)
        # rounding floor: accept once a sweep stops making progress near eps
        if off <= tol * fro or (off <= _STALL * fro and off > 0.5 * prev):
            return a.diagonal().real.copy(), v, sweep
        prev = off
        if sweep == max_sweeps:
            break
        for p, q in rounds:
            b = a[p, q]
            mag = np.abs(b)
            keep = mag > _TINY
            if not keep.any():
                continue
            p, q, b, mag = p[keep], q[keep], b[keep], mag[keep]
            phase = b / mag
            theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            sgn = np.where(theta >= 0.0, 1.0, -1.0)
            t = sgn / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            g_pq = s * phase
            g_qp = -s * phase.conj()

            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c + cq * g_qp
            a[:, q] = cp * g_pq + cq * c
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c + vq * g_qp
            v[:, q] = vp * g_pq + vq * c

            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - g_pq[:, None] * rq
            a[q, :] = -g_qp[:, None] * rp + c[:, None] * rq

            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real
    raise NoConvergence(max_sweeps, _off_norm(a))
