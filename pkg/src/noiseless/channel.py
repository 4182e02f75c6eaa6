"""Quantum channels in Kraus form, projectors, and compression to invariant subspaces."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (
    InvalidProjector,
    NotCompletelyPositive,
    NotInvariant,
    NotTracePreserving,
    ParseError,
    ShapeMismatch,
    ValidationError,
)
from .linalg import DEFAULT_TOL, STRICT_TOL


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Channel:
    """A validated CPTP map ``X -> sum_a E_a X E_a^H``.

    Build instances with :func:`validate_channel`; the residual fields are
    filled in there.
    """

    dim: int
    kraus: tuple[np.ndarray, ...]
    label: str | None = None
    tp_residual: float = 0.0
    unital: bool = False
    unitality_residual: float = 0.0
    choi_min_eigenvalue: float = 0.0

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return apply_channel(self, x)

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        return apply_adjoint(self, x)

    def conjugated(self, u: np.ndarray, label: str | None = None) -> "Channel":
        """The channel with Kraus operators ``U E_a U^H``."""
        u = np.asarray(u, dtype=np.complex128)
        return validate_channel([u @ k @ u.conj().T for k in self.kraus], label=label or self.label)


class UnitalityCheck(NamedTuple):
    unital: bool
    residual: float


def _kraus_stack(kraus: Sequence[np.ndarray]) -> np.ndarray:
    if len(kraus) == 0:
        raise ShapeMismatch("need at least one Kraus operator")
    mats = [np.asarray(k, dtype=np.complex128) for k in kraus]
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ShapeMismatch(f"Kraus operators must be square, got {shape}")
    if any(m.shape != shape for m in mats):
        raise ShapeMismatch("Kraus operators must share one shape")
    stack = np.stack(mats)
    if not np.all(np.isfinite(stack)):
        raise ShapeMismatch("Kraus operators contain non-finite entries")
    return stack


def choi_matrix(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_ij |i><j| (x) E(|i><j|)`` as a ``d^2 x d^2`` matrix."""
    k = _kraus_stack(kraus)
    d = k.shape[1]
    # C[(i,r),(j,s)] = sum_a E_a[r,i] conj(E_a[s,j])
    c = np.einsum("ari,asj->irjs", k, k.conj())
    return c.reshape(d * d, d * d)


def superoperator(channel: Channel) -> np.ndarray:
    """Row-major matrix ``S`` with ``vec(E(X)) = S vec(X)``."""
    return sum(np.kron(k, k.conj()) for k in channel.kraus)


def validate_channel(kraus: Sequence[np.ndarray], tol: float = DEFAULT_TOL, label: str | None = None) -> Channel:
    """Check trace preservation and complete positivity, return a :class:`Channel`."""
    stack = _kraus_stack(kraus)
    d = stack.shape[1]
    eye = np.eye(d)
    tp = float(np.linalg.norm(np.einsum("aji,ajk->ik", stack.conj(), stack) - eye))
    if tp > tol:
        raise NotTracePreserving(tp)
    choi_min = float(linalg.eigvalsh(choi_matrix(stack))[-1])
    if choi_min < -tol:
        raise NotCompletelyPositive(choi_min)
    e1 = np.einsum("aij,akj->ik", stack, stack.conj())
    unit_res = float(np.linalg.norm(e1 - eye))
    return Channel(
        dim=d,
        kraus=tuple(_readonly(k) for k in stack),
        label=label,
        tp_residual=tp,
        unital=unit_res <= tol,
        unitality_residual=unit_res,
        choi_min_eigenvalue=choi_min,
    )


def _check_operand(channel: Channel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (channel.dim, channel.dim):
        raise ShapeMismatch(f"expected a {channel.dim}x{channel.dim} operand, got {x.shape}")
    return x


def apply_channel(channel: Channel, x) -> np.ndarray:
    x = _check_operand(channel, x)
    out = np.zeros_like(x)
    for k in channel.kraus:
        out += k @ x @ k.conj().T
    return out


def apply_adjoint(channel: Channel, x) -> np.ndarray:
    """Heisenberg-picture map ``X -> sum_a E_a^H X E_a``."""
    x = _check_operand(channel, x)
    out = np.zeros_like(x)
    for k in channel.kraus:
        out += k.conj().T @ x @ k
    return out


def is_unital(channel: Channel, tol: float = DEFAULT_TOL) -> UnitalityCheck:
    res = float(np.linalg.norm(apply_channel(channel, np.eye(channel.dim)) - np.eye(channel.dim)))
    return UnitalityCheck(res <= tol, res)


@dataclass(frozen=True)
class Projector:
    """Orthogonal projection onto a subspace of ``C^dim``."""

    dim: int
    matrix: np.ndarray
    rank: int

    @classmethod
    def from_matrix(cls, p) -> "Projector":
        p = np.asarray(p, dtype=np.complex128)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InvalidProjector(f"projector must be square, got {p.shape}")
        herm = float(np.linalg.norm(p - p.conj().T))
        idem = float(np.linalg.norm(p @ p - p))
        if herm > STRICT_TOL or idem > STRICT_TOL:
            raise InvalidProjector(f"not an orthogonal projector (hermiticity {herm:.2e}, idempotence {idem:.2e})")
        tr = float(np.trace(p).real)
        rank = int(round(tr))
        if abs(tr - rank) >= DEFAULT_TOL:
            raise InvalidProjector(f"trace {tr} is not an integer")
        return cls(p.shape[0], _readonly(0.5 * (p + p.conj().T)), rank)

    @classmethod
    def from_vectors(cls, vectors, rank_tol: float = linalg.RANK_TOL) -> "Projector":
        """Projector onto the column span of ``vectors``."""
        q = linalg.orth_columns(vectors, rank_tol)
        return cls(q.shape[0], _readonly(q @ q.conj().T), q.shape[1])

    @classmethod
    def identity(cls, d: int) -> "Projector":
        return cls(d, _readonly(np.eye(d)), d)

    @property
    def is_identity(self) -> bool:
        return self.rank == self.dim

    def complement(self) -> "Projector":
        return Projector(self.dim, _readonly(np.eye(self.dim) - self.matrix), self.dim - self.rank)

    def isometry(self) -> np.ndarray:
        """Isometry ``V`` with ``V V^H = P``, from pivoted QR of ``P``.

        Pivoting and the column order it returns are deterministic, so the
        basis of the range is reproducible across runs.
        """
        if self.rank == 0:
            return np.zeros((self.dim, 0), dtype=np.complex128)
        q, _, _ = scipy.linalg.qr(np.asarray(self.matrix), pivoting=True)
        v = q[:, : self.rank]
        # refine against rounding in the projector itself
        v, _ = np.linalg.qr(self.matrix @ v)
        return v

    def distance(self, other: "Projector") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix))


def invariance_residual(channel: Channel, p: Projector) -> float:
    """``||E(P) - P E(P) P||_F``."""
    ep = apply_channel(channel, p.matrix)
    return float(np.linalg.norm(ep - p.matrix @ ep @ p.matrix))


def leakage_residual(channel: Channel, p: Projector) -> float:
    """``max_a ||P^perp E_a P||_F``."""
    perp = np.eye(channel.dim) - p.matrix
    return max(float(np.linalg.norm(perp @ k @ p.matrix)) for k in channel.kraus)


def compress_kraus(channel: Channel, p: Projector, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """``{V^H E_a V}`` for the isometry ``V`` onto the range of an invariant ``P``."""
    res = invariance_residual(channel, p)
    if res > tol:
        raise NotInvariant(res)
    v = p.isometry()
    return [v.conj().T @ k @ v for k in channel.kraus]


# -- JSON -------------------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ParseError(f"matrix must be rows of [re, im] pairs, got array of shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_json(channel: Channel) -> dict:
    out = {"dim": channel.dim, "kraus": [matrix_to_json(k) for k in channel.kraus]}
    if channel.label is not None:
        out["label"] = channel.label
    return out


def channel_from_json(data, tol: float = DEFAULT_TOL) -> Channel:
    if not isinstance(data, dict) or "dim" not in data or "kraus" not in data:
        raise ParseError("channel JSON must be an object with 'dim' and 'kraus'")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"'dim' must be a positive integer, got {dim!r}")
    if not isinstance(data["kraus"], list) or not data["kraus"]:
        raise ParseError("'kraus' must be a nonempty list")
    mats = []
    for i, rows in enumerate(data["kraus"]):
        try:
            m = matrix_from_json(rows)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"kraus[{i}] is malformed: {exc}") from None
        if m.shape != (dim, dim):
            raise ParseError(f"kraus[{i}] has shape {m.shape}, expected ({dim}, {dim})")
        mats.append(m)
    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("'label' must be a string")
    try:
        return validate_channel(mats, tol=tol, label=label)
    except (NotTracePreserving, NotCompletelyPositive) as exc:
        raise ValidationError(exc) from exc


def load_channel(path: str | Path, tol: float = DEFAULT_TOL) -> Channel:
    """Read and validate a channel JSON file."""
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        # exc.pos counts characters; convert to bytes
        offset = len(raw.decode("utf-8", errors="replace")[: exc.pos].encode("utf-8"))
        raise ParseError(f"invalid JSON: {exc.msg}", offset) from None
    except UnicodeDecodeError as exc:
        raise ParseError("file is not UTF-8", exc.start) from None
    return channel_from_json(data, tol)


def save_channel(channel: Channel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(channel_to_json(channel), indent=1) + "\n")


def random_kraus_isometry(num_kraus: int, d: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random Kraus operators from a Haar-ish isometry ``C^d -> C^(K d)``."""
    z = rng.normal(size=(num_kraus * d, d)) + 1j * rng.normal(size=(num_kraus * d, d))
    q, _ = np.linalg.qr(z)
    return [q[a * d : (a + 1) * d] for a in range(num_kraus)]


__all__ = [
    "Channel",
    "Projector",
    "UnitalityCheck",
    "apply_adjoint",
    "apply_channel",
    "channel_from_json",
    "channel_to_json",
    "choi_matrix",
    "compress_kraus",
    "invariance_residual",
    "is_unital",
    "leakage_residual",
    "load_channel",
    "matrix_from_json",
    "matrix_to_json",
    "random_kraus_isometry",
    "save_channel",
    "superoperator",
    "validate_channel",
]
