"""Builtin example channels and synthetic channels with planted structure."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable

import numpy as np

from .channel import Channel, Projector, random_kraus_isometry, validate_channel
from .errors import BadParameter, UnknownExample
from .linalg import random_unitary

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.diag([1.0, -1.0]).astype(np.complex128)


def ket(bits: str) -> np.ndarray:
    """Computational basis vector, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def outer(a: str, b: str) -> np.ndarray:
    return np.outer(ket(a), ket(b).conj())


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def z_dephasing() -> Channel:
    """``E(rho) = (Z1 rho Z1 + Z2 rho Z2) / 2`` on two qubits."""
    z1 = kron(Z, I2)
    z2 = kron(I2, Z)
    return validate_channel([z1 / np.sqrt(2), z2 / np.sqrt(2)], label="z-dephasing")


def u_dfs() -> Channel:
    """``{U Z1, U Z2} / sqrt(2)`` with ``U = 1 - 2|11><11|``."""
    u = np.eye(4) - 2 * outer("11", "11")
    z1 = kron(Z, I2)
    z2 = kron(I2, Z)
    return validate_channel([u @ z1 / np.sqrt(2), u @ z2 / np.sqrt(2)], label="u-dfs")


def kl97(q: float = 0.3) -> Channel:
    """Three-Kraus non-unital two-qubit channel; ``q`` must lie in (0, 1/2]."""
    q = float(q)
    if not 0.0 < q <= 0.5:
        raise BadParameter(
            f"kl97 needs 0 < q <= 1/2 so that alpha = sqrt(1 - 2q) is real, got q = {q}"
        )
    alpha = np.sqrt(1 - 2 * q)
    beta = np.sqrt(q / 2)
    e0 = alpha * (outer("00", "00") + outer("11", "11")) + outer("01", "01") + outer("10", "10")
    e1 = beta * (outer("00", "00") + outer("10", "00") + outer("01", "11") + outer("11", "11"))
    e2 = beta * (outer("00", "00") - outer("10", "00") - outer("01", "11") + outer("11", "11"))
    return validate_channel([e0, e1, e2], label=f"kl97(q={q})")


def identity(dim: int = 2) -> Channel:
    return validate_channel([np.eye(int(dim))], label=f"identity(d={int(dim)})")


def depolarizing(dim: int = 2, p: float = 0.5) -> Channel:
    """``(1 - p) rho + p 1/d`` written with the d^2 Weyl operators."""
    d = int(dim)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise BadParameter(f"depolarizing needs 0 <= p <= 1, got {p}")
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    kraus = []
    for a in range(d):
        for b in range(d):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            weight = 1 - p + p / d**2 if (a, b) == (0, 0) else p / d**2
            if weight > 0:
                kraus.append(np.sqrt(weight) * w)
    return validate_channel(kraus, label=f"depolarizing(d={d}, p={p})")


def parse_blocks(spec: str | None) -> list[tuple[int, int]] | None:
    """Parse ``"2x2,1x3"`` into ``[(2, 2), (1, 3)]``."""
    if spec is None or spec == "":
        return None
    out = []
    for part in str(spec).split(","):
        try:
            m, n = part.lower().split("x")
            out.append((int(m), int(n)))
        except ValueError:
            raise BadParameter(f"cannot parse block {part!r}; expected MxN") from None
    return out


def random_unitary_mix(
    dim: int = 4,
    count: int = 5,
    seed: int = 0,
    blocks: str | list[tuple[int, int]] | None = None,
) -> Channel:
    """Mix of ``count`` random unitaries with random weights.

    With ``blocks`` (for example ``[(2, 2), (1, 1)]`` summing to ``dim``) each
    unitary has the form ``G (sum_k u_k (x) 1_{n_k}) G^H`` for one common
    random ``G``, which plants a noiseless factor of size ``n_k`` per block.
    """
    d = int(dim)
    rng = np.random.default_rng(int(seed))
    if isinstance(blocks, str):
        blocks = parse_blocks(blocks)
    if blocks is not None and sum(m * n for m, n in blocks) != d:
        raise BadParameter(f"blocks {blocks} do not fill dimension {d}")
    weights = rng.dirichlet(np.ones(int(count)))
    gauge = random_unitary(d, rng) if blocks is not None else None
    kraus = []
    for w in weights:
        if blocks is None:
            u = random_unitary(d, rng)
        else:
            parts = [np.kron(random_unitary(m, rng), np.eye(n)) for m, n in blocks]
            u = gauge @ _block_diag(parts) @ gauge.conj().T
        kraus.append(np.sqrt(w) * u)
    label = f"random-unitary-mix(d={d}, count={count}, seed={seed}"
    label += f", blocks={_blocks_str(blocks)})" if blocks else ")"
    return validate_channel(kraus, label=label)


def collective_dephasing(n: int = 3, phi: float = 0.7) -> Channel:
    """``rho -> (rho + V rho V^H) / 2`` with ``V = exp(i phi sum_j Z_j)`` on n qubits."""
    n = int(n)
    total_z = sum(kron(*[Z if j == i else I2 for j in range(n)]) for i in range(n))
    v = np.diag(np.exp(1j * float(phi) * np.diag(total_z)))
    d = 2**n
    return validate_channel([np.eye(d) / np.sqrt(2), v / np.sqrt(2)], label=f"collective-dephasing(n={n}, phi={phi})")


def _block_diag(parts: list[np.ndarray]) -> np.ndarray:
    d = sum(p.shape[0] for p in parts)
    out = np.zeros((d, d), dtype=np.complex128)
    i = 0
    for p in parts:
        k = p.shape[0]
        out[i : i + k, i : i + k] = p
        i += k
    return out


def _blocks_str(blocks) -> str:
    return ",".join(f"{m}x{n}" for m, n in blocks) if blocks else ""


EXAMPLES: dict[str, Callable[..., Channel]] = {
    "z-dephasing": z_dephasing,
    "u-dfs": u_dfs,
    "kl97": kl97,
    "identity": identity,
    "depolarizing": depolarizing,
    "random-unitary-mix": random_unitary_mix,
    "collective-dephasing": collective_dephasing,
}

_PARAM_ALIASES = {"d": "dim"}


def builtin_example(name: str, **params) -> Channel:
    """Construct a named example channel.

    Unknown parameters raise :class:`BadParameter`; ``None`` values are dropped
    so CLI defaults pass straight through.
    """
    try:
        factory = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
    params = {_PARAM_ALIASES.get(k, k): v for k, v in params.items() if v is not None}
    try:
        return factory(**params)
    except TypeError as exc:
        raise BadParameter(f"bad parameters for {name}: {exc}") from None


# -- planted structure --------------------------------------------------------

@dataclass(frozen=True)
class PlantedChannel:
    channel: Channel
    projector: Projector
    isometry: np.ndarray
    m: int
    n: int
    cofactor_kraus: tuple[np.ndarray, ...]


def planted_ns_channel(
    m: int,
    n: int,
    extra: int,
    num_kraus: int = 3,
    seed: int = 0,
    gauge: bool = True,
) -> PlantedChannel:
    """Channel on ``(C^m (x) C^n) (+) C^extra`` with a noiseless ``C^n`` factor.

    Kraus operators are ``E_a = [[L_a (x) 1_n, B_a], [0, K_a]]`` in block form,
    where ``{L_a}`` is a random channel on ``C^m`` and the columns acting on the
    complement are random, constrained only by trace preservation. The
    planted subspace is therefore invariant while its complement leaks into
    it. With ``gauge`` the whole picture is rotated by a random unitary.
    """
    rng = np.random.default_rng(seed)
    dp = m * n
    d = dp + extra
    lam = random_kraus_isometry(num_kraus, m, rng)
    stacked = np.zeros((num_kraus * d, d), dtype=np.complex128)
    for a, la in enumerate(lam):
        stacked[a * d : a * d + dp, :dp] = np.kron(la, np.eye(n))
    if extra:
        first = stacked[:, :dp]
        z = rng.normal(size=(num_kraus * d, extra)) + 1j * rng.normal(size=(num_kraus * d, extra))
        for _ in range(2):
            z = z - first @ (first.conj().T @ z)
        q, _ = np.linalg.qr(z)
        stacked[:, dp:] = q
    kraus = [stacked[a * d : (a + 1) * d] for a in range(num_kraus)]
    g = random_unitary(d, rng) if gauge else np.eye(d, dtype=np.complex128)
    kraus = [g @ k @ g.conj().T for k in kraus]
    w = g[:, :dp]
    channel = validate_channel(kraus, label=f"planted-ns(m={m}, n={n}, extra={extra}, seed={seed})")
    return PlantedChannel(channel, Projector.from_vectors(w), w, m, n, tuple(lam))


__all__ = [
    "EXAMPLES",
    "PlantedChannel",
    "builtin_example",
    "collective_dephasing",
    "depolarizing",
    "identity",
    "ket",
    "kl97",
    "kron",
    "outer",
    "parse_blocks",
    "planted_ns_channel",
    "random_unitary_mix",
    "u_dfs",
    "z_dephasing",
]
