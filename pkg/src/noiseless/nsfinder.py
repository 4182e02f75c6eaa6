"""Find and certify noiseless subsystems of a channel.

The procedure has two stages. First collect projectors ``P`` with
``E(P) = P E(P) P``. Then, for each one, decompose the commutant ``A'_P`` of
the compressed Kraus operators; every block ``1_m (x) M_n`` with ``n > 1``
is a noiseless subsystem. All emitted subsystems are re-verified before
they are returned.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .algebra import MatrixAlgebra, StructureDecomposition, commutant, structure_decompose
from .channel import (
    Channel,
    Projector,
    apply_channel,
    invariance_residual,
    leakage_residual,
)
from .errors import (
    CandidateBudgetExceeded,
    NotFactorizable,
    NotUnital,
    ReconstructionFailed,
    SoundnessError,
)
from .linalg import DEFAULT_TOL, STRICT_TOL

STRATEGIES = ("trivial", "fixed_support", "krylov_seed")
DEDUPE_TOL = 1e-6
SOUNDNESS_TOL = 1e-8
CONVERSE_TOL = 1e-7


# -- step (i): invariant projectors ------------------------------------------

@dataclass(frozen=True)
class CandidateProjector:
    projector: Projector
    source: str
    condition_residual: float
    leakage_residual: float
    accepted: bool
    residuals_agree: bool
    sources: tuple[str, ...] = ()

    @property
    def rank(self) -> int:
        return self.projector.rank


def check_projector_condition(
    channel: Channel, p: Projector, tol: float = DEFAULT_TOL, source: str = "user"
) -> CandidateProjector:
    """Evaluate ``||E(P) - P E(P) P||_F`` and ``max_a ||P^perp E_a P||_F``."""
    cond = invariance_residual(channel, p)
    leak = leakage_residual(channel, p)
    return CandidateProjector(p, source, cond, leak, cond <= tol, (cond <= tol) == (leak <= tol), (source,))


def _canonical_key(c: CandidateProjector):
    diag = np.round(np.real(np.diagonal(c.projector.matrix)), 6)
    return (-c.rank, tuple(-diag))


def krylov_closure(channel: Channel, v: np.ndarray, rank_tol: float = linalg.RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the smallest subspace containing ``v`` and invariant under every ``E_a``."""
    k = linalg.orth_columns(np.asarray(v).reshape(channel.dim, -1), rank_tol)
    while 0 < k.shape[1] < channel.dim:
        grown = linalg.orth_columns(np.concatenate([k] + [e @ k for e in channel.kraus], axis=1), rank_tol)
        if grown.shape[1] == k.shape[1]:
            break
        k = grown
    return k


def fixed_points(channel: Channel) -> list[np.ndarray]:
    """HS-orthonormal basis of ``{X : E(X) = X}``."""
    d = channel.dim
    return linalg.kernel_of_linear_map(lambda x: apply_channel(channel, x) - x, d, scale=2.0)


def _supports(h: np.ndarray) -> list[np.ndarray]:
    """Ranges of the positive and negative parts of Hermitian ``h``."""
    es = linalg.hermitian_eig(0.5 * (h + h.conj().T))
    w = es.eigenvalues
    cut = DEFAULT_TOL * max(float(np.max(np.abs(w))), 1e-300)
    out = []
    for mask in (w > cut, w < -cut):
        if mask.any():
            out.append(es.eigenvectors[:, mask])
    return out


class _CandidatePool:
    def __init__(self, channel: Channel, tol: float, max_candidates: int):
        self.channel = channel
        self.tol = tol
        self.max_candidates = max_candidates
        self.accepted: list[CandidateProjector] = []
        self.rejected = 0
        self.truncated = False

    @property
    def full(self) -> bool:
        return len(self.accepted) >= self.max_candidates

    def offer(self, p: Projector, source: str) -> CandidateProjector | None:
        if p.rank == 0:
            return None
        for i, c in enumerate(self.accepted):
            if p.distance(c.projector) < DEDUPE_TOL:
                if source not in c.sources:
                    self.accepted[i] = replace(c, sources=c.sources + (source,))
                return None
        cand = check_projector_condition(self.channel, p, self.tol, source)
        if not cand.accepted:
            self.rejected += 1
            return None
        if self.full:
            self.truncated = True
            return None
        self.accepted.append(cand)
        return cand

    def offer_vectors(self, vectors: np.ndarray, source: str) -> CandidateProjector | None:
        if vectors.shape[1] == 0:
            return None
        return self.offer(Projector.from_vectors(vectors), source)


def _intersection(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ker = linalg.kernel_of_matrix(np.concatenate([a, -b], axis=1), scale=1.0)
    return linalg.orth_columns(a @ ker[: a.shape[1]])


def find_invariant_projectors(
    channel: Channel,
    strategies: Iterable[str] = STRATEGIES,
    seed: int = 0,
    max_candidates: int = 64,
    tol: float = DEFAULT_TOL,
    user_projectors: Sequence[Projector] = (),
) -> list[CandidateProjector]:
    """Generate candidate projectors and keep the ones satisfying ``E(P) = P E(P) P``.

    Strategies:

    ``trivial``
        ``P = 1`` (always included regardless of ``strategies``).
    ``fixed_support``
        supports of the positive and negative parts of Hermitian fixed points,
        and the joint support of the whole fixed-point space.
    ``krylov_seed``
        invariant closure of each standard basis vector and of each
        eigenvector of a random combination of the Kraus operators, followed
        by pairwise joins and intersections of accepted ranges.

    The search is not exhaustive. Emits :class:`CandidateBudgetExceeded` when
    ``max_candidates`` truncates it.
    """
    strategies = set(strategies)
    unknown = strategies - set(STRATEGIES)
    if unknown:
        raise ValueError(f"unknown strategies {sorted(unknown)}; choose from {STRATEGIES}")
    d = channel.dim
    rng = np.random.default_rng(seed)
    pool = _CandidatePool(channel, tol, max_candidates)
    pool.offer(Projector.identity(d), "trivial")
    for p in user_projectors:
        pool.offer(p, "user")

    if "fixed_support" in strategies:
        fixed = fixed_points(channel)
        herm = []
        for x in fixed:
            herm.append(0.5 * (x + x.conj().T))
            herm.append(0.5j * (x.conj().T - x))
        if herm:
            herm.append(sum(g * h for g, h in zip(rng.normal(size=len(herm)), herm)))
        for h in herm:
            if np.linalg.norm(h) > STRICT_TOL:
                for support in _supports(h):
                    pool.offer_vectors(support, "fixed_support")
        if fixed:
            joint = sum(x @ x.conj().T + x.conj().T @ x for x in fixed)
            for support in _supports(joint):
                pool.offer_vectors(support, "fixed_support")

    if "krylov_seed" in strategies:
        seeds = [np.eye(d)[:, i] for i in range(d)]
        coeffs = rng.normal(size=channel.num_kraus) + 1j * rng.normal(size=channel.num_kraus)
        mix = sum(c * e for c, e in zip(coeffs, channel.kraus))
        _, vecs = np.linalg.eig(mix)
        seeds.extend(vecs[:, i] for i in range(d))
        for v in seeds:
            pool.offer_vectors(krylov_closure(channel, v), "krylov_seed")
        _lattice_closure(pool)

    if pool.truncated:
        warnings.warn(
            f"candidate search stopped at max_candidates={max_candidates}",
            CandidateBudgetExceeded,
            stacklevel=2,
        )
    return sorted(pool.accepted, key=_canonical_key)


def _lattice_closure(pool: _CandidatePool) -> None:
    done = set()
    grew = True
    while grew and not pool.full:
        grew = False
        ranges = [c.projector.isometry() for c in pool.accepted]
        for i in range(len(ranges)):
            for j in range(i + 1, len(ranges)):
                if (i, j) in done:
                    continue
                done.add((i, j))
                a, b = ranges[i], ranges[j]
                for vecs in (np.concatenate([a, b], axis=1), _intersection(a, b)):
                    if pool.offer_vectors(linalg.orth_columns(vecs), "krylov_seed") is not None:
                        grew = True
                if pool.full:
                    pool.truncated = pool.truncated or (i, j) != (len(ranges) - 2, len(ranges) - 1)
                    return


# -- step (ii): subsystems ------------------------------------------------------

@dataclass(frozen=True)
class LambdaTensor:
    """Scalars with ``P_kk E_a P_ll = lambda[a, k, l] P_kl``; ``lambda[a]`` are the
    Kraus operators of the channel induced on the A factor."""

    entries: np.ndarray
    eq11_residual: float
    trace_preservation_residual: float

    @property
    def cofactor_kraus(self) -> list[np.ndarray]:
        return list(self.entries)


@dataclass(frozen=True)
class NSVerification:
    trials: int
    eq1_residual: float
    eq2_residual: float
    eq10_residual: float
    degenerate_trace: bool

    @property
    def max_residual(self) -> float:
        return max(self.eq1_residual, self.eq2_residual, self.eq10_residual)


@dataclass(frozen=True)
class NoiselessSubsystem:
    """One factor ``H^B`` of ``P H = sum_k H^{A_k} (x) H^{B_k}`` with ``dim H^B > 1``.

    ``isometry`` maps ``C^m (x) C^n`` (column ``j * n + b``) into the ambient space.
    """

    block_index: int
    m: int
    n: int
    isometry: np.ndarray
    cofactor: np.ndarray
    lam: LambdaTensor | None = None
    verification: NSVerification | None = None

    @property
    def is_dfs(self) -> bool:
        return self.m == 1

    @property
    def projector(self) -> np.ndarray:
        return self.isometry @ self.isometry.conj().T

    def algebra_basis(self) -> list[np.ndarray]:
        """Matrix units of ``1_m (x) B(C^n)`` embedded in ``B(H)`` (zero off the block)."""
        out = []
        for b in range(self.n):
            for c in range(self.n):
                e = np.zeros((self.n, self.n))
                e[b, c] = 1.0
                out.append(self.isometry @ np.kron(np.eye(self.m), e) @ self.isometry.conj().T)
        return out

    @classmethod
    def claimed(cls, channel: Channel, isometry: np.ndarray, m: int, n: int) -> "NoiselessSubsystem":
        """Wrap an arbitrary isometry as a claimed subsystem, e.g. for negative controls."""
        w = np.asarray(isometry, dtype=np.complex128)
        t = (w.conj().T @ apply_channel(channel, w @ w.conj().T) @ w).reshape(m, n, m, n)
        return cls(-1, m, n, w, np.einsum("ibjb->ij", t) / n)


def _block_tensor(w: np.ndarray, x: np.ndarray, m: int, n: int) -> np.ndarray:
    return (w.conj().T @ x @ w).reshape(m, n, m, n)


def cofactor_residuals(
    channel: Channel,
    p: Projector,
    s: StructureDecomposition,
    sigmas: Sequence[np.ndarray],
    algebra: MatrixAlgebra | None = None,
) -> dict[str, float]:
    ep = apply_channel(channel, p.matrix)
    rebuilt = np.zeros_like(ep)
    for (m, n), w, sig in zip(s.blocks, s.block_isometries, sigmas):
        rebuilt += w @ np.kron(sig, np.eye(n)) @ w.conj().T
    out = {"reconstruction": float(np.linalg.norm(ep - rebuilt))}
    if algebra is not None:
        out["commutation"] = max(
            (float(np.linalg.norm(linalg.commutator(ep, b))) for b in algebra.embedded_basis()), default=0.0
        )
    return out


def extract_cofactors(
    channel: Channel,
    p: Projector,
    s: StructureDecomposition,
    algebra: MatrixAlgebra | None = None,
    tol: float = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Operators ``sigma_k`` with ``E(P) = sum_k sigma_k (x) 1_{n_k}`` in the block basis.

    Raises :class:`ReconstructionFailed` when the reconstruction of ``E(P)``,
    or its commutation with ``algebra``, is off by more than ``tol``.
    """
    ep = apply_channel(channel, p.matrix)
    sigmas = []
    for (m, n), w in zip(s.blocks, s.block_isometries):
        t = _block_tensor(w, ep, m, n)
        sig = np.einsum("ibjb->ij", t) / n
        sigmas.append(0.5 * (sig + sig.conj().T))
    res = cofactor_residuals(channel, p, s, sigmas, algebra)
    worst = max(res.values())
    if worst > tol:
        raise ReconstructionFailed(worst)
    return sigmas


def extract_lambda(channel: Channel, ns: NoiselessSubsystem, tol: float = DEFAULT_TOL) -> LambdaTensor:
    """Least-squares ``lambda[a, k, l] = Tr(P_lk E_a) / n`` and its certificates."""
    m, n, w = ns.m, ns.n, ns.isometry
    lam = np.zeros((channel.num_kraus, m, m), dtype=np.complex128)
    eq11 = 0.0
    eye_n = np.eye(n)
    for a, e in enumerate(channel.kraus):
        t = _block_tensor(w, e, m, n)
        lam[a] = np.einsum("kblb->kl", t) / n
        for k in range(m):
            for l in range(m):
                eq11 = max(eq11, float(np.linalg.norm(t[k, :, l, :] - lam[a, k, l] * eye_n)))
    # P_kk E_a P_ll only sees the block; leakage out of it breaks the factorization too
    leak = max(float(np.linalg.norm(e @ w - w @ (w.conj().T @ e @ w))) for e in channel.kraus)
    eq11 = max(eq11, leak)
    tp = float(np.linalg.norm(np.einsum("akl,akj->lj", lam.conj(), lam) - np.eye(m)))
    if eq11 > tol:
        raise NotFactorizable(eq11)
    return LambdaTensor(lam, eq11, tp)


def _apply_batch(channel: Channel, xs: np.ndarray) -> np.ndarray:
    k = np.stack(channel.kraus)
    return np.einsum("aij,tjk,alk->til", k, xs, k.conj(), optimize=True)


def _kron_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    t, m, _ = a.shape
    n = b.shape[1]
    return np.einsum("tij,tbc->tibjc", a, b).reshape(t, m * n, m * n)


def verify_ns(channel: Channel, ns: NoiselessSubsystem, trials: int = 100, seed: int = 0) -> NSVerification:
    """Check a subsystem against random product inputs.

    Residuals (maxima over ``trials``):

    * ``eq1``: ``E(W (sA (x) sB) W^H)`` against ``W (tauA (x) sB) W^H`` with
      ``tauA`` the partial trace of the output over B;
    * ``eq2``: ``Tr_A`` of the output against ``sB``;
    * ``eq10``: ``E(W (1/m (x) rho) W^H)`` against ``W (sigma/m (x) rho) W^H``.
    """
    rng = np.random.default_rng(seed)
    m, n, w = ns.m, ns.n, ns.isometry
    wh = w.conj().T
    sa = linalg.random_densities(trials, m, rng)
    sb = linalg.random_densities(trials, n, rng)
    rho = linalg.random_densities(trials, n, rng)

    out = _apply_batch(channel, w @ _kron_batch(sa, sb) @ wh)
    t = (wh @ out @ w).reshape(trials, m, n, m, n)
    tau = np.einsum("tibjb->tij", t)
    tr_tau = np.einsum("tii->t", tau)
    degenerate = bool(np.any(np.abs(tr_tau) < 1e-12))
    safe = np.where(np.abs(tr_tau) < 1e-12, 1.0, tr_tau)
    tau = tau * (np.einsum("tii->t", out) / safe)[:, None, None]
    fit = w @ _kron_batch(tau, sb) @ wh
    eq1 = float(np.max(np.linalg.norm(out - fit, axis=(1, 2))))
    eq2 = float(np.max(np.linalg.norm(np.einsum("tibic->tbc", t) - sb, axis=(1, 2))))

    mixed = np.broadcast_to(np.eye(m) / m, (trials, m, m))
    out = _apply_batch(channel, w @ _kron_batch(mixed, rho) @ wh)
    cof = np.broadcast_to(ns.cofactor / m, (trials, m, m))
    expect = w @ _kron_batch(cof, rho) @ wh
    eq10 = float(np.max(np.linalg.norm(out - expect, axis=(1, 2))))
    return NSVerification(trials, eq1, eq2, eq10, degenerate)


@dataclass(frozen=True)
class ProjectorAnalysis:
    candidate: CandidateProjector
    algebra: MatrixAlgebra
    decomposition: StructureDecomposition
    cofactors: tuple[np.ndarray, ...]
    cofactor_residuals: dict
    subsystems: tuple[NoiselessSubsystem, ...]
    seed: int


def analyze_projector(
    channel: Channel,
    candidate: CandidateProjector | Projector,
    seed: int = 0,
    trials: int = 100,
    tol: float = DEFAULT_TOL,
) -> ProjectorAnalysis:
    """Commutant, decomposition, cofactors and verified subsystems for one projector."""
    if isinstance(candidate, Projector):
        candidate = check_projector_condition(channel, candidate, tol)
    if not candidate.accepted:
        raise SoundnessError(f"projector fails E(P) = P E(P) P (residual {candidate.condition_residual:.3e})")
    p = candidate.projector
    alg = commutant(channel.kraus, p)
    dec = structure_decompose(alg, seed)
    sigmas = extract_cofactors(channel, p, dec, alg, tol)
    cres = cofactor_residuals(channel, p, dec, sigmas, alg)
    subs = []
    for k, ((m, n), w, sig) in enumerate(zip(dec.blocks, dec.block_isometries, sigmas)):
        if n < 2:
            continue
        ns = NoiselessSubsystem(k, m, n, w, sig)
        try:
            lam = extract_lambda(channel, ns, tol)
        except NotFactorizable as exc:
            raise SoundnessError(f"block {k} ({m}, {n}) is not factorizable: {exc}") from exc
        ver = verify_ns(channel, ns, trials, seed)
        if ver.eq10_residual >= SOUNDNESS_TOL:
            raise SoundnessError(f"block {k} ({m}, {n}) fails verification: eq10 residual {ver.eq10_residual:.3e}")
        subs.append(replace(ns, lam=lam, verification=ver))
    return ProjectorAnalysis(candidate, alg, dec, tuple(sigmas), cres, tuple(subs), seed)


def noiseless_subsystems(
    channel: Channel,
    candidate: CandidateProjector | Projector,
    seed: int = 0,
    trials: int = 100,
    tol: float = DEFAULT_TOL,
) -> list[NoiselessSubsystem]:
    """Verified subsystems with ``n > 1`` supported by one invariant projector."""
    return list(analyze_projector(channel, candidate, seed, trials, tol).subsystems)


def same_subsystem(a: NoiselessSubsystem, b: NoiselessSubsystem, tol: float = DEDUPE_TOL) -> bool:
    """Equal shape, equal support and equal algebra ``1_m (x) B(C^n)``."""
    if (a.m, a.n) != (b.m, b.n) or np.linalg.norm(a.projector - b.projector) >= tol:
        return False
    basis = linalg.orthonormalize_hs(a.algebra_basis())
    return linalg.containment_residual(b.algebra_basis(), basis) < tol


def distinct_subsystems(found: Sequence[NoiselessSubsystem]) -> list[list[int]]:
    """Group indices of ``found`` that describe the same subsystem, in first-seen order."""
    groups: list[list[int]] = []
    for i, ns in enumerate(found):
        for g in groups:
            if same_subsystem(found[g[0]], ns):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


# -- certificates ---------------------------------------------------------------

@dataclass(frozen=True)
class FixpointReport:
    forward_residual: float
    schwarz_min_eigenvalue: float
    schwarz_identity_residual: float
    linear_solution_dim: int
    quadratic_solution_dim: int
    algebra_dim: int
    converse_residual: float
    converse_samples: int
    fixed_points_residual: float | None
    forward_pass: bool
    schwarz_pass: bool
    converse_pass: bool

    @property
    def fixed_points_pass(self) -> bool:
        return self.fixed_points_residual is None or self.fixed_points_residual <= DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return self.forward_pass and self.schwarz_pass and self.converse_pass and self.fixed_points_pass


def _dag(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def _fix_residuals(channel: Channel, sigmas: np.ndarray, ep: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample (linear, quadratic) residuals of the modified fixed-point conditions."""
    es = _apply_batch(channel, sigmas)
    norm = lambda x: np.linalg.norm(x, axis=(1, 2))  # noqa: E731
    lin = np.maximum(norm(es - sigmas @ ep), norm(es - ep @ sigmas))
    sd = _dag(sigmas)
    quad = np.maximum(
        norm(_apply_batch(channel, sd @ sigmas) - sd @ ep @ sigmas),
        norm(_apply_batch(channel, sigmas @ sd) - sigmas @ ep @ sd),
    )
    return lin, quad


def _random_combos(basis: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` unit-norm random complex combinations of a ``(k, d, d)`` stack."""
    k = basis.shape[0]
    c = rng.normal(size=(count, k)) + 1j * rng.normal(size=(count, k))
    x = np.einsum("tk,kij->tij", c, basis)
    return x / np.linalg.norm(x, axis=(1, 2))[:, None, None]


def verify_fixpoint_set(
    channel: Channel,
    p: Projector,
    algebra: MatrixAlgebra,
    trials: int = 100,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    converse_tol: float = CONVERSE_TOL,
) -> FixpointReport:
    """Numerically certify that the modified fixed-point set of ``E`` on ``P`` equals ``algebra``.

    forward
        basis elements and random elements of ``algebra`` satisfy all three
        fixed-point conditions;
    Schwarz
        for random ``sigma`` meeting only the linear condition,
        ``E(sigma^H sigma) - sigma^H E(P) sigma`` is positive semidefinite and equals
        ``sum_a [sigma, (E_a P)^H]^H [sigma, (E_a P)^H]``;
    converse
        the null space of the (PSD) quadratic defect form, restricted to
        linear-condition solutions, coincides with ``algebra``, and every
        sampled solution passing both quadratic conditions lies in ``algebra``.
    """
    rng = np.random.default_rng(seed)
    d = channel.dim
    v = algebra.isometry
    ep = apply_channel(channel, p.matrix)
    emb = algebra.embedded_basis()
    emb_stack = np.stack(emb) if emb else np.zeros((0, d, d), dtype=np.complex128)

    forward = 0.0
    if emb:
        samples = np.concatenate([emb_stack, _random_combos(emb_stack, trials, rng)])
        lin, quad = _fix_residuals(channel, samples, ep)
        forward = float(max(lin.max(), quad.max()))

    def linear_map(x):
        s = v @ x @ v.conj().T
        es = apply_channel(channel, s)
        return np.stack([es - s @ ep, es - ep @ s])

    lin_basis = [v @ x @ v.conj().T for x in linalg.kernel_of_linear_map(linear_map, p.rank, scale=2.0)]
    nl = len(lin_basis)
    lin_stack = np.stack(lin_basis) if lin_basis else np.zeros((0, d, d), dtype=np.complex128)

    schwarz_min = 0.0
    schwarz_id = 0.0
    if nl and trials:
        kraus_p = np.stack([e @ p.matrix for e in channel.kraus])
        s = _random_combos(lin_stack, trials, rng)
        sd = _dag(s)
        defect = _apply_batch(channel, sd @ s) - sd @ ep @ s
        # batched LAPACK here; it doubles as an outside check on the Jacobi path
        schwarz_min = float(np.min(np.linalg.eigvalsh(0.5 * (defect + _dag(defect)))))
        comm = s[:, None] @ _dag(kraus_p)[None] - _dag(kraus_p)[None] @ s[:, None]
        ident = np.sum(_dag(comm) @ comm, axis=1)
        schwarz_id = float(np.max(np.linalg.norm(defect - ident, axis=(1, 2))))

    # quadratic defect form on the linear solution space; with Tr E(X) = Tr X,
    # B(s, t) = 2 <s, t> - <s, E(P) t> - <s, t E(P)>
    quad_stack = np.zeros((0, d, d), dtype=np.complex128)
    if nl:
        flat = lin_stack.reshape(nl, -1)
        op = np.stack(
            [(2 * t - ep @ t - t @ ep).reshape(-1) for t in lin_basis]
        )
        gram = flat.conj() @ op.T
        es = linalg.hermitian_eig(0.5 * (gram + gram.conj().T))
        null = es.eigenvalues <= 1e-12 * max(1.0, float(np.max(np.abs(es.eigenvalues))))
        quad_stack = np.einsum("ik,ixy->kxy", es.eigenvectors[:, null], lin_stack)

    converse = 0.0
    count = 0
    probes = [quad_stack]
    if len(quad_stack):
        probes.append(_random_combos(quad_stack, trials, rng))
    if nl:
        probes.append(_random_combos(lin_stack, trials, rng))
    probes = np.concatenate(probes)
    if len(probes):
        lin, quad = _fix_residuals(channel, probes, ep)
        passing = probes[(lin <= tol) & (quad <= tol)]
        count = len(passing)
        if count:
            flat = passing.reshape(count, -1)
            if emb:
                q = emb_stack.reshape(len(emb), -1).T
                flat = flat - (flat @ q.conj()) @ q.T
            converse = float(np.max(np.linalg.norm(flat, axis=1)))

    # unital channels only: fixed points need not commute with the noise otherwise
    fixed_res = None
    if p.is_identity and channel.unital:
        fps = fixed_points(channel)
        fixed_res = linalg.containment_residual(fps, emb)

    return FixpointReport(
        forward_residual=forward,
        schwarz_min_eigenvalue=schwarz_min,
        schwarz_identity_residual=schwarz_id,
        linear_solution_dim=nl,
        quadratic_solution_dim=len(quad_stack),
        algebra_dim=algebra.dim,
        converse_residual=converse,
        converse_samples=count,
        fixed_points_residual=fixed_res,
        forward_pass=forward <= tol,
        schwarz_pass=schwarz_min >= -tol and schwarz_id <= tol,
        converse_pass=converse <= converse_tol and len(quad_stack) == algebra.dim,
    )


@dataclass(frozen=True)
class CorollaryReport:
    status: str
    note: str
    commutation_residual: float
    fixed_projector_residual: float
    subsystems_checked: int
    projectors_checked: int

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def check_unital_corollary(
    channel: Channel,
    all_ns: Sequence[NoiselessSubsystem],
    candidates: Sequence[CandidateProjector] = (),
    tol: float = DEFAULT_TOL,
) -> CorollaryReport:
    """For unital channels, every subsystem algebra lies in the full noise commutant.

    Also checks ``E(P) = P`` for each subsystem support and each candidate in
    ``candidates``. Non-unital channels get status ``"skipped"`` with the note
    ``"NotUnital"``.
    """
    if not channel.unital:
        return CorollaryReport("skipped", NotUnital.__name__, 0.0, 0.0, 0, 0)
    comm = 0.0
    fixed = 0.0
    for ns in all_ns:
        for b in ns.algebra_basis():
            for e in channel.kraus:
                comm = max(comm, float(np.linalg.norm(linalg.commutator(b, e))))
                comm = max(comm, float(np.linalg.norm(linalg.commutator(b, e.conj().T))))
        pk = ns.projector
        fixed = max(fixed, float(np.linalg.norm(apply_channel(channel, pk) - pk)))
    for c in candidates:
        pm = c.projector.matrix
        fixed = max(fixed, float(np.linalg.norm(apply_channel(channel, pm) - pm)))
    ok = comm <= tol and fixed <= tol
    return CorollaryReport("pass" if ok else "fail", "", comm, fixed, len(all_ns), len(candidates))


__all__ = [
    "CandidateProjector",
    "CorollaryReport",
    "FixpointReport",
    "LambdaTensor",
    "NSVerification",
    "NoiselessSubsystem",
    "ProjectorAnalysis",
    "STRATEGIES",
    "analyze_projector",
    "check_projector_condition",
    "check_unital_corollary",
    "cofactor_residuals",
    "distinct_subsystems",
    "extract_cofactors",
    "extract_lambda",
    "find_invariant_projectors",
    "fixed_points",
    "krylov_closure",
    "noiseless_subsystems",
    "same_subsystem",
    "verify_fixpoint_set",
    "verify_ns",
]
