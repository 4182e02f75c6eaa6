"""Full analysis pipeline and report rendering."""
from __future__ import annotations

import datetime as _dt
import json
import platform
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy

from . import __version__, linalg
from .algebra import verify_decomposition
from .channel import Channel, matrix_to_json
from .errors import (
    CandidateBudgetExceeded,
    DegenerateSample,
    NotFactorizable,
    ReconstructionFailed,
    SoundnessError,
    StructureInconsistent,
)
from .nsfinder import (
    STRATEGIES,
    analyze_projector,
    check_unital_corollary,
    distinct_subsystems,
    find_invariant_projectors,
    verify_fixpoint_set,
)

SCHEMA_VERSION = "1.0"

_PIPELINE_ERRORS = (SoundnessError, StructureInconsistent, ReconstructionFailed, DegenerateSample, NotFactorizable)


@dataclass(frozen=True)
class AnalysisConfig:
    tol: float = linalg.DEFAULT_TOL
    seed: int = 0
    strategies: tuple[str, ...] = STRATEGIES
    max_candidates: int = 64
    trials: int = 100
    timestamp: bool = True


@dataclass
class AnalysisReport:
    """JSON-ready report plus the soundness verdict that drives the exit code."""

    data: dict
    soundness_failures: list[str] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return not self.soundness_failures

    @property
    def subsystems(self) -> list[dict]:
        """Every reported subsystem entry, one per (candidate, block)."""
        return [s for c in self.data["candidates"] for s in c["subsystems"]]

    @property
    def distinct(self) -> list[dict]:
        return self.data["distinct_subsystems"]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=False, allow_nan=False) + "\n"

    def to_text(self) -> str:
        return render_text(self.data)


def blocks_text(blocks: Iterable[tuple[int, int]]) -> str:
    """``[(2, 2), (1, 1)]`` -> ``"1_2 ⊗ M_2 ⊕ 1_1 ⊗ M_1"``."""
    return " ⊕ ".join(f"1_{m} ⊗ M_{n}" for m, n in blocks)


def _f(x) -> float:
    x = float(x)
    if not np.isfinite(x):
        raise SoundnessError(f"non-finite residual {x}")
    return x


def _spectrum(sig: np.ndarray) -> list[float]:
    return [_f(v) for v in linalg.eigvalsh(sig)[::-1]]


def _versions() -> dict:
    return {
        "noiseless": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "eigensolver_backend": linalg.BACKEND,
    }


def _fixpoint_json(fr) -> dict:
    return {
        "passed": fr.passed,
        "forward_pass": fr.forward_pass,
        "schwarz_pass": fr.schwarz_pass,
        "converse_pass": fr.converse_pass,
        "forward_residual": _f(fr.forward_residual),
        "schwarz_min_eigenvalue": _f(fr.schwarz_min_eigenvalue),
        "schwarz_identity_residual": _f(fr.schwarz_identity_residual),
        "linear_solution_dim": fr.linear_solution_dim,
        "quadratic_solution_dim": fr.quadratic_solution_dim,
        "algebra_dim": fr.algebra_dim,
        "converse_residual": _f(fr.converse_residual),
        "converse_samples": fr.converse_samples,
        "fixed_points_residual": None if fr.fixed_points_residual is None else _f(fr.fixed_points_residual),
    }


def _subsystem_json(ns) -> dict:
    v = ns.verification
    return {
        "block_index": ns.block_index,
        "m": ns.m,
        "n": ns.n,
        "dfs": ns.is_dfs,
        "isometry": matrix_to_json(ns.isometry),
        "sigma_spectrum": _spectrum(ns.cofactor),
        "lambda": {
            "eq11_residual": _f(ns.lam.eq11_residual),
            "trace_preservation_residual": _f(ns.lam.trace_preservation_residual),
        },
        "verification": {
            "trials": v.trials,
            "eq1_residual": _f(v.eq1_residual),
            "eq2_residual": _f(v.eq2_residual),
            "eq10_residual": _f(v.eq10_residual),
            "degenerate_trace": v.degenerate_trace,
        },
    }


def run_analysis(channel: Channel, config: AnalysisConfig = AnalysisConfig()) -> AnalysisReport:
    """Search candidates, analyze each, certify, and assemble the report.

    Candidate ``i`` (in canonical order) is analyzed with seed ``seed ^ i``.
    Pipeline failures are recorded against their candidate and make the
    report unsound rather than dropping the candidate.
    """
    failures: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CandidateBudgetExceeded)
        candidates = find_invariant_projectors(
            channel, config.strategies, config.seed, config.max_candidates, config.tol
        )
    budget_exceeded = any(issubclass(w.category, CandidateBudgetExceeded) for w in caught)

    entries = []
    all_ns = []
    origin = []
    theorem1_ok = True
    for i, cand in enumerate(candidates):
        cseed = config.seed ^ i
        entry = {
            "index": i,
            "rank": cand.rank,
            "source": cand.source,
            "sources": list(cand.sources),
            "condition_residual": _f(cand.condition_residual),
            "leakage_residual": _f(cand.leakage_residual),
            "residuals_agree": cand.residuals_agree,
            "seed": cseed,
            "projector": matrix_to_json(cand.projector.matrix),
            "blocks": [],
            "blocks_text": "",
            "subsystems": [],
            "error": None,
        }
        try:
            pa = analyze_projector(channel, cand, cseed, config.trials, config.tol)
            dec = pa.decomposition
            dr = verify_decomposition(pa.algebra, dec)
            fr = verify_fixpoint_set(channel, cand.projector, pa.algebra, config.trials, cseed, config.tol)
        except _PIPELINE_ERRORS as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            failures.append(f"candidate {i}: {entry['error']}")
            theorem1_ok = False
            entries.append(entry)
            continue
        book = dec.bookkeeping()
        entry.update(
            blocks=[[m, n] for m, n in dec.blocks],
            blocks_text=blocks_text(dec.blocks),
            commutant_dim=pa.algebra.dim,
            relative_commutant_dim=dec.commutant_dim,
            center_dim=dec.center_dim,
            bookkeeping={k: (v if isinstance(v, bool) else _f(v)) for k, v in book.items()},
            decomposition={
                "passed": dr.passed,
                "off_pattern_residual": _f(dr.off_pattern_residual),
                "factor_residual": _f(dr.factor_residual),
                "unitarity_residual": _f(dr.unitarity_residual),
            },
            cofactor_residuals={k: _f(v) for k, v in pa.cofactor_residuals.items()},
            theorem1=_fixpoint_json(fr),
            subsystems=[_subsystem_json(ns) for ns in pa.subsystems],
        )
        if not dr.passed:
            failures.append(f"candidate {i}: decomposition pattern check failed")
        if not all(v for v in book.values() if isinstance(v, bool)) or book["unitarity_residual"] > linalg.STRICT_TOL:
            failures.append(f"candidate {i}: structural bookkeeping failed")
        if not fr.passed:
            failures.append(f"candidate {i}: fixed-point certificate failed")
            theorem1_ok = False
        all_ns.extend(pa.subsystems)
        origin.extend((i, j) for j in range(len(pa.subsystems)))
        entries.append(entry)

    groups = distinct_subsystems(all_ns)
    distinct = []
    for g in groups:
        ns = all_ns[g[0]]
        distinct.append(
            {
                "m": ns.m,
                "n": ns.n,
                "dfs": ns.is_dfs,
                "support_rank": ns.m * ns.n,
                "found_in": [list(origin[k]) for k in g],
            }
        )

    cor = check_unital_corollary(channel, all_ns, candidates, config.tol)
    if cor.status == "fail":
        failures.append("unital corollary check failed")

    data = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds") if config.timestamp else None,
        "channel": {
            "label": channel.label,
            "dim": channel.dim,
            "num_kraus": channel.num_kraus,
            "tp_residual": _f(channel.tp_residual),
            "unital": channel.unital,
            "unitality_residual": _f(channel.unitality_residual),
            "choi_min_eigenvalue": _f(channel.choi_min_eigenvalue),
        },
        "config": {
            "tol": config.tol,
            "seed": config.seed,
            "strategies": sorted(config.strategies),
            "max_candidates": config.max_candidates,
            "trials": config.trials,
            "versions": _versions(),
        },
        "search": {"accepted": len(candidates), "budget_exceeded": budget_exceeded},
        "candidates": entries,
        "distinct_subsystems": distinct,
        "summary": {
            "noiseless_subsystems": len(distinct),
            "decoherence_free_subspaces": sum(d["dfs"] for d in distinct),
            "largest_n": max((d["n"] for d in distinct), default=1),
        },
        "theorem_checks": {
            "theorem1": {"passed": theorem1_ok},
            "corollary": {
                "status": cor.status,
                "note": cor.note,
                "commutation_residual": _f(cor.commutation_residual),
                "fixed_projector_residual": _f(cor.fixed_projector_residual),
            },
        },
        "soundness": {"passed": not failures, "failures": failures},
    }
    return AnalysisReport(data, failures)


def render_text(data: dict) -> str:
    ch = data["channel"]
    lines = [
        f"channel: {ch['label'] or '(unlabeled)'}  dim={ch['dim']}  kraus={ch['num_kraus']}",
        f"  unital: {'yes' if ch['unital'] else 'no'} (||E(1) - 1|| = {ch['unitality_residual']:.3e})"
        f"  choi min eigenvalue: {ch['choi_min_eigenvalue']:.3e}",
        f"candidates: {data['search']['accepted']} accepted"
        + ("  (search truncated at max_candidates)" if data["search"]["budget_exceeded"] else ""),
    ]
    for c in data["candidates"]:
        lines.append(
            f"  [{c['index']}] rank {c['rank']} via {'+'.join(c['sources'])}"
            f"  residual {c['condition_residual']:.2e}"
        )
        if c["error"]:
            lines.append(f"      ERROR {c['error']}")
            continue
        lines.append(f"      A'_P = {c['blocks_text']}  (dim {c['commutant_dim']})")
        t1 = c["theorem1"]
        lines.append(f"      fixed-point certificate: {'pass' if t1['passed'] else 'FAIL'}")
        for s in c["subsystems"]:
            kind = "DFS" if s["dfs"] else "NS"
            spec = ", ".join(f"{v:.6g}" for v in s["sigma_spectrum"])
            v = s["verification"]
            lines.append(
                f"      {kind} block {s['block_index']}: (m, n) = ({s['m']}, {s['n']})"
                f"  sigma spectrum [{spec}]  eq10 {v['eq10_residual']:.1e}"
            )
    s = data["summary"]
    if s["noiseless_subsystems"] == 0:
        lines.append("summary: no non-trivial noiseless subsystems found")
    else:
        lines.append(
            f"summary: {s['noiseless_subsystems']} distinct noiseless subsystems"
            f" ({s['decoherence_free_subspaces']} DFS), largest n = {s['largest_n']}"
        )
        for d in data["distinct_subsystems"]:
            where = ", ".join(f"[{c}].{b}" for c, b in d["found_in"])
            lines.append(f"  {'DFS' if d['dfs'] else 'NS'} (m, n) = ({d['m']}, {d['n']}) found in {where}")
    cor = data["theorem_checks"]["corollary"]
    lines.append(f"unital corollary: {cor['status']}" + (f" ({cor['note']})" if cor["note"] else ""))
    snd = data["soundness"]
    lines.append("soundness: " + ("pass" if snd["passed"] else "FAIL: " + "; ".join(snd["failures"])))
    return "\n".join(lines) + "\n"


__all__ = ["AnalysisConfig", "AnalysisReport", "SCHEMA_VERSION", "blocks_text", "render_text", "run_analysis"]
