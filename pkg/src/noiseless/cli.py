"""Command-line interface: ``noiseless validate | analyze | example``.

Exit codes: 0 on success, 1 on input errors, 2 when an internal soundness
check fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import AnalysisConfig, run_analysis
from .catalog import EXAMPLES, builtin_example
from .channel import Channel, channel_to_json, load_channel
from .errors import BadParameter, NoiselessError, SoundnessError
from .linalg import DEFAULT_TOL
from .nsfinder import STRATEGIES

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOUNDNESS = 2


def _param_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise BadParameter(f"--param expects key=value, got {item!r}")
        out[key.strip()] = _param_value(value.strip())
    return out


def _strategies(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in STRATEGIES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"strategies must be a comma list from {','.join(STRATEGIES)}")
    return names


def _add_example_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=float, help="kl97 noise parameter in (0, 1/2]")
    p.add_argument("--dim", type=int, help="dimension for the identity, depolarizing and random examples")
    p.add_argument(
        "--param", action="append", metavar="KEY=VALUE", help="extra example parameter; repeatable"
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="decision tolerance (default 1e-8)")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--output", type=Path, help="write the result here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="noiseless",
        description="Find and certify decoherence-free subspaces and noiseless subsystems of quantum channels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check a channel file for CPTP")
    v.add_argument("file", type=Path)

    a = sub.add_parser("analyze", parents=[common], help="run the full analysis")
    a.add_argument("file", type=Path, nargs="?")
    a.add_argument("--example", choices=sorted(EXAMPLES), help="analyze a builtin example instead of a file")
    _add_example_params(a)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--strategies", type=_strategies, default=STRATEGIES, help="comma list (default: all)")
    a.add_argument("--max-candidates", type=int, default=64)
    a.add_argument("--trials", type=int, default=100)
    a.add_argument("--no-timestamp", action="store_true", help="omit generated_at for reproducible output")

    e = sub.add_parser("example", help="write a builtin example channel as JSON")
    e.add_argument("name", choices=sorted(EXAMPLES))
    _add_example_params(e)
    e.add_argument("--out", type=Path, help="output file (default stdout)")
    return parser


def _example_from_args(args) -> Channel:
    params = _parse_params(args.param)
    if args.q is not None:
        params["q"] = args.q
    if args.dim is not None:
        params["dim"] = args.dim
    return builtin_example(args.example if hasattr(args, "example") and args.example else args.name, **params)


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _validate(args) -> int:
    ch = load_channel(args.file, args.tol)
    info = {
        "valid": True,
        "label": ch.label,
        "dim": ch.dim,
        "num_kraus": ch.num_kraus,
        "tp_residual": ch.tp_residual,
        "choi_min_eigenvalue": ch.choi_min_eigenvalue,
        "unital": ch.unital,
        "unitality_residual": ch.unitality_residual,
    }
    if args.format == "json":
        _emit(json.dumps(info, indent=2) + "\n", args.output)
    else:
        _emit(
            f"valid channel: dim={ch.dim} kraus={ch.num_kraus}"
            f" tp residual {ch.tp_residual:.2e}, choi min eigenvalue {ch.choi_min_eigenvalue:.2e},"
            f" {'unital' if ch.unital else 'non-unital'} ({ch.unitality_residual:.2e})\n",
            args.output,
        )
    return EXIT_OK


def _analyze(args) -> int:
    if (args.file is None) == (args.example is None):
        raise BadParameter("analyze takes either a channel file or --example NAME")
    if args.file is not None:
        if args.q is not None or args.dim is not None or args.param:
            raise BadParameter("--q, --dim and --param only apply with --example")
        ch = load_channel(args.file, args.tol)
    else:
        ch = _example_from_args(args)
    if args.trials < 0 or args.max_candidates < 1:
        raise BadParameter("--trials must be >= 0 and --max-candidates >= 1")
    config = AnalysisConfig(
        tol=args.tol,
        seed=args.seed,
        strategies=tuple(args.strategies),
        max_candidates=args.max_candidates,
        trials=args.trials,
        timestamp=not args.no_timestamp,
    )
    report = run_analysis(ch, config)
    _emit(report.to_json() if args.format == "json" else report.to_text(), args.output)
    if not report.sound:
        for line in report.soundness_failures:
            print(f"soundness failure: {line}", file=sys.stderr)
        return EXIT_SOUNDNESS
    return EXIT_OK


def _example(args) -> int:
    ch = _example_from_args(args)
    _emit(json.dumps(channel_to_json(ch), indent=1) + "\n", args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"validate": _validate, "analyze": _analyze, "example": _example}[args.command]
    try:
        return handler(args)
    except SoundnessError as exc:
        print(f"soundness failure: {exc}", file=sys.stderr)
        return EXIT_SOUNDNESS
    except (NoiselessError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
