"""Command-line interface.

Exit codes: 0 all certificates pass, 1 usage or format error, 2 some
certificate failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Sequence

import numpy as np

from . import aggregator
from .aggregator import AggregatorConfig
from .baselines import FixedBoundEW, FollowLeader, Uniform, run_baseline
from .diagnostics import certify_run
from .errors import ExpertMixError
from .scenarios import generate, parse_scenario
from .streamio import dump_run_log, load_run_log, read_stream, write_stream

EXIT_OK, EXIT_USAGE, EXIT_CERT = 0, 1, 2

SCENARIO_HELP = """\
scenario strings are comma-separated key=value pairs, e.g.
  family=scale_burst,N=10,T=1000,D=4,seed=7,M=50,p=0.02
keys: family (noisy_regression|drifting_leader|scale_burst|density_grid),
N, T, D, seed, k (integers); sigma, M, p, period, width (floats);
sigmas (colon-separated per-expert noise levels, e.g. sigmas=0:1:2)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_algo(text: str):
    """``paper`` (returns None), ``fixed-ew:B``, ``ftl`` or ``uniform``."""
    name, _, arg = text.strip().partition(":")
    if name == "paper" and not arg:
        return None
    if name == "ftl" and not arg:
        return FollowLeader()
    if name == "uniform" and not arg:
        return Uniform()
    if name == "fixed-ew":
        try:
            return FixedBoundEW(float(arg))
        except ValueError:
            raise UsageError(f"fixed-ew needs a positive bound, got {arg!r}") from None
    raise UsageError(f"unknown algorithm {text!r}")


def _play(algo_text: str, stream):
    kind = parse_algo(algo_text)
    config = AggregatorConfig(stream.num_experts, stream.dimension)
    if kind is None:
        return aggregator.run(config, stream)
    return run_baseline(kind, config, stream)


def _load_input(args):
    if args.input is not None:
        return read_stream(args.input)
    return generate(parse_scenario(args.scenario))


def cmd_run(args) -> int:
    stream = _load_input(args)
    if len(stream) == 0:
        raise UsageError("stream has no rounds; nothing to certify")
    records = _play(args.algo, stream)
    report = certify_run(records, stream.num_experts)
    if args.out:
        dump_run_log(args.out, records, report)
    doc = json.dumps(report.to_dict(), indent=2, allow_nan=False)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)
    return EXIT_OK if report.all_ok else EXIT_CERT


def cmd_compare(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    if len(algos) < 2:
        raise UsageError("--algos needs at least two algorithms")
    for a in algos:
        parse_algo(a)
    stream = generate(parse_scenario(args.scenario))
    if len(stream) == 0:
        raise UsageError("scenario has no rounds")
    status = EXIT_OK
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "algo", "cumulative_player_loss", "cumulative_best_expert_loss", "regret"])
        for algo in algos:
            records = _play(algo, stream)
            if not certify_run(records, stream.num_experts).all_ok:
                status = EXIT_CERT
            H = 0.0
            L = np.zeros(stream.num_experts)
            for rec in records:
                H += rec.player_loss
                L += rec.expert_losses
                best = float(L.min())
                writer.writerow([rec.t, algo, repr(H), repr(best), repr(H - best)])
    return status


def cmd_verify(args) -> int:
    records, stored = load_run_log(args.log)
    if not records:
        raise UsageError("log holds no rounds")
    for i, rec in enumerate(records, start=1):
        if rec.t != i:
            raise UsageError(f"round records out of order at line {i}")
    report = certify_run(records, stored.num_experts)
    print(json.dumps(report.to_dict(), indent=2, allow_nan=False))
    if not report.all_ok:
        return EXIT_CERT
    if report.to_dict() != stored.to_dict():
        print("stored report disagrees with the recomputed one", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_generate(args) -> int:
    write_stream(args.out, generate(parse_scenario(args.scenario)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="expertmix",
        description="Online aggregation of expert predictions under unbounded quadratic loss.",
        epilog=SCENARIO_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one algorithm and certify the result", epilog=SCENARIO_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="stream file")
    src.add_argument("--scenario", help="synthetic scenario string")
    p.add_argument("--algo", default="paper", help="paper | fixed-ew:B | ftl | uniform (default: paper)")
    p.add_argument("--out", help="write the JSON Lines run log here")
    p.add_argument("--report", help="write the regret report here (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several algorithms on one scenario, emit CSV", epilog=SCENARIO_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--scenario", required=True)
    p.add_argument("--algos", required=True, help="comma-separated, e.g. paper,ftl,fixed-ew:2.0")
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="recheck every certificate from a stored run log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="write a synthetic scenario as a stream file", epilog=SCENARIO_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ExpertMixError, OSError) as exc:
        print(f"expertmix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
