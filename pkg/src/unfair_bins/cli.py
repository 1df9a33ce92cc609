"""Command-line front end.

Subcommands: ``simulate`` (multi-trial experiment, CSV artifacts),
``predict`` (per-rank prediction table), ``oracle`` (exact law for small
instances), ``verify`` (the statistical check suite), and ``swapbound``
(overtake-frequency experiment against the ruin bound).

Exit codes: 0 success / all checks passed, 1 verification failure,
2 invalid parameters, 3 resource budget exceeded. Parallelism is chosen
by the ``UNFAIR_BINS_JOBS`` environment variable (default: hardware
thread count).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .experiment import ARTIFACTS, ExperimentSpec, load_spec, run_experiment
from .oracle import BudgetExceededError, DEFAULT_MAX_STATES, exact_distribution, exact_sorted_means
from .output import write_oracle_csv, write_prediction_csv
from .process import ConfigError, Policy
from .analysis import swap_probability_estimate
from .theory import gambler_ruin_bound
from .verify import CHECKS, run_checks

_SPEC_FLAGS = ("n", "m", "d", "policy", "seed", "trials", "snapshot_every")


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment spec; flags override its fields")
    parser.add_argument("--n", type=int, help="bin count")
    parser.add_argument("--m", type=int, help="ball count")
    parser.add_argument("--d", type=int, help="options per ball")
    parser.add_argument("--policy", choices=[p.value for p in Policy], help="placement policy")
    parser.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
    parser.add_argument("--trials", type=int, help="independent trials")
    parser.add_argument("--snapshot-every", dest="snapshot_every", type=int,
                        help="balls between recorded snapshots")


def _build_spec(args: argparse.Namespace) -> ExperimentSpec:
    data = load_spec(args.config).to_dict() if args.config else {}
    for name in _SPEC_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if getattr(args, "outputs", None):
        data["outputs"] = [o.strip() for o in args.outputs.split(",") if o.strip()]
    if getattr(args, "gap_pair", None):
        data["gap_pair"] = [int(x) for x in args.gap_pair.split(",")]
    missing = [k for k in ("n", "m", "d") if k not in data]
    if missing:
        raise ConfigError({k: "required (flag or config file)" for k in missing})
    return ExperimentSpec.from_dict(data)


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = _build_spec(args)
    paths = run_experiment(spec, args.out_dir, prefix=args.prefix)
    for artifact, path in paths.items():
        print(f"{artifact}: {path}")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    write_prediction_csv(
        args.out, args.n, args.d, args.m, meta={"n": args.n, "d": args.d, "m": args.m}
    )
    print(f"prediction: {args.out}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    dist = exact_distribution(args.n, args.m, args.d, max_states=args.max_states)
    means = exact_sorted_means(args.n, args.m, args.d, max_states=args.max_states)
    meta = {"n": args.n, "m": args.m, "d": args.d, "max_states": args.max_states}
    write_oracle_csv(args.out, dist, means, meta)
    print(f"oracle: {args.out} ({len(dist.support)} profiles)")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    overrides: dict[str, float] = {}
    if args.config:
        overrides = dict(load_spec(args.config).tolerances)
    names = None
    if args.only:
        names = [name.strip() for name in args.only.split(",") if name.strip()]
    try:
        results = run_checks(names=names, overrides=overrides)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    name_w = max(len(r.name) for r in results)
    meas_w = max(len(r.measured) for r in results)
    tol_w = max(len(r.tolerance) for r in results)
    print(f"{'check':<{name_w}}  stat  {'measured':<{meas_w}}  {'tolerance':<{tol_w}}  claim")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{name_w}}  {status}  {r.measured:<{meas_w}}  {r.tolerance:<{tol_w}}  {r.claim}")
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 1


def _cmd_swapbound(args: argparse.Namespace) -> int:
    freq, stderr = swap_probability_estimate(
        args.n, args.d, args.gap, args.horizon, args.trials, args.seed
    )
    bound = gambler_ruin_bound(args.gap, args.n, args.d)
    print(f"overtake frequency: {freq:.6f} (stderr {stderr:.6f}) over {args.trials} trials")
    if args.d == 1:
        print("theory bound: vacuous (=1) at d=1")
        print("verdict: PASS")
        return 0
    delta = args.gap * (args.d - 1) / args.n
    slack = 3.0 * math.sqrt(bound * (1.0 - bound) / args.trials)
    print(f"theory bound e^-delta: {bound:.6f} (delta = gap*(d-1)/n = {delta:g})")
    verdict = "PASS" if freq <= bound + slack else "FAIL"
    print(f"verdict: {verdict} (one-sided: frequency <= bound + 3*sqrt(bound*(1-bound)/trials) = {bound + slack:.6f})")
    return 0 if verdict == "PASS" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unfair-bins",
        description="Simulate, predict, and verify max-of-d-choices ball allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run trials and write CSV artifacts")
    _add_spec_flags(sim)
    sim.add_argument("--outputs", help=f"comma list from {','.join(ARTIFACTS)}")
    sim.add_argument("--gap-pair", dest="gap_pair", help="two bin labels for the gaps artifact, e.g. 1,2")
    sim.add_argument("--out-dir", dest="out_dir", type=Path, default=Path("."))
    sim.add_argument("--prefix", default="")
    sim.set_defaults(func=_cmd_simulate)

    pred = sub.add_parser("predict", help="write the per-rank prediction table")
    pred.add_argument("--n", type=int, required=True)
    pred.add_argument("--d", type=int, required=True)
    pred.add_argument("--m", type=int, required=True)
    pred.add_argument("--out", type=Path, default=Path("prediction.csv"))
    pred.set_defaults(func=_cmd_predict)

    orc = sub.add_parser("oracle", help="write the exact small-instance law")
    orc.add_argument("--n", type=int, required=True)
    orc.add_argument("--m", type=int, required=True)
    orc.add_argument("--d", type=int, required=True)
    orc.add_argument("--max-states", dest="max_states", type=int, default=DEFAULT_MAX_STATES)
    orc.add_argument("--out", type=Path, default=Path("oracle.csv"))
    orc.set_defaults(func=_cmd_oracle)

    ver = sub.add_parser("verify", help="run the statistical check suite")
    ver.add_argument("--config", type=Path, help="JSON spec; its tolerances override check limits")
    ver.add_argument("--only", help=f"comma list from {','.join(CHECKS)}")
    ver.set_defaults(func=_cmd_verify)

    swp = sub.add_parser("swapbound", help="estimate overtake frequency vs the ruin bound")
    swp.add_argument("--n", type=int, required=True)
    swp.add_argument("--d", type=int, required=True)
    swp.add_argument("--gap", type=int, required=True)
    swp.add_argument("--horizon", type=int, required=True)
    swp.add_argument("--trials", type=int, required=True)
    swp.add_argument("--seed", type=int, default=0)
    swp.set_defaults(func=_cmd_swapbound)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"offending fields: {', '.join(exc.fields)}", file=sys.stderr)
        return 2
    except (ValueError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
