"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 infeasible input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import verify as _verify
from .costs import CostModel, TwoBinContext, partition_cost
from .geometry import export_cost_grid
from .model import InfeasibleError, PackingError, load_instance
from .sim import DEFAULT_GRID, MixtureSpec, run_sweep
from .solver import error_certificate, solve_k_bins_dp, solve_two_bins

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _model(name: str) -> CostModel:
    try:
        return CostModel.parse(name)
    except PackingError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _models(text: str) -> list[CostModel]:
    return [_model(x) for x in text.split(",") if x.strip()]


def _grid(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if not vals or any(not v >= 1.0 for v in vals):
        raise argparse.ArgumentTypeError(f"grid values must be >= 1, got {text!r}")
    return vals


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as f:
            f.write(text)


def solve_instance(instance, model: CostModel) -> dict:
    instance.check_feasible()
    if instance.k == 2:
        sol = solve_two_bins(instance, model)
        cuts, partition = [sol.split_index], sol.partition
        cert = error_certificate(instance, model)
        certificate = cert.to_dict() if cert.applicable else None
    else:
        sol = solve_k_bins_dp(instance, model)
        cuts, partition, certificate = list(sol.cut_points), sol.partition, None
    return {
        "cut_points": cuts,
        "assignment": list(partition.assignment),
        "cost": partition_cost(instance, partition, model),
        "model": model.value,
        "certificate": certificate,
    }


def cmd_solve(args) -> int:
    try:
        instance = load_instance(args.instance)
    except (OSError, TypeError, KeyError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read instance: {e}") from None
    result = solve_instance(instance, args.model)
    _write(json.dumps(result, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    failed = False
    if args.trials > 0:
        for name, fails in _verify.run_suites(args.trials, args.n_max, args.seed):
            if fails:
                failed = True
                for msg in fails:
                    print(f"FAIL {name} {msg}")
            else:
                print(f"PASS {name} trials={args.trials}")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_simulate(args) -> int:
    if args.n < 4 or args.k < 1 or args.reps < 1 or args.timeslots < 2 or args.jobs < 1:
        raise UsageError("need n >= 4, k >= 1, reps >= 1, timeslots >= 2, jobs >= 1")
    report = run_sweep(MixtureSpec(args.n), args.grid, args.k, args.models, seed=args.seed,
                       repetitions=args.reps, T=args.timeslots, jobs=args.jobs)
    _write(report.to_csv(), args.out)
    return EXIT_OK


def cmd_grid(args) -> int:
    if args.resolution < 2:
        raise UsageError("resolution must be at least 2")
    if not (args.mu > 0 and args.var > 0 and args.c1 >= 0 and args.c2 >= 0):
        raise UsageError("need mu > 0, var > 0 and non-negative capacities")
    ctx = TwoBinContext.of(args.c1, args.c2, args.mu, args.var)
    _write(export_cost_grid(ctx, args.model, args.resolution), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochpack", description="Stochastic packing of normal demands.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance JSON file")
    s.add_argument("instance")
    s.add_argument("--model", type=_model, default=CostModel.SPMED)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run the randomized self-checks")
    v.add_argument("--n-max", type=int, default=8)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="sorting vs BM sweep over c/mu")
    m.add_argument("--n", type=int, default=100)
    m.add_argument("--k", type=int, default=2)
    m.add_argument("--models", type=_models, default=list(CostModel))
    m.add_argument("--grid", type=_grid, default=list(DEFAULT_GRID))
    m.add_argument("--reps", type=int, default=20)
    m.add_argument("--timeslots", type=int, default=500)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    g = sub.add_parser("grid", help="export the two-bin cost surface as CSV")
    g.add_argument("--c1", type=float, required=True)
    g.add_argument("--c2", type=float, required=True)
    g.add_argument("--mu", type=float, required=True)
    g.add_argument("--var", type=float, required=True)
    g.add_argument("--model", type=_model, default=CostModel.SPMED)
    g.add_argument("--resolution", type=int, default=51)
    g.add_argument("--out")
    g.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, PackingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
