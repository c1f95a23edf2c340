"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 validation/parse error, 4 a verified
property failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io, measures
from .errors import ComplabError, ParseError, UnknownScenario, ValidationError
from .explorer import VerifyConfig, MUTATIONS, sample_region, sweep, verify_properties
from .povm_design import SCENARIOS, scenario
from .qmatrix import RngSpec

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_PROPERTY = 0, 2, 3, 4

SWEEP_COLUMNS = ["theta", "p_bar", "c_bar", "s_bar", "s_bar_sqrt", "p_bar_sq", "c_bar_sq",
                 "tcr_lhs", "const_P", "const_C"]
SAMPLE_COLUMNS = ["p", "c", "s_l", "p1", "a_mod", "boundary_gap"]
MEASURE_COLUMNS = ["dim", "P", "C", "S_L", "P_sq", "C_sq", "duality_lhs", "tcr_lhs",
                   "argmax", "P_durr", "V_durr"]


def _emit(text: str, output: str | None):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def cmd_measure(args) -> int:
    rho = io.load_state(args.input)
    t = measures.tcr_triple(rho)
    dp = measures.durr_measures(rho)
    row = {"dim": rho.dim, **t.as_dict(), "P_durr": dp.predictability, "V_durr": dp.visibility}
    if args.format == "json":
        _emit(json.dumps({c: io.to_plain(row[c]) for c in MEASURE_COLUMNS}, indent=1) + "\n", args.output)
    else:
        _emit(io.rows_to_csv([row], MEASURE_COLUMNS), args.output)
    return EXIT_OK


def _resolve_scenario(args):
    if args.input:
        s = io.load_scenario(args.input)
    elif args.scenario:
        s = scenario(args.scenario)
    else:
        raise UnknownScenario("give --scenario NAME or --input FILE")
    grid = np.asarray(s.thetas)
    start = grid[0] if args.theta_start is None else args.theta_start
    stop = grid[-1] if args.theta_stop is None else args.theta_stop
    steps = grid.size if args.steps is None else args.steps
    return s.with_grid(start, stop, steps)


def cmd_sweep(args) -> int:
    res = sweep(_resolve_scenario(args))
    _emit(io.render(res.rows(), SWEEP_COLUMNS, args.format), args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    rs = sample_region(args.count, args.n, RngSpec(args.seed))
    gap = rs.boundary_gap
    rows = [{"p": rs.p[i], "c": rs.c[i], "s_l": rs.s_l[i], "p1": rs.p1[i],
             "a_mod": rs.a_mod[i], "boundary_gap": gap[i]} for i in range(len(rs))]
    _emit(io.render(rows, SAMPLE_COLUMNS, args.format), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = VerifyConfig(n_min=args.n_min, n_max=args.n_max, samples=args.count,
                       wwd_samples=args.wwd_count, seed=args.seed, mutate=args.mutate)
    rep = verify_properties(cfg)
    for r in rep.results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<32} n={r.samples:<8d} worst_margin={r.worst_margin:.3e}",
              file=sys.stderr)
    _emit(json.dumps(rep.as_dict(), indent=1) + "\n", args.output)
    return EXIT_OK if rep.passed else EXIT_PROPERTY


def cmd_scenario(args) -> int:
    if args.action == "list":
        for name in SCENARIOS:
            print(f"{name}\t{scenario(name).description}")
        return EXIT_OK
    if not args.name:
        raise UnknownScenario("scenario show needs a NAME")
    _emit(json.dumps(io.scenario_to_json(scenario(args.name)), indent=1) + "\n", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="complab", description=(
        "Wave-particle-mixedness complementarity: measures, which-way-detector sweeps, "
        "saturating-family sampling and property verification."))
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--output", "-o", help="output file (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("measure", help="P, C, S_L and related values of a state file")
    p.add_argument("--input", "-i", required=True, help="JSON state file")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep", help="theta sweep of a named or file-defined scenario")
    p.add_argument("--scenario", "-s")
    p.add_argument("--input", "-i", help="JSON scenario file")
    p.add_argument("--theta-start", type=float)
    p.add_argument("--theta-stop", type=float)
    p.add_argument("--steps", type=_at_least(2))
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="sample the saturating family")
    p.add_argument("--n", type=_at_least(2), default=3)
    p.add_argument("--count", type=_at_least(1), default=10_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run the property-verification suite")
    p.add_argument("--n-min", type=_at_least(2), default=2)
    p.add_argument("--n-max", type=_at_least(2), default=6)
    p.add_argument("--count", type=_at_least(1), default=20_000, help="samples per batch")
    p.add_argument("--wwd-count", type=_at_least(1), default=2_000,
                   help="random (state, interaction, POVM) draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mutate", choices=sorted(MUTATIONS), help="inject a known defect (test hook)")
    common(p, fmt=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scenario", help="list or dump named scenarios")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_scenario)
    return ap


def _at_least(lo: int):
    def conv(text):
        v = int(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return v
    return conv


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownScenario as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError) as exc:
        kind = type(exc).__name__
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ComplabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
