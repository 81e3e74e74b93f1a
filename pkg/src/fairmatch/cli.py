"""Command-line entry point.

Exit codes: 0 success, 1 infeasible / no balanced matching / failed check,
2 usage error, 3 solver or internal failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .baseline import peel_matching
from .exact import DEFAULT_BRUTE_THRESHOLD, WorkLimitExceeded, brute_force_opt, solve_beta_fair
from .fairness import check_delta_fair, is_balanced
from .graph import (
    FairnessSpec,
    GraphFormatError,
    NotBipartiteError,
    generate_erdos_renyi,
    generate_star_fixture,
    read_graph,
    read_matching,
    write_graph,
    write_matching,
)
from .lp import InfeasibleError, LpError, build_lp_fair, export_lp, read_solution, solve, write_solution
from .rounding import round_ocrs

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(","))


def _spec(args) -> FairnessSpec:
    if (args.alpha_per is None) != (args.beta_per is None):
        raise UsageError("--alpha-per and --beta-per must be given together")
    eps = getattr(args, "epsilon", None) or 0.1
    if args.alpha_per is not None:
        return FairnessSpec(args.alpha_per, args.beta_per, eps)
    return FairnessSpec(args.alpha, args.beta, eps)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _add_spec_flags(p):
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--alpha-per", type=_floats, default=None, help="comma-separated per-color alpha")
    p.add_argument("--beta-per", type=_floats, default=None, help="comma-separated per-color beta")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairmatch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute a fair matching")
    p.add_argument("graph")
    p.add_argument("--mode", choices=["two-sided", "exact-beta", "brute", "peel"], default="two-sided")
    _add_spec_flags(p)
    p.add_argument("--delta", type=float, default=0.0, help="violation allowance for the report")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attempts", type=int, default=20)
    p.add_argument("--brute-threshold", type=float, default=DEFAULT_BRUTE_THRESHOLD)
    p.add_argument("--x-file", help="use an externally solved LP (name value lines)")
    p.add_argument("--trace", help="write the rounding trace as JSON lines")
    p.add_argument("-o", "--output", help="also write the matching as 'u v' lines")

    p = sub.add_parser("gen", help="generate an instance")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--er", action="store_true", help="Erdos-Renyi G(n, p)")
    kind.add_argument("--star", action="store_true", help="two-colored star fixture")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--wmin", type=float, default=1.0)
    p.add_argument("--wmax", type=float, default=2.0)
    p.add_argument("--bipartite", action="store_true")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x-out", help="star only: write the fractional solution")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("lp-export", help="write LP-Fair in CPLEX LP format")
    p.add_argument("graph")
    _add_spec_flags(p)
    p.add_argument("--perturb", type=float, default=None, help="tighten beta to (1 - eps) beta")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("verify", help="check a matching file against fairness bounds")
    p.add_argument("graph")
    p.add_argument("matching")
    _add_spec_flags(p)
    p.add_argument("--delta", type=float, default=0.0)

    p = sub.add_parser("bench", help="run an experiment sweep")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("summarize", help="aggregate a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--group-by", default="algorithm,n")
    p.add_argument("-o", "--output")
    return parser


def _matching_json(graph, matching) -> dict:
    return {
        "edges": [list(uv) for uv in matching.pairs(graph)],
        "size": matching.size,
        "per_color_count": list(matching.per_color_count),
        "weight": matching.total_weight,
    }


def cmd_solve(args) -> int:
    graph = read_graph(_existing(args.graph))
    spec = _spec(args)
    seed = args.seed
    out = {"mode": args.mode, "seed": seed}
    x = None
    if args.mode == "two-sided":
        lp = build_lp_fair(graph, spec)
        fm = read_solution(lp, _existing(args.x_file)) if args.x_file else solve(lp)
        out["lp_objective"] = fm.objective_value
        if graph.num_edges and fm.mass <= 1e-9:
            out["error"] = "no nonzero fractional balanced matching"
            print(json.dumps(out, indent=2))
            return EXIT_INFEASIBLE
        matching, trace = round_ocrs(graph, fm.x, None, seed)
        if args.trace:
            trace.dump(graph, args.trace)
        x = fm.x
    elif args.mode == "exact-beta":
        beta = spec.beta if not spec.per_color else list(spec.beta)
        res = solve_beta_fair(graph, beta, args.epsilon, args.attempts, seed, args.brute_threshold)
        matching = res.matching
        out.update(lp_objective=res.lp_objective, satisfied_beta=res.satisfied_beta,
                   attempts=res.attempts, method=res.method)
    elif args.mode == "brute":
        matching = brute_force_opt(graph, spec)
        if matching is None:
            out["error"] = "no balanced matching exists"
            print(json.dumps(out, indent=2))
            return EXIT_INFEASIBLE
    else:
        matching = peel_matching(graph, spec)
        out["balanced"] = is_balanced(matching, spec)
    out["matching"] = _matching_json(graph, matching)
    out["report"] = check_delta_fair(matching, spec, args.delta, graph, x).to_dict()
    if args.output:
        write_matching(graph, matching, args.output)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seed
    if args.star:
        graph, x = generate_star_fixture(args.n, args.epsilon)
        if args.x_out:
            from .lp import FractionalMatching, build_matching_lp

            write_solution(build_matching_lp(graph), FractionalMatching(x, float(x.sum())), args.x_out)
    else:
        graph = generate_erdos_renyi(args.n, args.p, args.ell, (args.wmin, args.wmax), args.bipartite, seed)
    write_graph(graph, args.output)
    print(f"wrote {args.output}: nU={graph.n_u} nV={graph.n_v} m={graph.num_edges} ell={graph.num_colors}")
    return EXIT_OK


def cmd_lp_export(args) -> int:
    graph = read_graph(_existing(args.graph))
    export_lp(build_lp_fair(graph, _spec(args), args.perturb), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    graph = read_graph(_existing(args.graph))
    matching = read_matching(graph, _existing(args.matching))
    report = check_delta_fair(matching, _spec(args), args.delta)
    if report.degenerate:
        print("empty matching: no verdict")
        return EXIT_INFEASIBLE
    for c in report.per_color:
        print(f"color {c.color}: share {c.share:.6g} in [{c.lower:.6g}, {c.upper:.6g}] "
              f"{'PASS' if c.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_INFEASIBLE


def cmd_bench(args) -> int:
    config = bench.ExperimentConfig.from_file(_existing(args.config))
    bench.run_sweep(config, args.output, workers=args.workers)
    return EXIT_OK


def cmd_summarize(args) -> int:
    table = bench.summarize(_existing(args.csv), args.group_by.split(","), args.output)
    if not args.output:
        print(table.to_csv(index=False), end="")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve, "gen": cmd_gen, "lp-export": cmd_lp_export,
    "verify": cmd_verify, "bench": cmd_bench, "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (InfeasibleError, NotBipartiteError) as exc:
        # before ValueError: NotBipartiteError subclasses it
        print(f"fairmatch: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, GraphFormatError, bench.SchemaError, ValueError) as exc:
        print(f"fairmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LpError, WorkLimitExceeded) as exc:
        print(f"fairmatch: solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:  # noqa: BLE001
        print(f"fairmatch: internal error: {exc!r}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
