"""``prodperc`` command line.

Exit status: 0 when everything passes, 1 when an experiment annotation or a
verify suite fails, 2 on usage and validation errors.

Experiment settings are read from ``--config`` (key=value lines or a JSON
object) and then overridden by any flag given explicitly.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .analysis import (
    AnalysisError,
    gw_survival_binomial,
    medium_component_bound,
    second_component_constant,
    solve_survival,
    subcritical_bound,
)
from .base import ISO_EXACT_LIMIT, GraphError, isoperimetric_exact
from .experiment import ConfigError, audit, build_config, parse_config_text, run_experiment, write_report
from .percolation import PercolationError
from .product import describe, parse_product, product_iso_bounds

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def cmd_graph_info(args) -> int:
    G = parse_product(args.descriptor)
    print(f"descriptor={describe(G.factors)}")
    print(f"t={G.t}")
    print(f"d={G.d}")
    print(f"n={G.n}")
    print(f"alpha={G.alpha:.6f}")
    print("factors=" + " ".join(f"{f.name}(order={f.order},degree={f.degree})" for f in dict.fromkeys(G.factors)))
    if all(f.order <= ISO_EXACT_LIMIT for f in G.factors):
        lo, hi = product_iso_bounds(G)
        print(f"iso_lower={lo}")
        print(f"iso_upper={hi}")
        if G.n <= args.iso_exact_max:
            print(f"iso_exact={isoperimetric_exact(G.materialize()).value}")
    return EXIT_OK


_EXPERIMENT_FLAGS = [
    ("product", str), ("regime", str), ("epsilon", float), ("seeds", str), ("seed_count", int),
    ("seed_base", int), ("census_mode", str), ("k", float), ("threshold", int), ("budget", int),
    ("rounds", str), ("p", float), ("output", str), ("format", str), ("workers", int),
    ("giant_tolerance", float), ("l2_factor", float),
]


def cmd_experiment(args) -> int:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values = parse_config_text(fh.read())
    overrides = {name: getattr(args, name) for name, _ in _EXPERIMENT_FLAGS}
    if args.timing:
        overrides["timing"] = True
    config = build_config(values, overrides)
    report = run_experiment(config)
    text = write_report(report)
    if not config.output:
        sys.stdout.write(text)
    else:
        print(f"wrote {config.output}", file=sys.stderr)
    if args.audit and not audit(report):
        print("audit: aggregates do not match rows", file=sys.stderr)
        return EXIT_FAIL
    print(f"verdict={'pass' if report.passed else 'fail'}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    from .verify import SUITES

    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    status = EXIT_OK
    for name in names:
        res = SUITES[name]()
        for line in res.notes:
            print(f"  {line}")
        for line in res.failures:
            print(f"  counterexample: {line}")
        print(res.summary())
        if not res.passed:
            status = EXIT_FAIL
    return status


def _grid(spec: str) -> list[float]:
    start, stop, step = (float(x) for x in spec.split(":"))
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def cmd_survival(args) -> int:
    eps = list(args.epsilon or [])
    if args.grid:
        eps.extend(_grid(args.grid))
    if not eps:
        raise AnalysisError("give --epsilon or --grid")
    sols = [solve_survival(e) for e in eps]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "y", "residual"])
            for s in sols:
                w.writerow([repr(s.epsilon), repr(s.y), repr(s.residual)])
    for s in sols:
        print(f"epsilon={s.epsilon!r} y={s.y!r} residual={s.residual:.3e}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    G = parse_product(args.descriptor)
    e = args.epsilon
    print(f"n={G.n}")
    print(f"d={G.d}")
    print(f"alpha={G.alpha:.6f}")
    print(f"y={solve_survival(e).y!r}")
    print(f"gw_binomial_survival={gw_survival_binomial(G.d, (1 + e) / G.d)!r}")
    print(f"subcritical_bound={subcritical_bound(G.n, e)!r}")
    print(f"medium_component_bound_r{args.r}={medium_component_bound(e, args.r, G.d)!r}")
    print(f"C1_proof={second_component_constant(e, G.max_factor_order, G.alpha)!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodperc", description="Percolation on Cartesian product graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="inspect a product descriptor")
    gsub = graph.add_subparsers(dest="graph_command", required=True)
    info = gsub.add_parser("info", help="print t, d, n, alpha and isoperimetric bounds")
    info.add_argument("descriptor")
    info.add_argument("--iso-exact-max", type=int, default=20, help="materialise and solve i(G) exactly up to this n")
    info.set_defaults(func=cmd_graph_info)

    exp = sub.add_parser("experiment", help="run replicated percolation censuses")
    exp.add_argument("--config")
    for name, typ in _EXPERIMENT_FLAGS:
        exp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    exp.add_argument("--timing", action="store_true", help="record elapsed_ms (breaks byte-identical reruns)")
    exp.add_argument("--audit", action="store_true", help="recompute aggregates from rows and check them")
    exp.set_defaults(func=cmd_experiment)

    ver = sub.add_parser("verify", help="run a property suite")
    ver.add_argument("suite", choices=["projections", "iso", "oracle", "treecount", "rounds", "all"])
    ver.set_defaults(func=cmd_verify)

    ana = sub.add_parser("analysis", help="analytic reference values")
    asub = ana.add_subparsers(dest="analysis_command", required=True)
    surv = asub.add_parser("survival", help="solve y = 1 - exp(-(1+eps) y)")
    surv.add_argument("--epsilon", type=float, action="append")
    surv.add_argument("--grid", help="start:stop:step")
    surv.add_argument("--csv", help="write epsilon,y,residual rows to this file")
    surv.set_defaults(func=cmd_survival)
    bnd = asub.add_parser("bounds", help="reference bounds for a product at given epsilon")
    bnd.add_argument("descriptor")
    bnd.add_argument("--epsilon", type=float, required=True)
    bnd.add_argument("--r", type=int, default=1)
    bnd.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ConfigError, PercolationError, AnalysisError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
