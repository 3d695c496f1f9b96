"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 infeasible or invalid configuration,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import experiments as ex
from .multiplicity import STATS, analyze, free_orbit_classes, identical_classes, rooted_orbit_classes
from .offspring import InvalidDistribution, parse_family
from .sampler import (AttemptBudgetExceeded, InfeasibleSize, RandomSource, sample_conditioned)
from .tree import InvalidDegreeSequence, format_tree, parse_trees, to_free

EXIT_USAGE, EXIT_CONFIG, EXIT_IO = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sample(args) -> int:
    d = parse_family(args.family)
    master = RandomSource(args.seed)
    lines = []
    for i in range(args.count):
        t = sample_conditioned(d, args.size, master.derive(i), method=args.method)
        lines.append(format_tree(t) + "\n")
    _emit("".join(lines), args.output)
    return 0


def cmd_analyze(args) -> int:
    stats = [s.strip() for s in args.stats.split(",") if s.strip()]
    bad = set(stats) - set(STATS)
    if bad:
        print(f"analyze: unknown statistics {sorted(bad)}; choose from {','.join(STATS)}",
              file=sys.stderr)
        return EXIT_USAGE
    with open(args.input, encoding="utf-8") as fh:
        trees = parse_trees(fh.read())
    out = []
    for t in trees:
        record = analyze(t, stats, with_aut=not args.no_aut).as_dict()
        if "aut_order" in record:
            record["aut_order"] = str(record["aut_order"])  # may exceed JSON number range
        out.append(json.dumps(record) + "\n")
    _emit("".join(out), args.output)
    return 0


def cmd_constants(args) -> int:
    row = ex.constants(args.family)
    if args.format == "json":
        _emit(json.dumps(row, indent=2, ensure_ascii=False) + "\n", None)
    else:
        width = max(map(len, row))
        _emit("".join(f"{k.ljust(width)}  {v}\n" for k, v in row.items()), None)
    return 0


TABLE1_COLUMNS = ["family", "gamma", "gamma_exact", "H2", "H2_exact", "lower_bound", "upper_bound"]


def cmd_table1(args) -> int:
    families = args.families.split(",") if args.families else ex.TABLE1_FAMILIES
    rows = ex.table1(families)
    if args.format == "csv":
        text = ex.rows_to_csv(rows)
    elif args.format == "json":
        text = ex.rows_to_json(rows)
    else:
        text = ex.format_table(rows, TABLE1_COLUMNS)
    _emit(text, args.output)
    return 0


def cmd_experiment(args) -> int:
    cfg = ex.ExperimentConfig.from_file(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.output is not None:
        cfg.output = args.output
    result = ex.run_experiment(cfg)
    if not cfg.output:
        _emit(ex.render(result, cfg.format), None)
    print(f"experiment {cfg.digest()}: {len(result.rows)} rows in {result.runtime_seconds:.1f}s",
          file=sys.stderr)
    return 0


def cmd_leafdeg(args) -> int:
    rows = ex.leaf_degree_experiment(args.family, args.sizes, args.trials, args.depth,
                                     args.seed, args.workers)
    text = ex.rows_to_json(rows) if args.format == "json" else ex.rows_to_csv(rows)
    _emit(text, args.output)
    return 0


def cmd_oracle(args) -> int:
    from . import oracle

    with open(args.input, encoding="utf-8") as fh:
        trees = parse_trees(fh.read())
    for t in trees:
        record = {"degrees": list(t.degrees)}
        pairs = [("identical", identical_classes, oracle.identical_classes_bruteforce, t)]
        if t.n <= oracle.MAX_ROOTED:
            pairs.append(("rooted", rooted_orbit_classes, oracle.rooted_orbits_bruteforce, t))
        if t.n <= oracle.MAX_FREE:
            f = to_free(t)
            pairs.append(("free", free_orbit_classes, oracle.free_orbits_bruteforce, f))
        for name, fast, slow, arg in pairs:
            a, b = fast(arg), slow(arg)
            record[name] = {"sizes": a.multiplicities(), "agree": a.blocks() == b.blocks()}
        print(json.dumps(record))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treemult", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("sample", help="sample conditioned BGW trees")
    s.add_argument("--family", required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--method", choices=("counts", "sequence"), default="counts")
    s.add_argument("--output")
    s.set_defaults(func=cmd_sample)

    a = sub.add_parser("analyze", help="multiplicity statistics for trees in a file")
    a.add_argument("--input", required=True)
    a.add_argument("--stats", default=",".join(STATS))
    a.add_argument("--no-aut", action="store_true", help="skip |Aut| of the free tree")
    a.add_argument("--output")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("constants", help="bound constants for one family")
    c.add_argument("--family", required=True)
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_constants)

    t = sub.add_parser("table1", help="constants table for the standard families")
    t.add_argument("--families", help="comma-separated family list")
    t.add_argument("--format", choices=("text", "csv", "json"), default="text")
    t.add_argument("--output")
    t.set_defaults(func=cmd_table1)

    e = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    e.add_argument("--config", required=True)
    e.add_argument("--workers", type=int)
    e.add_argument("--output")
    e.set_defaults(func=cmd_experiment)

    ld = sub.add_parser("leafdeg", help="maximal leaf-degree observations")
    ld.add_argument("--family", required=True)
    ld.add_argument("--sizes", type=_int_list, required=True)
    ld.add_argument("--trials", type=int, default=20)
    ld.add_argument("--seed", type=int, default=0)
    ld.add_argument("--depth", default="cuberoot", help="'cuberoot' or a fixed depth")
    ld.add_argument("--workers", type=int, default=1)
    ld.add_argument("--format", choices=("csv", "json"), default="csv")
    ld.add_argument("--output")
    ld.set_defaults(func=cmd_leafdeg)

    o = sub.add_parser("oracle")
    o.add_argument("--input", required=True)
    o.set_defaults(func=cmd_oracle)
    sub._choices_actions.pop()  # debugging aid: keep it out of --help
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleSize, InvalidDistribution, ex.ConfigError, AttemptBudgetExceeded) as exc:
        print(f"treemult {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidDegreeSequence as exc:
        print(f"treemult {args.command}: invalid tree: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"treemult {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"treemult {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
