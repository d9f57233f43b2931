"""Command-line front end.

One subcommand per engine capability; every run is deterministic given its
flags (all randomness flows from --seed, floats render at fixed precision,
and worker count never changes a numeric result).  Artifacts embed the full
run configuration and the engine version.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, exact, oracle, sampler, stats, switching
from ._parallel import default_workers
from .model import (
    GeneralGraph,
    LabeledMatching,
    MatchingProfile,
    MatchlabError,
    MultipartiteShape,
    profile_of,
)


def parse_shape(text: str) -> MultipartiteShape:
    try:
        return MultipartiteShape(tuple(int(p) for p in text.split(",")))
    except ValueError as err:
        raise MatchlabError(f"bad shape {text!r}: {err}") from None


def parse_profile(text: str) -> MatchingProfile:
    triples = []
    for chunk in text.split(","):
        bits = chunk.split(":")
        if len(bits) != 3:
            raise MatchlabError(f"bad profile entry {chunk!r}, expected i:j:m")
        triples.append(tuple(int(b) for b in bits))
    return MatchingProfile.of(triples)


def parse_lambda(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise MatchlabError(f"bad lambda {text!r}: {err}") from None


def load_graph(path: str) -> GeneralGraph:
    with open(path, encoding="utf-8") as fh:
        return GeneralGraph.from_json_obj(json.load(fh))


def _run_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if not k.startswith("_")}
    cfg.pop("func", None)
    return cfg


class Emitter:
    """Writes byte-deterministic artifacts with the config echoed in."""

    def __init__(self, args: argparse.Namespace):
        self.config = _run_config(args)
        self.formats = [f.strip() for f in (args.format or "json").split(",")]
        for f in self.formats:
            if f not in ("json", "csv"):
                raise MatchlabError(f"unknown format {f!r}")
        self.out = getattr(args, "out", None)

    def _path(self, ext: str) -> Path:
        base = Path(self.out)
        if base.suffix == f".{ext}":
            return base
        if base.suffix in (".json", ".csv"):
            return base.with_suffix(f".{ext}")
        return base.parent / (base.name + f".{ext}")

    def header_obj(self) -> dict:
        return {
            "engine": {"name": "matchlab", "version": __version__},
            "config": self.config,
        }

    def emit(self, result: dict, csv_table: tuple[list[str], list[list[str]]] | None):
        payload = dict(self.header_obj())
        payload["result"] = result
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if self.out is None:
            return
        if "json" in self.formats:
            self._path("json").write_text(text, encoding="utf-8")
        if "csv" in self.formats:
            if csv_table is None:
                raise MatchlabError("this subcommand has no CSV representation")
            columns, rows = csv_table
            buf = io.StringIO()
            buf.write(
                "# "
                + json.dumps(self.header_obj(), sort_keys=True, separators=(",", ":"))
                + "\n"
            )
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
            self._path("csv").write_text(buf.getvalue(), encoding="utf-8")


def _host_and_matching(args, *, need_matching: bool = True):
    """Resolve --shape/--graph plus the deleted matching flags."""
    if getattr(args, "graph", None):
        host = load_graph(args.graph)
        if not need_matching:
            return host, None, None
        if getattr(args, "matching", None):
            pairs = json.loads(args.matching)
            deleted = LabeledMatching.of(((u, 0), (v, 0)) for u, v in pairs)
        else:
            deleted = next(oracle.enumerate_pm(host), None)
            if deleted is None:
                raise MatchlabError("graph has no perfect matching")
        return host, deleted, None
    if not getattr(args, "shape", None):
        raise MatchlabError("need --shape or --graph")
    shape = parse_shape(args.shape)
    if not need_matching:
        return shape, None, None
    if getattr(args, "profile", None):
        profile = parse_profile(args.profile)
    elif getattr(args, "perfect_m", False):
        profile = exact.canonical_perfect_profile(shape)
    else:
        raise MatchlabError("need --perfect-m or --profile to pick a deleted matching")
    return shape, exact.canonical_matching(shape, profile), profile


# ---------------------------------------------------------------- subcommands


def cmd_count(args) -> int:
    shape = parse_shape(args.shape)
    total = exact.pm_total(shape, workers=args.workers)
    if args.force_generic:
        generic = exact.pm_total(shape, force_generic=True, workers=args.workers)
        if generic != total:
            raise AssertionError("fast path and generic enumeration disagree")
    print(total)
    Emitter(args).emit({"pm_total": str(total), "shape": shape.to_json_obj()}, None)
    return 0


def _require_shape(host, profile):
    if not isinstance(host, MultipartiteShape) or profile is None:
        raise MatchlabError("this subcommand needs --shape with --perfect-m/--profile")
    return host, profile


def cmd_strata(args) -> int:
    shape, _, profile = _host_and_matching(args)
    shape, profile = _require_shape(shape, profile)
    table = exact.strata(shape, profile, workers=args.workers)
    if args.force_generic:
        check = exact.strata(shape, profile, force_generic=True, workers=args.workers)
        if check.strata != table.strata:
            raise AssertionError("fast path and generic strata disagree")
    print(list(table.strata))
    rows = [[str(k), str(v)] for k, v in enumerate(table.strata)]
    Emitter(args).emit(table.to_json_obj(), (["k", "count"], rows))
    return 0


def cmd_ratios(args) -> int:
    shape, _, profile = _host_and_matching(args)
    shape, profile = _require_shape(shape, profile)
    table = exact.strata(shape, profile, workers=args.workers)
    rows = exact.ratio_table(table)
    if args.k is not None:
        rows = [row for row in rows if row.k <= args.k]
    csv_rows = []
    for row in rows:
        if row.defined:
            csv_rows.append(
                [
                    str(row.k),
                    str(row.actual.numerator),
                    str(row.actual.denominator),
                    str(row.predicted.numerator),
                    str(row.predicted.denominator),
                    stats.render(Fraction(row.deviation)),
                ]
            )
            print(
                f"k={row.k} actual={row.actual} predicted={row.predicted} "
                f"deviation={stats.render(Fraction(row.deviation))}"
            )
        else:
            csv_rows.append(
                [
                    str(row.k),
                    "",
                    "",
                    str(row.predicted.numerator),
                    str(row.predicted.denominator),
                    "undefined",
                ]
            )
            print(f"k={row.k} undefined (empty lower stratum)")
    result = {
        "rows": [
            {
                "k": row.k,
                "actual": [str(row.actual.numerator), str(row.actual.denominator)]
                if row.defined
                else None,
                "predicted": [
                    str(row.predicted.numerator),
                    str(row.predicted.denominator),
                ],
                "deviation": stats.render(Fraction(row.deviation))
                if row.defined
                else None,
            }
            for row in rows
        ]
    }
    Emitter(args).emit(
        result,
        (
            ["k", "actual_num", "actual_den", "predicted_num", "predicted_den", "deviation"],
            csv_rows,
        ),
    )
    return 0


def cmd_tv(args) -> int:
    shape, _, profile = _host_and_matching(args)
    shape, profile = _require_shape(shape, profile)
    table = exact.strata(shape, profile, workers=args.workers)
    lam = parse_lambda(args.lam) if args.lam else stats.default_lambda(shape.r)
    res = stats.tv_exact(table, lam)
    p0 = stats.to_decimal(table.distribution()[0])
    print(f"p0={stats.render(p0, 9)} tv={stats.render(res.value, 9)} lambda={lam}")
    result = res.to_json_obj()
    result["p0"] = stats.render(p0, 12)
    Emitter(args).emit(result, None)
    return 0


def cmd_converge(args) -> int:
    shapes = [parse_shape(s) for s in args.shapes.split(";") if s]
    rows = stats.convergence_table(shapes, workers=args.workers)
    csv_rows = [row.csv_values(with_timing=args.timings) for row in rows]
    for row in rows:
        print(" ".join(row.csv_values(with_timing=args.timings)))
    result = {
        "rows": [
            dict(zip(stats.CONVERGENCE_CSV_COLUMNS, row.csv_values(with_timing=args.timings)))
            for row in rows
        ]
    }
    Emitter(args).emit(result, (stats.CONVERGENCE_CSV_COLUMNS, csv_rows))
    return 0


def cmd_sample(args) -> int:
    shape, deleted, _ = _host_and_matching(args)
    if not isinstance(shape, MultipartiteShape):
        raise MatchlabError("sampling needs a multipartite shape")
    rng = sampler.make_rng(args.seed)
    columns = (
        ["sample_index", "overlap"]
        + [f"partner_census_{i}" for i in range(shape.r)]
        + [f"block_{i}_{j}" for i, j in shape.pair_types]
    )
    rows = []
    perfect = deleted.is_perfect_on(shape)
    if args.method == "mcmc":
        cfg = sampler.SamplerConfig(
            seed=args.seed,
            sample_count=args.samples,
            burn_in=args.burn_in,
            step_count=args.step_count,
        )
        stream = sampler.mcmc_switch_chain(shape, deleted, cfg)
    else:
        table = sampler.VectorWeightTable(shape)
        stream = (
            sampler.sample_uniform_pm(shape, rng, table) for _ in range(args.samples)
        )
    overlaps = []
    for idx, pm in enumerate(stream):
        x = sampler.overlap_statistic(pm, deleted)
        overlaps.append(x)
        census = (
            sampler.partner_part_census(pm, deleted, shape)
            if perfect
            else ("",) * shape.r
        )
        blocks = sampler.block_census(pm, shape)
        rows.append(
            [str(idx), str(x)]
            + [str(c) for c in census]
            + [str(blocks.get(i, j)) for i, j in shape.pair_types]
        )
    mean = Fraction(sum(overlaps), len(overlaps))
    print(f"samples={len(overlaps)} mean_overlap={stats.render(mean)}")
    result = {
        "samples": len(overlaps),
        "mean_overlap": stats.render(mean, 12),
        "overlap_histogram": _histogram(overlaps),
    }
    Emitter(args).emit(result, (columns, rows))
    return 0


def _histogram(values: list[int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def cmd_audit_switch(args) -> int:
    host, deleted, _ = _host_and_matching(args)
    if args.mode == "auto":
        mode = (
            switching.GoodnessMode.MULTIPARTITE
            if isinstance(host, MultipartiteShape)
            else switching.GoodnessMode.MIN_DEGREE
        )
    else:
        mode = switching.GoodnessMode(args.mode)
    report = switching.handshake_audit(host, deleted, args.k, mode)
    print(
        f"k={report.k} upper_sum={report.upper_degree_sum} "
        f"lower_sum={report.lower_degree_sum} balanced={report.balanced} "
        f"vacuous={report.vacuous}"
    )
    if not report.balanced:
        raise AssertionError("handshake audit failed: degree sums differ")
    Emitter(args).emit(report.to_json_obj(), None)
    return 0


def cmd_audit_edge(args) -> int:
    if args.graph:
        host = load_graph(args.graph)
    elif args.shape:
        host = GeneralGraph.from_shape(parse_shape(args.shape))
    else:
        raise MatchlabError("need --shape or --graph")
    if args.edge:
        u, v = (int(x) for x in args.edge.split(","))
        edge = (u, v)
    else:
        edge = min(host.edges)
    report = switching.edge_switch_audit(host, edge)
    print(
        f"edge={report.edge} Pr={report.probability} "
        f"max_lower_degree={report.max_avoiding_degree} balanced={report.balanced}"
    )
    if report.max_avoiding_degree > 1:
        raise AssertionError("edge-switch audit failed: a lower vertex has degree > 1")
    Emitter(args).emit(report.to_json_obj(), None)
    return 0


def cmd_audit_concentration(args) -> int:
    shape, deleted, _ = _host_and_matching(args)
    rng = sampler.make_rng(args.seed)
    n_part = max(shape.parts)
    censuses: list = []
    if args.census == "block":
        table = sampler.VectorWeightTable(shape)
        for _ in range(args.samples):
            pm = sampler.sample_uniform_pm(shape, rng, table)
            censuses.append(dict(
                ((i, j), m) for i, j, m in sampler.block_census(pm, shape).items()
            ))
        # missing pair types count as zero edges
        for census in censuses:
            for i, j in shape.pair_types:
                census.setdefault((i, j), 0)
        center = Fraction(n_part, shape.r - 1)
        noise_n = n_part
    else:
        for _ in range(args.samples):
            pm = sampler.sample_conditional_overlap(
                shape, deleted, LabeledMatching.empty(), rng
            )
            censuses.append(list(sampler.partner_part_census(pm, deleted, shape)))
        total = shape.total_vertices
        center = Fraction(total, shape.r * (shape.r - 1))
        noise_n = total // 2
    report = stats.concentration_summary(
        censuses, center, noise_n, constant=args.tolerance
    )
    print(
        f"census={args.census} max_normalized_deviation="
        f"{report.max_normalized_deviation:.4f} fraction_within={report.fraction_within:.4f}"
    )
    obj = report.to_json_obj()
    obj["census"] = args.census
    Emitter(args).emit(obj, None)
    return 0


def cmd_census_cells(args) -> int:
    shape = parse_shape(args.shape)
    config = exact.LatticeCellConfig.for_shape(
        shape, n_scale=args.n_scale, c=args.cell_c, d=args.cell_d
    )
    report = exact.lattice_cell_census(
        shape,
        config,
        far_threshold=args.far_threshold,
        require_regime=args.require_regime,
    )
    print(
        f"points={report.total_points} cells={len(report.cells)} "
        f"center={report.center_count} bounded={report.all_cells_bounded} "
        f"regime_ok={report.regime_ok}"
    )
    if not report.all_cells_bounded:
        raise AssertionError("census failed: some cell beats the center region")
    rows = [
        [cell.label(), str(npts), str(w)] for cell, npts, w in report.cells
    ]
    Emitter(args).emit(report.to_json_obj(), (["u", "points", "weight"], rows))
    return 0


def cmd_check_bound(args) -> int:
    results = []
    if args.random:
        rng = sampler.make_rng(args.seed)
        for _ in range(args.random):
            inst = stats.random_bound_instance(rng)
            results.append(stats.factorial_ratio_bound_check(inst))
    else:
        if not (args.x and args.y):
            raise MatchlabError("need --x and --y, or --random N")
        inst = stats.BoundInstance(
            tuple(int(v) for v in args.x.split(",")),
            tuple(int(v) for v in args.y.split(",")),
        )
        results.append(stats.factorial_ratio_bound_check(inst))
    failures = [r for r in results if not r.passed]
    print(f"checked={len(results)} failures={len(failures)}")
    if failures:
        raise AssertionError(
            f"factorial-ratio bound violated on {len(failures)} instances "
            "- this is a build-stopping defect"
        )
    result = {
        "checked": len(results),
        "failures": 0,
        "instances": [r.to_json_obj() for r in results[:100]],
    }
    Emitter(args).emit(result, None)
    return 0


def cmd_oracle(args) -> int:
    host, deleted, _ = (
        _host_and_matching(args)
        if (args.perfect_m or args.profile or args.matching)
        else _host_and_matching(args, need_matching=False)
    )
    report = oracle.oracle_report(
        host, deleted, with_edge_counts=args.edge_counts
    )
    print(f"total={report.total} strata={list(report.table.strata)}")
    Emitter(args).emit(report.to_json_obj(), None)
    return 0


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchlab",
        description="exact and randomized perfect-matching statistics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, shape=False, matching=False, seed=False, out=True):
        if shape:
            p.add_argument("--shape", help="comma-separated part sizes, e.g. 2,2,2")
        if matching:
            p.add_argument("--graph", help="JSON graph file {n, edges}")
            p.add_argument(
                "--perfect-m",
                action="store_true",
                help="use the canonical perfect deleted matching",
            )
            p.add_argument("--profile", help="deleted-matching profile i:j:m,...")
            p.add_argument(
                "--matching", help="explicit matching for --graph as JSON [[u,v],...]"
            )
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", help="artifact path (base name or with extension)")
            p.add_argument("--format", default="json", help="json, csv, or json,csv")
        p.add_argument(
            "--workers",
            type=int,
            default=default_workers(),
            help="worker pool size; never changes numeric output",
        )

    p = sub.add_parser("count", help="number of perfect matchings of a shape")
    common(p, shape=True)
    p.add_argument("--force-generic", action="store_true")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("strata", help="exact overlap strata")
    common(p, shape=True, matching=True)
    p.add_argument("--force-generic", action="store_true")
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("ratios", help="consecutive stratum ratios vs prediction")
    common(p, shape=True, matching=True)
    p.add_argument("--k", type=int, help="largest k to report")
    p.set_defaults(func=cmd_ratios)

    p = sub.add_parser("tv", help="total variation distance to Poisson")
    common(p, shape=True, matching=True)
    p.add_argument("--lambda", dest="lam", help="Poisson parameter as a fraction")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("converge", help="limit table over a list of shapes")
    common(p)
    p.add_argument("--shapes", required=True, help="semicolon-separated shapes")
    p.add_argument(
        "--timings",
        action="store_true",
        help="fill runtime_ms with wall time (breaks byte-determinism)",
    )
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("sample", help="draw matchings and log per-sample statistics")
    common(p, shape=True, matching=True, seed=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--method", choices=["exact", "mcmc"], default="exact")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--step-count", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("audit-switch", help="two-sided stratum handshake audit")
    common(p, shape=True, matching=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument(
        "--mode", choices=["auto", "min_degree", "multipartite"], default="auto"
    )
    p.set_defaults(func=cmd_audit_switch)

    p = sub.add_parser("audit-edge", help="single-edge switch audit")
    common(p, shape=True)
    p.add_argument("--graph", help="JSON graph file {n, edges}")
    p.add_argument("--edge", help="edge as u,v (default: first edge)")
    p.set_defaults(func=cmd_audit_edge)

    p = sub.add_parser(
        "audit-concentration", help="census concentration around predicted centers"
    )
    common(p, shape=True, matching=True, seed=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--census", choices=["block", "partner"], default="block")
    p.add_argument(
        "--tolerance",
        type=float,
        default=4.0,
        help="allowed deviation in units of sqrt(n log n)",
    )
    p.set_defaults(func=cmd_audit_concentration)

    p = sub.add_parser("census-cells", help="cube partition of the lattice points")
    common(p, shape=True)
    p.add_argument("--n-scale", type=int)
    p.add_argument("--cell-c", type=int)
    p.add_argument("--cell-d", type=int)
    p.add_argument("--far-threshold", type=int, default=4)
    p.add_argument("--require-regime", action="store_true")
    p.set_defaults(func=cmd_census_cells)

    p = sub.add_parser("check-bound", help="factorial-ratio bound checker")
    common(p, seed=True)
    p.add_argument("--x", help="nonincreasing integers, comma-separated")
    p.add_argument("--y", help="nonincreasing integers, comma-separated")
    p.add_argument("--random", type=int, help="check N random valid instances")
    p.set_defaults(func=cmd_check_bound)

    p = sub.add_parser("oracle", help="brute-force report for a small host")
    common(p, shape=True, matching=True)
    p.add_argument("--edge-counts", action="store_true")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MatchlabError as err:
        print(f"matchlab: error: {err}", file=sys.stderr)
        return 1
    except AssertionError as err:
        print(f"matchlab: audit failure: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"matchlab: io error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
