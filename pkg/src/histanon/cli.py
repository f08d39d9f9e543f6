"""Command-line entry point: ``histanon {synth,build-history,anonymize,bench,metrics}``.

Exit codes: 0 success, 1 validation or parse error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from .anonymizer import (
    DEFAULT_K_VALUES,
    PipelineConfig,
    load_history_source,
    load_output,
    run_pipeline,
    write_outputs,
)
from .bench import bench_csv, bench_sweep
from .errors import ValidationError
from .history import build_history_log, export_history_csv, save_history_log
from .metrics import (
    HwModelParams,
    hop_filter_csv,
    hop_filter_impact,
    retention_csv,
    retention_curve,
)
from .records import read_records
from .road_graph import load_graph
from .synth import SynthParams, synth_city, write_city

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors are validation errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_synth(args: argparse.Namespace) -> int:
    params = SynthParams(
        grid=args.grid,
        arterial_fraction=args.arterial_fraction,
        users=args.users,
        samples=args.samples,
        history_samples=args.history_samples,
        history_users=args.history_users,
        circuitous_fraction=args.circuitous_fraction,
    )
    city = synth_city(args.seed, params)
    manifest = write_city(city, args.out)
    manifest = {"seed": args.seed, "params": asdict(params), **manifest}
    print(json.dumps(manifest, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_build_history(args: argparse.Namespace) -> int:
    graph = load_graph(args.map)
    log = build_history_log(graph, read_records(args.records))
    save_history_log(log, args.out)
    if args.csv:
        export_history_csv(log, args.csv)
    print(f"entries {len(log)}")
    print(f"runs {log.run_count()}")
    return EXIT_OK


def _config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        map_path=args.map,
        records_path=args.records,
        history_records_path=args.history_records,
        history_log_path=args.history_log,
        k=args.k,
        delta_h=args.delta_h,
        filter_enabled=not args.no_hop_filter,
        use_history=not args.no_history,
        parallel=args.parallel,
        k_values=tuple(args.k_values),
    )


def cmd_anonymize(args: argparse.Namespace) -> int:
    config = _config(args)
    output = run_pipeline(config)
    graph = load_graph(args.map) if args.geojson else None
    files = write_outputs(output, args.out, graph=graph, as_json=args.json)
    used = sum(r.used_history for r in output.reports)
    print(f"pairs {len(output.reports)} history {used} published {len(output.published)} (k={args.k})")
    for path in files.values():
        print(path)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = _config(args)
    config.validate()
    params = HwModelParams(args.f_clk, args.entries_per_cycle, args.overhead_cycles)
    graph = load_graph(config.map_path)
    records = read_records(config.records_path)
    sizes = args.sizes
    log = load_history_source(config, graph) if sizes else None
    rows = bench_sweep(graph, records, log, sizes, args.repetitions, params) if sizes else []
    _emit(bench_csv(rows), args.out)
    if args.json and args.out:
        Path(args.out).with_suffix(".json").write_text(
            json.dumps([asdict(r) for r in rows], indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_metrics_retention(args: argparse.Namespace) -> int:
    output = load_output(args.run)
    curve = retention_curve(output, args.k_values)
    _emit(json.dumps([asdict(r) for r in curve], indent=1) + "\n" if args.json else retention_csv(curve), args.out)
    return EXIT_OK


def cmd_metrics_hop_filter(args: argparse.Namespace) -> int:
    with_f, without_f = load_output(args.with_filter), load_output(args.without_filter)
    if not with_f.filter_enabled or without_f.filter_enabled:
        raise ValidationError("--with must have the hop filter on and --without must have it off")
    rows = hop_filter_impact(with_f, without_f, args.k_values)
    _emit(json.dumps([asdict(r) for r in rows], indent=1) + "\n" if args.json else hop_filter_csv(rows), args.out)
    return EXIT_OK


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", required=True, help="road network CSV")
    p.add_argument("--records", required=True, help="current-period records CSV")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--history-records", help="prior-period raw records CSV")
    src.add_argument("--history-log", help="prebuilt binary history log")
    p.add_argument("--no-history", action="store_true", help="baseline mode: empty history log")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--delta-h", type=int, default=5)
    p.add_argument("--no-hop-filter", action="store_true")
    p.add_argument("--k-values", type=_int_list, default=list(DEFAULT_K_VALUES))
    p.add_argument("--parallel", type=int, default=1, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="histanon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic arterial city")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--arterial-fraction", type=float, default=0.2)
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--history-samples", type=int, default=None)
    p.add_argument("--history-users", type=int, default=None, help="prior-period users (default: --users)")
    p.add_argument("--circuitous-fraction", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-history", help="gap-fill raw records into a history log")
    p.add_argument("--map", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write a node,run debug export")
    p.set_defaults(func=cmd_build_history)

    p = sub.add_parser("anonymize", help="run the anonymization pipeline")
    _add_pipeline_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--geojson", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("bench", help="throughput vs history size")
    _add_pipeline_args(p)
    p.add_argument("--sizes", type=_int_list, default=[])
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--f-clk", type=float, default=HwModelParams.f_clk)
    p.add_argument("--entries-per-cycle", type=int, default=HwModelParams.entries_per_cycle)
    p.add_argument("--overhead-cycles", type=int, default=HwModelParams.overhead_cycles)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("metrics", help="reports over finished runs")
    msub = p.add_subparsers(dest="metric", required=True, parser_class=_Parser)
    m = msub.add_parser("retention")
    m.add_argument("--run", required=True, help="anonymize output directory")
    m.add_argument("--k-values", type=_int_list, default=list(DEFAULT_K_VALUES))
    m.add_argument("--out")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_metrics_retention)
    m = msub.add_parser("hop-filter")
    m.add_argument("--with", dest="with_filter", required=True)
    m.add_argument("--without", dest="without_filter", required=True)
    m.add_argument("--k-values", type=_int_list, default=list(DEFAULT_K_VALUES))
    m.add_argument("--out")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_metrics_hop_filter)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"histanon: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"histanon: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
