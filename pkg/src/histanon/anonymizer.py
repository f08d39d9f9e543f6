"""Record pairing, candidate selection and weighted segment counting."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path as FsPath
from typing import Iterable, Optional, Sequence

from .fixedpoint import Accum48_16, meets_threshold, reciprocal, to_float, weight_unit
from .history import HistoryLog, build_history_log, history_search, load_history_log
from .records import LocationRecord, group_by_user, read_records
from .road_graph import RoadGraph, load_graph, nearest_node
from .shortest_path import Path, dijkstra

__all__ = [
    "FallbackReason",
    "LocationRecord",
    "PipelineConfig",
    "PipelineOutput",
    "RecordPair",
    "SegmentCounter",
    "SelectionReport",
    "anonymize",
    "pair_records",
    "process_record_pair",
    "publish",
    "run_pipeline",
]

DEFAULT_K_VALUES = (1, 2, 4, 8, 16, 32, 64)
_U64_MAX = (1 << 64) - 1

SegmentKey = tuple[int, int]


@dataclass(frozen=True)
class RecordPair:
    user: int
    s: int
    e: int


class FallbackReason(str, Enum):
    NONE = "none"
    NO_HITS = "no_hits"
    DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class SelectionReport:
    pair: RecordPair
    used_history: bool
    h: int
    fallback_reason: FallbackReason


class SegmentCounter:
    """Segment key -> raw 48.16 accumulator, plus every key ever incremented."""

    def __init__(self) -> None:
        self.table: dict[SegmentKey, int] = {}
        self.seen: set[SegmentKey] = set()

    def add(self, key: SegmentKey, weight_raw: int) -> None:
        self.seen.add(key)
        if weight_raw:
            raw = self.table.get(key, 0) + weight_raw
            if raw > _U64_MAX:
                raise OverflowError(f"segment {key} accumulator overflow")
            self.table[key] = raw

    def merge(self, other: "SegmentCounter") -> None:
        self.seen |= other.seen
        for key, raw in other.table.items():
            self.add(key, raw)

    def value(self, key: SegmentKey) -> Accum48_16:
        return Accum48_16(self.table.get(key, 0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentCounter):
            return NotImplemented
        return self.table == other.table and self.seen == other.seen


def pair_records(graph: RoadGraph, records: Iterable[LocationRecord]) -> list[RecordPair]:
    """Consecutive node-approximated samples per user, users in ascending id.

    Pairs whose two samples land on the same node are dropped.
    """
    pairs = []
    for user, recs in group_by_user(records).items():
        prev = None
        for rec in recs:
            n = nearest_node(graph, rec.point)
            if prev is not None and prev != n:
                pairs.append(RecordPair(user, prev, n))
            prev = n
    return pairs


def process_record_pair(
    graph: RoadGraph,
    log: HistoryLog,
    counter: SegmentCounter,
    pair: RecordPair,
    delta_h: int = 5,
    filter_enabled: bool = True,
    sp_cache: Optional[dict[tuple[int, int], Optional[Path]]] = None,
) -> SelectionReport:
    """Count one record pair's contribution into ``counter``.

    History hits each receive ``1/h`` per segment occurrence; with no hits
    the shortest path receives 1 per segment; a disconnected pair with no
    hits contributes nothing.
    """
    if pair.s == pair.e:
        raise ValueError("record pair endpoints must differ")
    key = (pair.s, pair.e)
    if sp_cache is None:
        sp = dijkstra(graph, pair.s, pair.e)
    else:
        if key not in sp_cache:
            sp_cache[key] = dijkstra(graph, pair.s, pair.e)
        sp = sp_cache[key]

    max_hop = sp.hops + delta_h if (filter_enabled and sp is not None) else None
    hit = history_search(log, pair.s, pair.e, max_hop)

    if hit.h:
        w = reciprocal(hit.h).raw
        for path in hit.paths:
            for seg in path.segments():
                counter.add(seg, w)
        return SelectionReport(pair, True, hit.h, FallbackReason.NONE)
    if sp is None:
        return SelectionReport(pair, False, 0, FallbackReason.DISCONNECTED)
    w = weight_unit().raw
    for seg in sp.segments():
        counter.add(seg, w)
    return SelectionReport(pair, False, 0, FallbackReason.NO_HITS)


def publish(counter: SegmentCounter, k: int) -> list[tuple[SegmentKey, float]]:
    """Segments whose accumulated weight meets ``k``, sorted by key."""
    return [
        (key, to_float(raw))
        for key, raw in sorted(counter.table.items())
        if meets_threshold(raw, k)
    ]


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineConfig:
    map_path: str
    records_path: str
    history_records_path: Optional[str] = None
    history_log_path: Optional[str] = None
    k: int = 1
    delta_h: int = 5
    filter_enabled: bool = True
    use_history: bool = True
    parallel: int = 1
    k_values: tuple[int, ...] = DEFAULT_K_VALUES

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.delta_h < 0:
            raise ValueError("delta_h must be >= 0")
        if self.parallel < 1:
            raise ValueError("parallel must be >= 1")
        if any(k < 1 for k in self.k_values):
            raise ValueError("k values must be >= 1")
        if self.history_records_path and self.history_log_path:
            raise ValueError("give either raw history records or a prebuilt log, not both")


@dataclass
class PipelineOutput:
    k: int
    delta_h: int
    filter_enabled: bool
    history_entries: int
    published: list[tuple[SegmentKey, float]]
    reports: list[SelectionReport]
    counter: SegmentCounter
    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    inputs_digest: str = ""

    def settings(self) -> dict:
        """Everything that defines the run except the hop-filter flag."""
        return {
            "delta_h": self.delta_h,
            "history_entries": self.history_entries,
            "inputs_digest": self.inputs_digest,
        }


# worker-process state for parallel mode
_WORKER: dict = {}


def _init_worker(graph: RoadGraph, log: HistoryLog, delta_h: int, filter_enabled: bool) -> None:
    _WORKER.update(graph=graph, log=log, delta_h=delta_h, filter_enabled=filter_enabled)


def _count_chunk(pairs: Sequence[RecordPair]) -> tuple[list[SelectionReport], SegmentCounter]:
    counter = SegmentCounter()
    cache: dict = {}
    reports = [
        process_record_pair(
            _WORKER["graph"], _WORKER["log"], counter, p,
            _WORKER["delta_h"], _WORKER["filter_enabled"], cache,
        )
        for p in pairs
    ]
    return reports, counter


def anonymize(
    graph: RoadGraph,
    records: Iterable[LocationRecord],
    log: Optional[HistoryLog] = None,
    k: int = 1,
    delta_h: int = 5,
    filter_enabled: bool = True,
    parallel: int = 1,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
) -> PipelineOutput:
    """In-memory pipeline: pair, select, count and publish at ``k``."""
    log = log if log is not None else HistoryLog()
    pairs = pair_records(graph, records)
    if parallel <= 1 or len(pairs) < 2:
        counter = SegmentCounter()
        cache: dict = {}
        reports = [
            process_record_pair(graph, log, counter, p, delta_h, filter_enabled, cache)
            for p in pairs
        ]
    else:
        size = -(-len(pairs) // parallel)
        chunks = [pairs[i:i + size] for i in range(0, len(pairs), size)]
        counter = SegmentCounter()
        reports = []
        with ProcessPoolExecutor(
            max_workers=parallel,
            initializer=_init_worker,
            initargs=(graph, log, delta_h, filter_enabled),
        ) as pool:
            for part_reports, part_counter in pool.map(_count_chunk, chunks):
                reports.extend(part_reports)
                counter.merge(part_counter)
    return PipelineOutput(
        k=k,
        delta_h=delta_h,
        filter_enabled=filter_enabled,
        history_entries=len(log),
        published=publish(counter, k),
        reports=reports,
        counter=counter,
        k_values=tuple(k_values),
    )


def _digest_files(paths: Iterable[Optional[str]]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(b"\0" if p is None else hashlib.sha256(FsPath(p).read_bytes()).digest())
    return h.hexdigest()


def load_history_source(config: PipelineConfig, graph: RoadGraph) -> HistoryLog:
    if not config.use_history:
        return HistoryLog()
    if config.history_log_path:
        return load_history_log(config.history_log_path)
    if config.history_records_path:
        return build_history_log(graph, read_records(config.history_records_path))
    return HistoryLog()


def run_pipeline(config: PipelineConfig) -> PipelineOutput:
    config.validate()
    graph = load_graph(config.map_path)
    records = read_records(config.records_path)
    log = load_history_source(config, graph)
    out = anonymize(
        graph, records, log,
        k=config.k,
        delta_h=config.delta_h,
        filter_enabled=config.filter_enabled,
        parallel=config.parallel,
        k_values=config.k_values,
    )
    out.inputs_digest = _digest_files([config.map_path, config.records_path])
    return out


# ---------------------------------------------------------------- writers

def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def published_csv(published: Iterable[tuple[SegmentKey, float]]) -> str:
    return _csv_text(["node_a", "node_b", "count"], ((a, b, f"{c:.5f}") for (a, b), c in published))


def selection_csv(reports: Iterable[SelectionReport]) -> str:
    return _csv_text(
        ["user", "s", "e", "used_history", "h", "fallback_reason"],
        (
            (r.pair.user, r.pair.s, r.pair.e, int(r.used_history), r.h, r.fallback_reason.value)
            for r in reports
        ),
    )


def counter_csv(counter: SegmentCounter) -> str:
    """Full counter snapshot: raw accumulator for every seen segment."""
    return _csv_text(
        ["node_a", "node_b", "raw"],
        ((a, b, counter.table.get((a, b), 0)) for a, b in sorted(counter.seen)),
    )


def read_counter_csv(path: str | FsPath) -> SegmentCounter:
    counter = SegmentCounter()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            a, b, raw = (int(x) for x in row)
            counter.add((a, b), raw)
    return counter


def published_geojson(published: Iterable[tuple[SegmentKey, float]], graph: RoadGraph) -> str:
    features = [
        {
            "type": "Feature",
            "properties": {"node_a": a, "node_b": b, "count": round(c, 5)},
            "geometry": {
                "type": "LineString",
                "coordinates": [[graph.lons[a], graph.lats[a]], [graph.lons[b], graph.lats[b]]],
            },
        }
        for (a, b), c in published
    ]
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=1) + "\n"


def write_outputs(
    output: PipelineOutput,
    out_dir: str | FsPath,
    graph: Optional[RoadGraph] = None,
    as_json: bool = False,
) -> dict[str, FsPath]:
    """Write the run's CSV artifacts (and optional JSON/GeoJSON mirrors)."""
    from .metrics import retention_csv, retention_curve

    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curve = retention_curve(output, output.k_values) if output.counter.seen else []
    files = {
        "published": (out / "published.csv", published_csv(output.published)),
        "selection": (out / "selection.csv", selection_csv(output.reports)),
        "counter": (out / "counter.csv", counter_csv(output.counter)),
        "retention": (out / "retention.csv", retention_csv(curve)),
        "run": (out / "run.json", json.dumps(
            {
                "k": output.k,
                "k_values": list(output.k_values),
                "filter_enabled": output.filter_enabled,
                **output.settings(),
            },
            indent=1, sort_keys=True,
        ) + "\n"),
    }
    if graph is not None:
        files["geojson"] = (out / "published.geojson", published_geojson(output.published, graph))
    if as_json:
        files["retention_json"] = (
            out / "retention.json",
            json.dumps([asdict(r) for r in curve], indent=1) + "\n",
        )
    for path, text in files.values():
        path.write_text(text, encoding="utf-8")
    return {name: path for name, (path, _) in files.items()}


def load_output(out_dir: str | FsPath) -> PipelineOutput:
    """Rebuild a run's counter-level output from ``run.json`` and ``counter.csv``.

    Selection reports are not reloaded.
    """
    settings = json.loads((FsPath(out_dir) / "run.json").read_text(encoding="utf-8"))
    counter = read_counter_csv(FsPath(out_dir) / "counter.csv")
    return PipelineOutput(
        k=settings["k"],
        delta_h=settings["delta_h"],
        filter_enabled=settings["filter_enabled"],
        history_entries=settings["history_entries"],
        published=publish(counter, settings["k"]),
        reports=[],
        counter=counter,
        k_values=tuple(settings["k_values"]),
        inputs_digest=settings["inputs_digest"],
    )
