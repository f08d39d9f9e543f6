"""Software throughput measurement and history-size sweeps."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .anonymizer import SegmentCounter, pair_records, process_record_pair
from .history import HistoryLog
from .metrics import HwModelParams, hw_throughput
from .records import LocationRecord
from .road_graph import RoadGraph


@dataclass(frozen=True)
class Throughput:
    pairs: int
    records: int
    seconds: list[float]

    @property
    def median_pairs_per_sec(self) -> float:
        return self.pairs / statistics.median(self.seconds)

    @property
    def min_pairs_per_sec(self) -> float:
        return self.pairs / max(self.seconds)

    @property
    def median_records_per_sec(self) -> float:
        return self.records / statistics.median(self.seconds)


def resize_log(log: HistoryLog, size: int) -> HistoryLog:
    """Truncate ``log`` to ``size`` entries, or tile it with fresh run ids."""
    if size < 0:
        raise ValueError("size must be non-negative")
    if size <= len(log):
        return HistoryLog(log.nodes[:size], log.runs[:size])
    if not len(log):
        raise ValueError("cannot extend an empty history log")
    copies = -(-size // len(log))
    stride = int(log.runs.max()) + 1
    nodes = np.tile(log.nodes, copies)[:size]
    runs = (np.tile(log.runs.astype(np.int64), copies)
            + np.repeat(np.arange(copies, dtype=np.int64) * stride, len(log)))[:size]
    return HistoryLog(nodes, runs)


def measure_sw_throughput(
    graph: RoadGraph,
    records: Sequence[LocationRecord],
    log: Optional[HistoryLog] = None,
    repetitions: int = 3,
    delta_h: int = 5,
    filter_enabled: bool = True,
) -> Throughput:
    """Wall-clock the full per-pair pipeline ``repetitions`` times.

    Node approximation and pairing are included; each repetition starts
    from a cold shortest-path cache.
    """
    log = log if log is not None else HistoryLog()
    seconds = []
    n_pairs = 0
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        pairs = pair_records(graph, records)
        counter = SegmentCounter()
        cache: dict = {}
        for p in pairs:
            process_record_pair(graph, log, counter, p, delta_h, filter_enabled, cache)
        seconds.append(time.perf_counter() - t0)
        n_pairs = len(pairs)
    return Throughput(n_pairs, len(records), seconds)


@dataclass(frozen=True)
class BenchRow:
    history_size: int
    model_records_per_sec: float
    measured_records_per_sec: float


def bench_sweep(
    graph: RoadGraph,
    records: Sequence[LocationRecord],
    base_log: HistoryLog,
    history_sizes: Iterable[int],
    repetitions: int = 3,
    params: HwModelParams = HwModelParams(),
) -> list[BenchRow]:
    rows = []
    for size in history_sizes:
        log = resize_log(base_log, size)
        measured = measure_sw_throughput(graph, records, log, repetitions)
        rows.append(BenchRow(size, hw_throughput(params, size), measured.median_records_per_sec))
    return rows


def bench_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["history_size", "records_per_sec", "measured_records_per_sec"])
    for r in rows:
        writer.writerow([r.history_size, f"{r.model_records_per_sec:.2f}", f"{r.measured_records_per_sec:.2f}"])
    return buf.getvalue()
