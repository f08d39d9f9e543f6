"""Historical trajectory database and the single-pass history search.

The log is a flat sequence of ``(node, run)`` entries. A run is one
maximal, graph-connected, time-contiguous movement of a single user; runs
are stored contiguously so that a change of run id marks the end of a
movement sequence during tracking.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import FormatError, ValidationError
from .records import LocationRecord, group_by_user
from .road_graph import RoadGraph, nearest_node
from .shortest_path import Path, dijkstra, shortest_hop_count

MAGIC = b"THL1"
_HEADER = struct.Struct("<4sQ")
_ENTRY_DTYPE = np.dtype([("node", "<u4"), ("run", "<u4")])


class HistoryLog:
    """Immutable ``(node, run)`` log backed by two uint32 arrays."""

    def __init__(self, nodes: Sequence[int] | np.ndarray = (), runs: Sequence[int] | np.ndarray = ()) -> None:
        self.nodes = np.ascontiguousarray(nodes, dtype=np.uint32)
        self.runs = np.ascontiguousarray(runs, dtype=np.uint32)
        if self.nodes.shape != self.runs.shape or self.nodes.ndim != 1:
            raise ValidationError("node and run arrays must be 1-D and equally long")
        self.nodes.setflags(write=False)
        self.runs.setflags(write=False)
        # plain lists are much faster than numpy scalars for per-entry access
        self._node_list: list[int] = self.nodes.tolist()
        self._run_list: list[int] = self.runs.tolist()

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[int, int]]) -> "HistoryLog":
        pairs = list(entries)
        return cls([n for n, _ in pairs], [r for _, r in pairs])

    def __len__(self) -> int:
        return len(self._node_list)

    def entries(self) -> list[tuple[int, int]]:
        return list(zip(self._node_list, self._run_list))

    def run_count(self) -> int:
        if not len(self):
            return 0
        return int(np.count_nonzero(self.runs[1:] != self.runs[:-1])) + 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HistoryLog):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(self.runs, other.runs)

    def __repr__(self) -> str:
        return f"HistoryLog(entries={len(self)}, runs={self.run_count()})"

    def check_contiguous(self) -> None:
        """Raise if any run id reappears after a different run."""
        if not len(self):
            return
        starts = np.flatnonzero(np.r_[True, self.runs[1:] != self.runs[:-1]])
        heads = self.runs[starts]
        if np.unique(heads).size != heads.size:
            raise ValidationError("history log has a non-contiguous run")


@dataclass
class HistoryHit:
    paths: list[Path] = field(default_factory=list)

    @property
    def h(self) -> int:
        return len(self.paths)


@dataclass
class ScanStats:
    """Instrumentation for one search: every log entry read, outer scan included."""

    visits: int = 0
    trackings: int = 0


def history_search(
    log: HistoryLog,
    n_s: int,
    n_e: int,
    max_hop: Optional[int] = None,
    stats: Optional[ScanStats] = None,
) -> HistoryHit:
    """Collect every logged sub-path that runs from ``n_s`` to ``n_e``.

    Every entry equal to ``n_s`` starts a tracking which follows the same
    run until the run changes, ``n_s`` reappears, or ``max_hop`` hops have
    been taken; reaching ``n_e`` records the path. ``max_hop=None`` means
    unlimited. Matches are counted in scan order and never deduplicated.

    The outer pass over the whole log is a vectorized comparison; the
    tracking steps are sequential.
    """
    if n_s == n_e:
        raise ValueError("history search needs distinct start and end nodes")
    hit = HistoryHit()
    size = len(log)
    if stats is not None:
        stats.visits += size
    if not size:
        return hit
    nodes, runs = log._node_list, log._run_list
    limit = size if max_hop is None else max_hop
    for i in np.flatnonzero(log.nodes == n_s).tolist():
        if stats is not None:
            stats.trackings += 1
        run = runs[i]
        cur = [n_s]
        c = 0
        j = i + 1
        while j < size:
            if stats is not None:
                stats.visits += 1
            node = nodes[j]
            if runs[j] != run or node == n_s or c >= limit:
                break
            c += 1
            cur.append(node)
            if node == n_e:
                hit.paths.append(Path(tuple(cur), None))
                break
            j += 1
    return hit


def max_hop_for(
    graph: RoadGraph,
    n_s: int,
    n_e: int,
    delta_h: int,
    filter_enabled: bool = True,
) -> Optional[int]:
    """Hop limit for a history search: shortest hop count plus ``delta_h``.

    ``None`` (unlimited) when the filter is off or no path exists.
    """
    if not filter_enabled:
        return None
    sp = shortest_hop_count(graph, n_s, n_e)
    return None if sp is None else sp + delta_h


def build_history_log(graph: RoadGraph, raw: Iterable[LocationRecord]) -> HistoryLog:
    """Turn prior-period samples into gap-filled runs.

    Each user's samples are node-approximated in time order, repeats
    collapsed, and each consecutive pair joined by its shortest path. A
    disconnected pair splits the user's movement into separate runs.
    """
    nodes: list[int] = []
    runs: list[int] = []
    run_id = 0
    cache: dict[tuple[int, int], Optional[Path]] = {}

    def emit(seq: list[int]) -> None:
        nonlocal run_id
        nodes.extend(seq)
        runs.extend([run_id] * len(seq))
        run_id += 1

    for recs in group_by_user(raw).values():
        seq: list[int] = []
        for rec in recs:
            n = nearest_node(graph, rec.point)
            if seq and seq[-1] == n:
                continue
            if not seq:
                seq.append(n)
                continue
            key = (seq[-1], n)
            if key not in cache:
                cache[key] = dijkstra(graph, *key)
            path = cache[key]
            if path is None:
                emit(seq)
                seq = [n]
            else:
                seq.extend(path.nodes[1:])
        if seq:
            emit(seq)
    return HistoryLog(nodes, runs)


def save_history_log(log: HistoryLog, path: str | FsPath) -> None:
    data = np.empty(len(log), dtype=_ENTRY_DTYPE)
    data["node"] = log.nodes
    data["run"] = log.runs
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, len(log)))
        fh.write(data.tobytes())


def load_history_log(path: str | FsPath) -> HistoryLog:
    blob = FsPath(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated history log header")
    magic, count = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + count * _ENTRY_DTYPE.itemsize
    if len(blob) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for {count} entries, found {len(blob)}")
    data = np.frombuffer(blob, dtype=_ENTRY_DTYPE, offset=_HEADER.size, count=count)
    log = HistoryLog(data["node"], data["run"])
    log.check_contiguous()
    return log


def export_history_csv(log: HistoryLog, path: str | FsPath) -> None:
    lines = ["node,run"] + [f"{n},{r}" for n, r in log.entries()]
    FsPath(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_history_csv(path: str | FsPath) -> HistoryLog:
    entries = []
    for lineno, line in enumerate(FsPath(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line == "node,run":
            continue
        try:
            n, r = line.split(",")
            entries.append((int(n), int(r)))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected node,run") from None
    log = HistoryLog.from_entries(entries)
    log.check_contiguous()
    return log
