"""Road network loading, validation and nearest-node lookup.

The map file is a two-section UTF-8 CSV::

    #nodes
    0,35.8712,139.6450
    1,35.8714,139.6461
    #edges
    0,1,102.4
    1,2

The third edge column (length in meters) is optional; when missing it is
computed from the endpoint coordinates with the equirectangular
approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FormatError, ValidationError

EARTH_RADIUS_M = 6_371_008.8
DEFAULT_CELL_DIVISOR = 32
# cell size used when every node shares one coordinate (zero-size bbox)
_DEGENERATE_CELL_DEG = 1e-3


def equirect_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Equirectangular distance in meters between two WGS84 points."""
    x = math.radians(lon2 - lon1) * math.cos(math.radians((lat1 + lat2) / 2.0))
    y = math.radians(lat2 - lat1)
    return EARTH_RADIUS_M * math.hypot(x, y)


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.lat <= 90.0) or not (-180.0 <= self.lon <= 180.0):
            raise ValidationError(f"coordinate out of range: ({self.lat}, {self.lon})")


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


@dataclass
class GridIndex:
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float
    cell_size: float
    n_rows: int
    n_cols: int
    cells: dict[tuple[int, int], list[int]] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        lats: Sequence[float],
        lons: Sequence[float],
        cell_divisor: float = DEFAULT_CELL_DIVISOR,
    ) -> "GridIndex":
        min_lat, max_lat = min(lats), max(lats)
        min_lon, max_lon = min(lons), max(lons)
        diag = math.hypot(max_lat - min_lat, max_lon - min_lon)
        cell = diag / cell_divisor if diag > 0 else _DEGENERATE_CELL_DEG
        index = cls(min_lat, min_lon, max_lat, max_lon, cell, 1, 1)
        n_rows = n_cols = 1
        for node, (lat, lon) in enumerate(zip(lats, lons)):
            rc = index.cell_of(lat, lon)
            index.cells.setdefault(rc, []).append(node)
            n_rows = max(n_rows, rc[0] + 1)
            n_cols = max(n_cols, rc[1] + 1)
        index.n_rows, index.n_cols = n_rows, n_cols
        return index

    def cell_of(self, lat: float, lon: float) -> tuple[int, int]:
        """Unclamped (row, col) of a point; may lie outside the grid."""
        return (
            math.floor((lat - self.min_lat) / self.cell_size),
            math.floor((lon - self.min_lon) / self.cell_size),
        )

    def ring(self, row: int, col: int, r: int) -> Iterable[tuple[int, int]]:
        """Cells at Chebyshev distance exactly ``r`` from (row, col), clipped to the grid."""
        if r == 0:
            if 0 <= row < self.n_rows and 0 <= col < self.n_cols:
                yield (row, col)
            return
        c_lo, c_hi = max(col - r, 0), min(col + r, self.n_cols - 1)
        for rr in (row - r, row + r):
            if 0 <= rr < self.n_rows:
                for cc in range(c_lo, c_hi + 1):
                    yield (rr, cc)
        for rr in range(max(row - r + 1, 0), min(row + r - 1, self.n_rows - 1) + 1):
            if col - r >= 0:
                yield (rr, col - r)
            if col + r < self.n_cols:
                yield (rr, col + r)


class RoadGraph:
    """Undirected weighted road network, immutable after construction."""

    def __init__(
        self,
        coords: Sequence[tuple[float, float]],
        edges: Iterable[tuple[int, int, float | None]],
        cell_divisor: float = DEFAULT_CELL_DIVISOR,
    ) -> None:
        if not coords:
            raise ValidationError("graph has no nodes")
        self.lats = [float(lat) for lat, _ in coords]
        self.lons = [float(lon) for _, lon in coords]
        for lat, lon in zip(self.lats, self.lons):
            GeoPoint(lat, lon)
        n = len(self.lats)

        self.edges: list[Edge] = []
        self._length: dict[tuple[int, int], float] = {}
        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for u, v, length in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) references a missing node")
            if u == v:
                raise ValidationError(f"self-loop on node {u}")
            if length is None:
                length = equirect_m(self.lats[u], self.lons[u], self.lats[v], self.lons[v])
            length = float(length)
            if not length > 0 or not math.isfinite(length):
                raise ValidationError(f"edge ({u}, {v}) has non-positive length {length}")
            edge = Edge(u, v, length)
            if edge.key in self._length:
                raise ValidationError(f"duplicate edge ({u}, {v})")
            self._length[edge.key] = length
            self.edges.append(edge)
            adj[u].append((v, length))
            adj[v].append((u, length))
        for nbrs in adj:
            nbrs.sort()
        self.adjacency: list[tuple[tuple[int, float], ...]] = [tuple(a) for a in adj]
        self.grid = GridIndex.build(self.lats, self.lons, cell_divisor)

    @property
    def node_count(self) -> int:
        return len(self.lats)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def point(self, node: int) -> GeoPoint:
        return GeoPoint(self.lats[node], self.lons[node])

    def neighbors(self, node: int) -> list[int]:
        return [v for v, _ in self.adjacency[node]]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._length

    def edge_length(self, u: int, v: int) -> float:
        return self._length[(u, v) if u < v else (v, u)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoadGraph):
            return NotImplemented
        return (
            self.lats == other.lats
            and self.lons == other.lons
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"RoadGraph(nodes={self.node_count}, edges={self.edge_count})"


def nearest_node(graph: RoadGraph, p: GeoPoint | tuple[float, float]) -> int:
    """Return the node closest to ``p``; ties go to the smallest node id.

    Cells are visited ring by ring around the point's cell. Every node in a
    ring beyond ``r`` is at least ``r`` cell widths away along one axis, which
    gives the stopping bound.
    """
    lat, lon = (p.lat, p.lon) if isinstance(p, GeoPoint) else p
    grid = graph.grid
    qr, qc = grid.cell_of(lat, lon)
    r = max(0, -qr, qr - (grid.n_rows - 1), -qc, qc - (grid.n_cols - 1))
    r_max = max(qr, grid.n_rows - 1 - qr, qc, grid.n_cols - 1 - qc)

    lat_lo, lat_hi = min(lat, grid.min_lat), max(lat, grid.max_lat)
    cos_lo = max(0.0, min(math.cos(math.radians(lat_lo)), math.cos(math.radians(lat_hi))))
    scale = EARTH_RADIUS_M * math.radians(grid.cell_size) * min(1.0, cos_lo) * (1.0 - 1e-9)

    lats, lons, cells = graph.lats, graph.lons, grid.cells
    best_d, best_n = math.inf, -1
    while r <= r_max:
        for cell in grid.ring(qr, qc, r):
            for n in cells.get(cell, ()):
                d = equirect_m(lat, lon, lats[n], lons[n])
                if d < best_d or (d == best_d and n < best_n):
                    best_d, best_n = d, n
        if best_n >= 0 and best_d < r * scale:
            break
        r += 1
    return best_n


def nearest_node_scan(graph: RoadGraph, p: GeoPoint | tuple[float, float]) -> int:
    """Exhaustive nearest-node search; the reference for :func:`nearest_node`."""
    lat, lon = (p.lat, p.lon) if isinstance(p, GeoPoint) else p
    return min(
        range(graph.node_count),
        key=lambda n: (equirect_m(lat, lon, graph.lats[n], graph.lons[n]), n),
    )


def _parse_rows(lines: Iterable[str], source: str):
    section = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line[1:].strip().lower()
            if tag not in ("nodes", "edges"):
                raise FormatError(f"{source}:{lineno}: unknown section {line!r}")
            section = tag
            continue
        if section is None:
            raise FormatError(f"{source}:{lineno}: data before a section header")
        cols = [c.strip() for c in line.split(",")]
        if cols[0] in ("id", "u"):
            continue  # optional column-name row
        yield section, lineno, cols


def parse_graph(text: str, source: str = "<map>", cell_divisor: float = DEFAULT_CELL_DIVISOR) -> RoadGraph:
    nodes: dict[int, tuple[float, float]] = {}
    edges: list[tuple[int, int, float | None]] = []
    for section, lineno, cols in _parse_rows(text.splitlines(), source):
        try:
            if section == "nodes":
                if len(cols) != 3:
                    raise ValueError("expected id,lat,lon")
                node = int(cols[0])
                if node in nodes:
                    raise ValueError(f"duplicate node id {node}")
                nodes[node] = (float(cols[1]), float(cols[2]))
            else:
                if len(cols) not in (2, 3):
                    raise ValueError("expected u,v[,length_m]")
                length = float(cols[2]) if len(cols) == 3 and cols[2] else None
                edges.append((int(cols[0]), int(cols[1]), length))
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
    if sorted(nodes) != list(range(len(nodes))):
        raise ValidationError(f"{source}: node ids must be dense in [0, {len(nodes)})")
    return RoadGraph([nodes[i] for i in range(len(nodes))], edges, cell_divisor)


def load_graph(map_file: str | Path, cell_divisor: float = DEFAULT_CELL_DIVISOR) -> RoadGraph:
    path = Path(map_file)
    return parse_graph(path.read_text(encoding="utf-8"), str(path), cell_divisor)


def format_graph(graph: RoadGraph) -> str:
    lines = ["#nodes"]
    lines += [f"{i},{lat!r},{lon!r}" for i, (lat, lon) in enumerate(zip(graph.lats, graph.lons))]
    lines.append("#edges")
    lines += [f"{e.u},{e.v},{e.length!r}" for e in graph.edges]
    return "\n".join(lines) + "\n"


def save_graph(graph: RoadGraph, map_file: str | Path) -> None:
    Path(map_file).write_text(format_graph(graph), encoding="utf-8")
