"""Seeded synthetic city: jittered grid, arterial corridors, two periods of users.

History-period users drive between hotspots preferring arterial roads and
are sampled at every turn of their route, so gap filling recovers the
arterial route. Current-period users make the same kind of trips but are
sampled only at the hotspots they visit, leaving the route between samples
to be inferred.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from .records import LocationRecord, format_records
from .road_graph import GeoPoint, RoadGraph, format_graph
from .shortest_path import dijkstra

ORIGIN = (35.8790, 139.6480)
HISTORY_T0 = 1_700_000_000 + 9 * 3600
CURRENT_T0 = HISTORY_T0 + 3600


@dataclass
class SynthParams:
    grid: int = 20
    arterial_fraction: float = 0.2
    users: int = 500
    samples: int = 4
    spacing_m: float = 100.0
    jitter: float = 0.15
    arterial_discount: float = 0.5
    gps_noise_m: float = 8.0
    circuitous_fraction: float = 0.0
    history_samples: int | None = None
    history_users: int | None = None
    hotspot_band: int = 1
    loop_depth: int = 3


@dataclass
class SynthCity:
    graph: RoadGraph
    records: list[LocationRecord]
    history_records: list[LocationRecord]
    arterial_edges: set[tuple[int, int]] = field(default_factory=set)
    hotspots: list[int] = field(default_factory=list)


def lattice_edges(n: int) -> list[tuple[int, int]]:
    edges = []
    for r in range(n):
        for c in range(n):
            i = r * n + c
            if c + 1 < n:
                edges.append((i, i + 1))
            if r + 1 < n:
                edges.append((i, i + n))
    return edges


def arterial_lines(n: int, fraction: float) -> list[int]:
    """Evenly spaced row/column indices that carry arterial roads."""
    count = int(round(fraction * n))
    if fraction > 0:
        count = max(count, 1)
    return sorted({int((i + 0.5) * n / count) for i in range(count)}) if count else []


def _turn_points(nodes: tuple[int, ...], n: int) -> list[int]:
    """Endpoints plus every node where the route changes direction."""
    keep = [nodes[0]]
    for prev, cur, nxt in zip(nodes, nodes[1:], nodes[2:]):
        if (cur - prev) != (nxt - cur):
            keep.append(cur)
    if len(nodes) > 1:
        keep.append(nodes[-1])
    return keep


def _with_loop(nodes: tuple[int, ...], n: int, depth: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Replace one hop of a route by a loop ``depth`` blocks to the side.

    The loop adds ``2 * depth`` hops. Returns the route unchanged when no
    hop has room for a loop inside the grid.
    """
    options = []
    for i, (a, b) in enumerate(zip(nodes, nodes[1:])):
        sides = ((1, 0), (-1, 0)) if abs(b - a) == 1 else ((0, 1), (0, -1))
        for dr, dc in sides:
            if all(
                0 <= x // n + dr * depth < n and 0 <= x % n + dc * depth < n
                for x in (a, b)
            ):
                options.append((i, dr * n + dc))
    if not options:
        return nodes
    i, offset = options[int(rng.integers(len(options)))]
    a, b = nodes[i], nodes[i + 1]
    loop = [a + offset * d for d in range(1, depth + 1)]
    loop += [b + offset * d for d in range(depth, 0, -1)]
    return nodes[: i + 1] + tuple(loop) + nodes[i + 1 :]


def synth_city(seed: int, params: SynthParams | None = None, **overrides) -> SynthCity:
    p = params or SynthParams()
    if overrides:
        p = SynthParams(**{**p.__dict__, **overrides})
    rng = np.random.default_rng(seed)
    n = p.grid
    lat0, lon0 = ORIGIN
    dlat = math.degrees(p.spacing_m / 6_371_008.8)
    dlon = dlat / math.cos(math.radians(lat0))

    jit = rng.uniform(-p.jitter, p.jitter, size=(n * n, 2))
    coords = [
        (
            round(lat0 + (r + float(jit[r * n + c, 0])) * dlat, 7),
            round(lon0 + (c + float(jit[r * n + c, 1])) * dlon, 7),
        )
        for r in range(n)
        for c in range(n)
    ]
    edges = lattice_edges(n)
    graph = RoadGraph(coords, [(u, v, None) for u, v in edges])

    lines = arterial_lines(n, p.arterial_fraction)
    line_set = set(lines)
    arterial = set()
    for u, v in edges:
        ru, cu, rv, cv = u // n, u % n, v // n, v % n
        if (ru == rv and ru in line_set) or (cu == cv and cu in line_set):
            arterial.add((u, v))
    preferred = RoadGraph(
        coords,
        [(e.u, e.v, e.length * (p.arterial_discount if e.key in arterial else 1.0)) for e in graph.edges],
    )

    if lines:
        band = p.hotspot_band
        pool = [i for i in range(n * n) if min(abs(i // n - l) for l in lines) <= band
                or min(abs(i % n - l) for l in lines) <= band]
    else:
        pool = list(range(n * n))
    n_hot = max(2, min(len(pool), (n * n) // 8))
    hotspots = sorted(rng.choice(pool, size=n_hot, replace=False).tolist())

    route_cache: dict[tuple[int, int], tuple[int, ...]] = {}

    def route(a: int, b: int) -> tuple[int, ...]:
        if (a, b) not in route_cache:
            route_cache[(a, b)] = dijkstra(preferred, a, b).nodes
        return route_cache[(a, b)]

    def visits(count: int) -> list[int]:
        seq = [int(rng.choice(hotspots))]
        while len(seq) < count:
            nxt = int(rng.choice(hotspots))
            if nxt != seq[-1]:
                seq.append(nxt)
        return seq

    def noisy(node: int) -> GeoPoint:
        dy, dx = rng.uniform(-p.gps_noise_m, p.gps_noise_m, size=2) / p.spacing_m
        return GeoPoint(round(coords[node][0] + float(dy) * dlat, 7), round(coords[node][1] + float(dx) * dlon, 7))

    history: list[LocationRecord] = []
    h_samples = p.samples if p.history_samples is None else p.history_samples
    h_users = p.users if p.history_users is None else p.history_users
    for user in range(h_users):
        seq = visits(h_samples)
        waypoints = [seq[0]]
        if len(seq) >= 2 and rng.random() < p.circuitous_fraction:
            # first leg circles a block off its route
            leg = _with_loop(route(seq[0], seq[1]), n, p.loop_depth, rng)
            waypoints += _turn_points(leg, n)[1:]
            seq = seq[1:]
        t = HISTORY_T0 + float(rng.integers(0, 3000))
        for a, b in zip(seq, seq[1:]):
            waypoints += _turn_points(route(a, b), n)[1:]
        for node in waypoints:
            history.append(LocationRecord(user, noisy(node), t))
            t += 20.0

    current: list[LocationRecord] = []
    for user in range(p.users):
        t = CURRENT_T0 + float(rng.integers(0, 3000))
        for node in visits(p.samples) if p.samples else []:
            current.append(LocationRecord(user, noisy(node), t))
            t += 120.0

    return SynthCity(graph, current, history, arterial, hotspots)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_city(city: SynthCity, out_dir: str | FsPath) -> dict:
    """Write map/records/history/arterial files and return a manifest."""
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    texts = {
        "map.csv": format_graph(city.graph),
        "records.csv": format_records(city.records),
        "history_records.csv": format_records(city.history_records),
        "arterials.csv": "u,v\n" + "".join(f"{u},{v}\n" for u, v in sorted(city.arterial_edges)),
    }
    for name, text in texts.items():
        (out / name).write_text(text, encoding="utf-8")
    return {
        "nodes": city.graph.node_count,
        "edges": city.graph.edge_count,
        "records": len(city.records),
        "history_records": len(city.history_records),
        "arterial_edges": len(city.arterial_edges),
        "files": {name: _sha256(text) for name, text in texts.items()},
    }


def read_arterials(path: str | FsPath) -> set[tuple[int, int]]:
    out = set()
    for line in FsPath(path).read_text(encoding="utf-8").splitlines()[1:]:
        if line.strip():
            u, v = (int(x) for x in line.split(","))
            out.add((min(u, v), max(u, v)))
    return out
