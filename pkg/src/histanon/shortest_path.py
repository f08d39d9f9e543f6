from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

from .road_graph import RoadGraph


@dataclass(frozen=True)
class Path:
    """A node sequence through the graph.

    ``length`` is in meters; it is ``None`` for paths recovered from the
    history log, which carries no geometry.
    """

    nodes: tuple[int, ...]
    length: Optional[float] = 0.0

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    def segments(self) -> list[tuple[int, int]]:
        """Canonical (min, max) keys of consecutive node pairs, in path order."""
        n = self.nodes
        return [(a, b) if a < b else (b, a) for a, b in zip(n, n[1:])]


def dijkstra(graph: RoadGraph, s: int, t: int) -> Optional[Path]:
    """Minimum-length path from ``s`` to ``t``, or ``None`` if disconnected.

    Equal-length alternatives resolve toward the smallest predecessor id, so
    the result is identical across runs and platforms. Stale heap entries
    are skipped once a node is settled.
    """
    n = graph.node_count
    if not (0 <= s < n and 0 <= t < n):
        raise IndexError(f"node id out of range: {s}, {t}")
    if s == t:
        return Path((s,), 0.0)

    dist = [math.inf] * n
    pred = [-1] * n
    settled = [False] * n
    dist[s] = 0.0
    heap = [(0.0, s)]
    adjacency = graph.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        if u == t:
            break
        for v, w in adjacency[u]:
            if settled[v]:
                continue
            nd = d + w
            if nd < dist[v] or (nd == dist[v] and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    if not settled[t]:
        return None

    nodes = [t]
    while nodes[-1] != s:
        nodes.append(pred[nodes[-1]])
    nodes.reverse()
    return Path(tuple(nodes), dist[t])


def shortest_hop_count(graph: RoadGraph, s: int, t: int) -> Optional[int]:
    """Hop count of :func:`dijkstra`'s path; ``None`` iff disconnected."""
    path = dijkstra(graph, s, t)
    return None if path is None else path.hops
