from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from histanon.history import build_history_log  # noqa: E402
from histanon.road_graph import RoadGraph  # noqa: E402
from histanon.synth import synth_city  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def line_graph(n: int, spacing: float = 0.001) -> RoadGraph:
    """Nodes 0..n-1 on a parallel, consecutive ones joined."""
    coords = [(35.0, 139.0 + i * spacing) for i in range(n)]
    return RoadGraph(coords, [(i, i + 1, None) for i in range(n - 1)])


def unit_grid(n: int) -> RoadGraph:
    coords = [(35.0 + r * 0.001, 139.0 + c * 0.001) for r in range(n) for c in range(n)]
    edges = []
    for r in range(n):
        for c in range(n):
            i = r * n + c
            if c + 1 < n:
                edges.append((i, i + 1, 1.0))
            if r + 1 < n:
                edges.append((i, i + n, 1.0))
    return RoadGraph(coords, edges)


@pytest.fixture
def abc_graph() -> RoadGraph:
    """A(0) - B(1) - C(2)."""
    return line_graph(3)


@pytest.fixture(scope="session")
def small_city():
    city = synth_city(5, grid=12, users=120, samples=4)
    return city, build_history_log(city.graph, city.history_records)
