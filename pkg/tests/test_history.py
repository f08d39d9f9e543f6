from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import line_graph, unit_grid
from oracles import alg1_reference
from histanon.errors import FormatError, ValidationError
from histanon.history import (
    HistoryLog,
    ScanStats,
    build_history_log,
    export_history_csv,
    history_search,
    load_history_log,
    max_hop_for,
    read_history_csv,
    save_history_log,
)
from histanon.records import LocationRecord
from histanon.road_graph import RoadGraph

A, B, C, D = 0, 1, 2, 3


def rec(user, graph, node, ts):
    return LocationRecord(user, graph.point(node), ts)


def node_seqs(hit):
    return [list(p.nodes) for p in hit.paths]


# ---------------------------------------------------------------- search

def test_empty_log():
    hit = history_search(HistoryLog(), A, C, 7)
    assert hit.paths == [] and hit.h == 0


def test_single_route():
    log = HistoryLog.from_entries([(A, 0), (B, 0), (C, 0)])
    hit = history_search(log, A, C, 7)
    assert node_seqs(hit) == [[A, B, C]] and hit.h == 1


def test_revisiting_start_restarts_tracking():
    log = HistoryLog.from_entries([(A, 0), (B, 0), (A, 0), (C, 0)])
    hit = history_search(log, A, C, 7)
    assert node_seqs(hit) == [[A, C]] and hit.h == 1


def test_hop_limit_stops_before_end():
    log = HistoryLog.from_entries([(A, 0), (B, 0), (C, 0)])
    assert history_search(log, A, C, 1).h == 0
    assert history_search(log, A, C, 2).h == 1


def test_run_change_stops_tracking():
    log = HistoryLog.from_entries([(A, 0), (B, 0), (C, 1)])
    assert history_search(log, A, C, None).h == 0


def test_duplicates_are_kept():
    log = HistoryLog.from_entries([(A, 0), (B, 0), (C, 0), (A, 1), (B, 1), (C, 1)])
    hit = history_search(log, A, C, None)
    assert node_seqs(hit) == [[A, B, C], [A, B, C]]


def test_same_start_and_end_rejected():
    with pytest.raises(ValueError):
        history_search(HistoryLog(), A, A, 3)


alphabet = st.integers(0, 5)


@st.composite
def logs(draw, max_size=200):
    """Random logs with contiguous runs; runs may repeat nodes."""
    runs = draw(st.lists(st.lists(alphabet, min_size=1, max_size=25), max_size=12))
    entries = [(n, r) for r, seq in enumerate(runs) for n in seq][:max_size]
    return entries


@settings(max_examples=300, deadline=None)
@given(logs(), alphabet, alphabet, st.one_of(st.none(), st.integers(0, 10)))
def test_agrees_with_reference_interpreter(entries, n_s, n_e, max_hop):
    if n_s == n_e:
        return
    log = HistoryLog.from_entries(entries)
    stats = ScanStats()
    hit = history_search(log, n_s, n_e, max_hop, stats)
    P, h, inner = alg1_reference(entries, n_s, n_e, max_hop)
    assert node_seqs(hit) == P
    assert hit.h == h
    assert stats.visits == len(entries) + inner
    assert stats.visits <= 2 * len(entries)


@settings(max_examples=200, deadline=None)
@given(logs(), alphabet, alphabet, st.integers(1, 10))
def test_path_properties_and_monotone_hop_limit(entries, n_s, n_e, max_hop):
    if n_s == n_e:
        return
    log = HistoryLog.from_entries(entries)
    hit = history_search(log, n_s, n_e, max_hop)
    for p in hit.paths:
        assert p.nodes[0] == n_s and p.nodes[-1] == n_e
        assert p.hops <= max_hop
        assert p.nodes.count(n_s) == 1
    assert history_search(log, n_s, n_e, max_hop + 1).h >= hit.h
    assert history_search(log, n_s, n_e, None).h >= hit.h


def test_each_entry_visited_at_most_twice():
    # every entry is n_s or extends a tracking, the worst case for the scan
    entries = [(A if i % 3 == 0 else B, 0) for i in range(300)]
    stats = ScanStats()
    history_search(HistoryLog.from_entries(entries), A, C, None, stats)
    assert stats.trackings == 100
    assert len(entries) <= stats.visits <= 2 * len(entries)


# ---------------------------------------------------------------- max hop

def test_max_hop_for():
    g = line_graph(6)
    assert max_hop_for(g, 0, 4, 5) == 9
    assert max_hop_for(g, 0, 4, 5, filter_enabled=False) is None
    split = RoadGraph([(35, 139), (35, 139.001), (35, 139.01)], [(0, 1, None)])
    assert max_hop_for(split, 0, 2, 5) is None


# ---------------------------------------------------------------- build

def test_build_adjacent_pair(abc_graph):
    log = build_history_log(abc_graph, [rec(9, abc_graph, A, 0), rec(9, abc_graph, B, 10)])
    assert log.entries() == [(A, 0), (B, 0)]


def test_build_fills_gap(abc_graph):
    log = build_history_log(abc_graph, [rec(9, abc_graph, A, 0), rec(9, abc_graph, C, 10)])
    assert log.entries() == [(A, 0), (B, 0), (C, 0)]


def test_build_collapses_repeats(abc_graph):
    log = build_history_log(abc_graph, [rec(9, abc_graph, A, 0), rec(9, abc_graph, A, 10)])
    assert log.entries() == [(A, 0)]


def test_build_splits_on_disconnection():
    g = RoadGraph([(35, 139), (35, 139.001), (35, 139.01), (35, 139.011)], [(0, 1, None), (2, 3, None)])
    log = build_history_log(g, [rec(1, g, 0, 0), rec(1, g, 1, 1), rec(1, g, 2, 2), rec(1, g, 3, 3)])
    assert log.entries() == [(0, 0), (1, 0), (2, 1), (3, 1)]
    assert log.run_count() == 2


def test_build_orders_users_and_time(abc_graph):
    recs = [
        rec(5, abc_graph, C, 20), rec(2, abc_graph, B, 5), rec(5, abc_graph, A, 10), rec(2, abc_graph, A, 1),
    ]
    log = build_history_log(abc_graph, recs)
    assert log.entries() == [(A, 0), (B, 0), (A, 1), (B, 1), (C, 1)]


def test_build_empty_input(abc_graph):
    assert len(build_history_log(abc_graph, [])) == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 24), st.floats(0, 100)), max_size=40))
def test_build_satisfies_log_invariants(samples):
    g = unit_grid(5)
    log = build_history_log(g, [LocationRecord(u, g.point(n), t) for u, n, t in samples])
    log.check_contiguous()
    entries = log.entries()
    for (n1, r1), (n2, r2) in zip(entries, entries[1:]):
        if r1 == r2:
            assert n1 != n2 and g.has_edge(n1, n2)


# ---------------------------------------------------------------- files

def test_binary_round_trip(tmp_path, small_city):
    _, log = small_city
    save_history_log(log, tmp_path / "h.thl")
    assert load_history_log(tmp_path / "h.thl") == log


def test_empty_round_trip(tmp_path):
    save_history_log(HistoryLog(), tmp_path / "e.thl")
    assert len(load_history_log(tmp_path / "e.thl")) == 0
    assert (tmp_path / "e.thl").read_bytes() == b"THL1" + bytes(8)


def test_binary_layout(tmp_path):
    save_history_log(HistoryLog.from_entries([(7, 0), (8, 0)]), tmp_path / "h.thl")
    blob = (tmp_path / "h.thl").read_bytes()
    assert blob == b"THL1" + (2).to_bytes(8, "little") + bytes([7, 0, 0, 0, 0, 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0])


def test_load_rejects_bad_files(tmp_path):
    (tmp_path / "bad.thl").write_bytes(b"NOPE" + bytes(8))
    with pytest.raises(FormatError):
        load_history_log(tmp_path / "bad.thl")
    (tmp_path / "short.thl").write_bytes(b"THL1" + (3).to_bytes(8, "little") + bytes(8))
    with pytest.raises(FormatError):
        load_history_log(tmp_path / "short.thl")
    save_history_log(HistoryLog.from_entries([(1, 0), (2, 1), (3, 0)]), tmp_path / "nc.thl")
    with pytest.raises(ValidationError, match="non-contiguous"):
        load_history_log(tmp_path / "nc.thl")


def test_csv_export_round_trip(tmp_path, small_city):
    _, log = small_city
    export_history_csv(log, tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == "node,run"
    assert read_history_csv(tmp_path / "h.csv") == log


def test_49k_sample_history_builds_and_reloads(tmp_path):
    """49,083 prior-period samples."""
    from histanon.synth import synth_city

    city = synth_city(21, grid=20, users=4500, samples=4)
    raw = city.history_records[:49_083]
    assert len(raw) == 49_083
    log = build_history_log(city.graph, raw)
    save_history_log(log, tmp_path / "big.thl")
    assert load_history_log(tmp_path / "big.thl") == log
    assert (tmp_path / "big.thl").stat().st_size == 12 + 8 * len(log)


def test_log_is_read_only():
    log = HistoryLog.from_entries([(1, 0)])
    with pytest.raises(ValueError):
        log.nodes[0] = 3


def test_random_logs_match_reference_bulk():
    rng = random.Random(3)
    for _ in range(200):
        entries = []
        for r in range(rng.randint(0, 8)):
            entries += [(rng.randint(0, 6), r) for _ in range(rng.randint(1, 30))]
        n_s, n_e = rng.sample(range(7), 2)
        max_hop = rng.choice([None, 1, 2, 3, 5, 8])
        hit = history_search(HistoryLog.from_entries(entries), n_s, n_e, max_hop)
        P, h, _ = alg1_reference(entries, n_s, n_e, max_hop)
        assert (node_seqs(hit), hit.h) == (P, h)
