"""History-aware segment-based trajectory k-anonymization."""

from .anonymizer import (
    PipelineConfig,
    PipelineOutput,
    RecordPair,
    SegmentCounter,
    SelectionReport,
    anonymize,
    pair_records,
    process_record_pair,
    publish,
    run_pipeline,
)
from .fixedpoint import Accum48_16, Weight16_16, accum_add, meets_threshold, reciprocal, weight_unit
from .history import HistoryHit, HistoryLog, build_history_log, history_search, max_hop_for
from .records import LocationRecord
from .road_graph import GeoPoint, RoadGraph, load_graph, nearest_node
from .shortest_path import Path, dijkstra, shortest_hop_count

__version__ = "0.1.0"
