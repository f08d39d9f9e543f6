"""Raw location records and their CSV form (``user_id,lat,lon,ts``)."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import FormatError
from .road_graph import GeoPoint

RECORD_HEADER = ["user_id", "lat", "lon", "ts"]


@dataclass(frozen=True)
class LocationRecord:
    user: int
    point: GeoPoint
    ts: float


def group_by_user(records: Iterable[LocationRecord]) -> dict[int, list[LocationRecord]]:
    """Per-user record lists in time order, keyed in ascending user id.

    Records with equal timestamps keep their input order.
    """
    grouped: dict[int, list[LocationRecord]] = defaultdict(list)
    for rec in records:
        grouped[rec.user].append(rec)
    return {u: sorted(grouped[u], key=lambda r: r.ts) for u in sorted(grouped)}


def read_records(path: str | Path) -> list[LocationRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return parse_records(fh, str(path))


def parse_records(fh: Iterable[str], source: str = "<records>") -> list[LocationRecord]:
    reader = csv.reader(fh)
    out = []
    for lineno, row in enumerate(reader, 1):
        if not row or (lineno == 1 and row[0].strip() == "user_id"):
            continue
        try:
            if len(row) != 4:
                raise ValueError("expected user_id,lat,lon,ts")
            user = int(row[0])
            if user < 0:
                raise ValueError("user id must be non-negative")
            ts = float(row[3])
            if ts != ts or ts in (float("inf"), float("-inf")):
                raise ValueError("timestamp must be finite")
            out.append(LocationRecord(user, GeoPoint(float(row[1]), float(row[2])), ts))
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
    return out


def format_records(records: Iterable[LocationRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    for r in records:
        ts = int(r.ts) if float(r.ts).is_integer() else r.ts
        writer.writerow([r.user, f"{r.point.lat:.7f}", f"{r.point.lon:.7f}", ts])
    return buf.getvalue()


def write_records(records: Iterable[LocationRecord], path: str | Path) -> None:
    Path(path).write_text(format_records(records), encoding="utf-8")
