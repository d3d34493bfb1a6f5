"""Deterministic CSV/JSON artifact writers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

JSON_DIGITS = 12


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        # fixed significant digits keep artifacts byte-stable across kernel backends
        return float(f"{x:.{JSON_DIGITS}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_csv(path, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    return path


def demand_rows(points, fmt="{:.4f}"):
    from .ingest import format_timestamp

    rows = [["timestamp", "U", "U_star"]]
    rows += [[format_timestamp(p.timestamp), fmt.format(p.utilization), fmt.format(p.effective_demand)]
             for p in points]
    return rows


def peak_rows(peaks, fmt="{:.4f}"):
    return [["week", "peak_demand"]] + [[str(p.week), fmt.format(p.peak_demand)] for p in peaks]


def read_peaks(path):
    from .demand import WeeklyPeak

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"week", "peak_demand"} <= set(reader.fieldnames):
            from .errors import StructuralError
            raise StructuralError(f"{path}: expected columns week, peak_demand")
        return [WeeklyPeak(int(r["week"]), float(r["peak_demand"])) for r in reader]
