"""
Output formatting: CSV, JSON and console tables
"""
import csv
import json
import math
import os
from dataclasses import asdict, is_dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

from core.config import SCHEMA
from core.models import (
    ComparisonReport,
    DensityGrid,
    DesignSolution,
    LogBase,
    RatioStats,
    RelInfoSummary,
    SdCurve,
    StudyTable,
)

STUDY_COLUMNS = ["id", "n", "n0", "x0", "p0", "unit_cost", "setup_cost", "max_resolvable"]

ESTIMATE_COLUMNS = [
    "id", "n", "n0", "x0", "p0", "n1", "lod_ob", "plugin_ri1", "expected_inverse_ri",
    "sd_inverse_ri", "equivalent_additional_individuals", "stable", "error",
]


def _plain(value: Any) -> Any:
    """Convert numpy scalars, enums, dataclasses and non-finite floats for JSON"""
    if isinstance(value, Enum):
        return value.value
    if is_dataclass(value) and not isinstance(value, type):
        return _plain(asdict(value))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(payload: Dict[str, Any]) -> str:
    """Serialize with the schema tag first"""
    document = {"schema": SCHEMA}
    document.update(_plain(payload))
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def error_json(error: Dict[str, Any]) -> str:
    return json.dumps({"schema": SCHEMA, "error": _plain(error)}, allow_nan=False) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else ""
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])


def write_study_table(table: StudyTable, fp: TextIO) -> None:
    """Write a study table that read_study_table parses back to the same records"""
    rows = [
        {
            "id": r.id, "n": r.cfg.n, "n0": r.cfg.n0, "x0": r.cfg.x0, "p0": r.cfg.p0,
            "unit_cost": r.unit_cost, "setup_cost": r.setup_cost,
            "max_resolvable": r.max_resolvable, "n1": table.requested_n1.get(r.id),
        }
        for r in table.records
    ]
    columns = STUDY_COLUMNS + ["n1"] if table.requested_n1 else STUDY_COLUMNS
    write_csv(rows, columns, fp)


# ============================================================
# ESTIMATE / DESIGN / COMPARE
# ============================================================

def estimate_row(record, summary: Optional[RelInfoSummary], equivalent: Optional[float],
                 base: LogBase, error: Optional[str] = None) -> Dict[str, Any]:
    cfg = record.cfg
    row = {"id": record.id, "n": cfg.n, "n0": cfg.n0, "x0": cfg.x0, "p0": cfg.p0,
           "stable": False, "error": error}
    if summary is not None:
        row.update({
            "n1": summary.n1,
            "lod_ob": summary.lod_ob.to_base(base).value,
            "plugin_ri1": summary.plugin_ri1,
            "expected_inverse_ri": summary.expected_inverse_ri,
            "sd_inverse_ri": summary.sd_inverse_ri,
            "equivalent_additional_individuals": equivalent,
            "stable": summary.stable,
        })
    return row


def solution_payload(solution: DesignSolution, budget: float, mode: str) -> Dict[str, Any]:
    variables = [
        {"id": vid, "n1": n1, "sd_inverse_ri": solution.variability.get(vid)}
        for vid, n1 in solution.allocations.items()
    ]
    return {
        "budget": budget,
        "mode": mode,
        "objective": solution.objective,
        "overall_ri1": 1.0 / solution.objective,
        "budget_used": solution.budget_used,
        "optimal": solution.optimal,
        "allocations": solution.allocations,
        "variables": variables,
        "excluded": solution.excluded,
        "suggests_new_individuals": solution.suggests_new_individuals,
    }


def comparison_row(report: ComparisonReport) -> Dict[str, Any]:
    return _plain(report)


# ============================================================
# SIMULATION OUTPUT
# ============================================================

CONTOUR_COLUMNS = ["x_bin_center", "y_bin_center", "count", "density"]
LINE_COLUMNS = ["r", "x_start", "y_start", "x_end", "y_end"]


def contour_rows(grid: DensityGrid, base: LogBase) -> List[Dict[str, Any]]:
    """One row per cell, x-major"""
    xs = base.from_natural(grid.x_centers)
    ys = base.from_natural(grid.y_centers)
    density = grid.normalized
    rows = []
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            rows.append({"x_bin_center": x, "y_bin_center": y,
                         "count": int(grid.counts[i, j]), "density": density[i, j]})
    return rows


def line_rows(grid: DensityGrid, base: LogBase) -> List[Dict[str, Any]]:
    return [
        {"r": line.r,
         "x_start": base.from_natural(line.x_start), "y_start": base.from_natural(line.y_start),
         "x_end": base.from_natural(line.x_end), "y_end": base.from_natural(line.y_end)}
        for line in grid.reference_lines
    ]


def ratio_stats_payload(stats: RatioStats) -> Dict[str, Any]:
    return {
        "count": stats.count,
        "excluded": stats.excluded,
        "floor": stats.floor,
        "mean": stats.mean,
        "sd": stats.sd,
        "max": stats.max,
        "quantiles": {f"{q:g}": v for q, v in stats.quantiles.items()},
    }


def sd_curve_columns(curve: SdCurve) -> List[str]:
    return ["x0", "sd"] + [f"density_p{p:g}" for p in curve.density_curves]


def sd_curve_rows(curve: SdCurve) -> List[Dict[str, Any]]:
    rows = []
    for row in curve.rows:
        out = {"x0": row.x0, "sd": row.sd_inverse_ri}
        for p, masses in curve.density_curves.items():
            out[f"density_p{p:g}"] = masses[row.x0]
        rows.append(out)
    return rows


# ============================================================
# CONSOLE
# ============================================================

def format_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str], width: int = 12) -> str:
    """Format rows as an ASCII table"""
    def fit(value: Any) -> str:
        if isinstance(value, float):
            text = f"{value:.6g}"
        else:
            text = _cell(value)
        return text[:width]

    rule = "+" + "+".join("-" * width for _ in columns) + "+"
    lines = [rule, "|" + "|".join(f"{c[:width]:<{width}}" for c in columns) + "|", rule]
    for row in rows:
        lines.append("|" + "|".join(f"{fit(row.get(c)):<{width}}" for c in columns) + "|")
    lines.append(rule)
    return "\n".join(lines)


def save_output(text: str, output_dir: str, filename: str) -> str:
    """
    Save text under output_dir

    Returns:
        Path to saved file
    """
    os.makedirs(output_dir, exist_ok=True)
    filepath = os.path.join(output_dir, filename)
    with open(filepath, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return filepath
