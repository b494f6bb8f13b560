"""
Study-table ingestion

CSV columns: id, n, n0, x0, p0, unit_cost, setup_cost, max_resolvable, n1.
The header is required; p0 falls back to the table default, unit_cost to
1.0, setup_cost to 0.0, max_resolvable to n - n0. n1 (an integer or
"full") only matters to the estimate command.
"""
import csv
import io
import os
from typing import Dict, List, Optional, TextIO, Tuple, Union

from .config import DEFAULT_P0
from .errors import RelInfoError, TableParseError
from .logger import get_logger
from .models import StudyConfig, StudyTable, VariableRecord

logger = get_logger(__name__)

REQUIRED_COLUMNS = ("id", "n", "n0", "x0")
OPTIONAL_COLUMNS = ("p0", "unit_cost", "setup_cost", "max_resolvable", "n1")
FULL = "full"


def _int(value: str, name: str) -> int:
    try:
        number = float(value)
    except ValueError:
        raise ValueError(f"{name}: not a number: {value!r}")
    if not number.is_integer():
        raise ValueError(f"{name}: expected an integer, got {value!r}")
    return int(number)


def _float(value: str, name: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"{name}: not a number: {value!r}")


def _blank(row: Dict[str, str], name: str) -> bool:
    return not (row.get(name) or "").strip()


def parse_row(row: Dict[str, str], default_p0: float) -> Tuple[VariableRecord, Optional[Union[int, str]]]:
    """One CSV row to a VariableRecord plus its requested n1, if any"""
    row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
    cfg = StudyConfig(
        n=_int(row["n"], "n"),
        n0=_int(row["n0"], "n0"),
        x0=_int(row["x0"], "x0"),
        p0=default_p0 if _blank(row, "p0") else _float(row["p0"], "p0"),
    )
    record = VariableRecord(
        id=row["id"],
        cfg=cfg,
        unit_cost=1.0 if _blank(row, "unit_cost") else _float(row["unit_cost"], "unit_cost"),
        setup_cost=0.0 if _blank(row, "setup_cost") else _float(row["setup_cost"], "setup_cost"),
        max_resolvable=None if _blank(row, "max_resolvable")
        else _int(row["max_resolvable"], "max_resolvable"),
    )
    n1 = None
    if not _blank(row, "n1"):
        n1 = FULL if row["n1"].lower() == FULL else _int(row["n1"], "n1")
    return record, n1


def read_study_table(source: Union[str, TextIO], default_p0: float = DEFAULT_P0) -> StudyTable:
    """
    Parse a study CSV from a path or an open text stream

    Raises:
        TableParseError: listing every bad row (header is row 1)
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8-sig") as fp:
            return read_study_table(fp, default_p0)

    reader = csv.DictReader(source)
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise TableParseError([(1, f"missing required column(s): {', '.join(missing)}")])
    unknown = [c for c in header if c not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        logger.warning(f"Ignoring unknown column(s): {', '.join(unknown)}")

    records: List[VariableRecord] = []
    requested: Dict[str, Union[int, str]] = {}
    errors: List[Tuple[int, str]] = []
    seen: Dict[str, int] = {}

    for row in reader:
        line = reader.line_num
        try:
            record, n1 = parse_row(row, default_p0)
        except (ValueError, KeyError, RelInfoError) as e:
            errors.append((line, str(e)))
            continue
        if record.id in seen:
            errors.append((line, f"duplicate id {record.id!r} (first on row {seen[record.id]})"))
            continue
        seen[record.id] = line
        records.append(record)
        if n1 is not None:
            requested[record.id] = n1

    if errors:
        raise TableParseError(errors)
    if not records:
        raise TableParseError([(1, "table has no data rows")])

    logger.debug(f"Parsed {len(records)} variable(s)")
    return StudyTable(records=records, default_p0=default_p0, requested_n1=requested)


def parse_study_table(text: str, default_p0: float = DEFAULT_P0) -> StudyTable:
    """Parse CSV text"""
    return read_study_table(io.StringIO(text), default_p0)
