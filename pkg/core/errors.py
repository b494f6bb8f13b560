"""
Exception hierarchy
"""
from typing import Iterable, List, Optional, Tuple


class RelInfoError(Exception):
    """Base class for every error raised by the library"""

    def to_dict(self) -> dict:
        return {"type": type(self).__name__, "message": str(self)}


class DomainError(RelInfoError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class InstabilityError(RelInfoError):
    """Observed lod too close to zero for an information ratio to be meaningful"""

    def __init__(self, message: str, ids: Optional[Iterable[str]] = None):
        super().__init__(message)
        self.ids: List[str] = list(ids or [])

    def to_dict(self) -> dict:
        d = super().to_dict()
        if self.ids:
            d["ids"] = self.ids
        return d


class BoundaryMleError(RelInfoError):
    """Observed MLE sits on 0 or 1 and continuity correction is off"""


class EmptyWeightError(RelInfoError):
    """Total observed lod weight is (numerically) zero"""


class SizeError(RelInfoError):
    """Enumeration would exceed its configured bound"""


class UsageError(RelInfoError):
    """Command-line arguments could not be parsed"""


class AllExcludedError(RelInfoError):
    """No simulated pair passed the ratio floor"""


class TableParseError(RelInfoError):
    """One or more study-table rows could not be parsed"""

    def __init__(self, rows: List[Tuple[int, str]]):
        self.rows = rows
        lines = [f"row {row}: {msg}" for row, msg in rows]
        super().__init__("; ".join(lines))

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["rows"] = [{"row": row, "message": msg} for row, msg in self.rows]
        return d
