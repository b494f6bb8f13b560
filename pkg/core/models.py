"""
Data models for relative-information analysis
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np

from .errors import DomainError


def check_probability(p: float, name: str = "p") -> float:
    """Validate an interior probability"""
    if not (isinstance(p, (int, float, np.floating)) and 0.0 < p < 1.0):
        raise DomainError(f"{name} must lie strictly between 0 and 1, got {p!r}")
    return float(p)


class LogBase(Enum):
    """Log base used for reported lod values"""
    NATURAL = "e"
    TEN = "10"

    @classmethod
    def parse(cls, value: str) -> "LogBase":
        for member in cls:
            if member.value == str(value).strip().lower():
                return member
        raise DomainError(f"unknown log base {value!r} (use 'e' or '10')")

    def from_natural(self, value):
        """Convert a natural-log quantity into this base"""
        if self is LogBase.TEN:
            return value / math.log(10.0)
        return value

    def to_natural(self, value):
        if self is LogBase.TEN:
            return value * math.log(10.0)
        return value


@dataclass(frozen=True)
class BinomialData:
    """x successes out of m trials"""
    successes: int
    trials: int

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.successes) != self.successes or not 0 <= self.successes <= self.trials:
            raise DomainError(
                f"successes must be an integer in [0, {self.trials}], got {self.successes!r}"
            )

    @property
    def failures(self) -> int:
        return self.trials - self.successes

    def __add__(self, other: "BinomialData") -> "BinomialData":
        return BinomialData(self.successes + other.successes, self.trials + other.trials)


@dataclass(frozen=True)
class FixedPair:
    """lod(p1, p2): both parameters fixed in advance"""
    p1: float
    p2: float


@dataclass(frozen=True)
class MleVsNull:
    """lod(p_hat, p0): MLE on the current data against the null"""
    p_hat: float
    p0: float


Comparison = Union[FixedPair, MleVsNull]


@dataclass(frozen=True)
class LodScore:
    """A log likelihood-ratio value, tagged with its base and what it compares"""
    value: float
    log_base: LogBase
    comparison: Comparison

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"lod value must be finite, got {self.value}")
        if isinstance(self.comparison, MleVsNull) and self.value < 0:
            raise DomainError(f"MLE-vs-null lod cannot be negative, got {self.value}")

    @property
    def natural(self) -> float:
        """Value in natural-log units"""
        return self.log_base.to_natural(self.value)

    def to_base(self, base: LogBase) -> "LodScore":
        if base is self.log_base:
            return self
        return LodScore(base.from_natural(self.natural), base, self.comparison)

    @property
    def is_mle(self) -> bool:
        return isinstance(self.comparison, MleVsNull)


@dataclass(frozen=True)
class StudyConfig:
    """n individuals, n0 of them observed with x0 successes, null p0"""
    n: int
    n0: int
    x0: int
    p0: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if int(self.n0) != self.n0 or not 0 < self.n0 <= self.n:
            raise DomainError(f"n0 must be an integer in [1, n={self.n}], got {self.n0!r}")
        if int(self.x0) != self.x0 or not 0 <= self.x0 <= self.n0:
            raise DomainError(f"x0 must be an integer in [0, n0={self.n0}], got {self.x0!r}")
        check_probability(self.p0, "p0")

    @property
    def n_missing(self) -> int:
        return self.n - self.n0

    @property
    def p_hat(self) -> float:
        return self.x0 / self.n0

    @property
    def observed(self) -> BinomialData:
        return BinomialData(self.x0, self.n0)

    @property
    def boundary_mle(self) -> bool:
        return self.x0 == 0 or self.x0 == self.n0


@dataclass(frozen=True)
class RelInfoSummary:
    """Expected inverse relative information and its spread for one variable"""
    expected_inverse_ri: float
    sd_inverse_ri: float
    plugin_ri1: float
    stable: bool
    lod_ob: LodScore
    n1: int = 0
    p: Optional[float] = None


class DesignMode(Enum):
    EXACT = "exact"
    GREEDY = "greedy"


@dataclass(frozen=True)
class VariableRecord:
    """One studied variable with its follow-up costs"""
    id: str
    cfg: StudyConfig
    unit_cost: float = 1.0
    setup_cost: float = 0.0
    max_resolvable: Optional[int] = None

    def __post_init__(self):
        if not self.id:
            raise DomainError("variable id must be non-empty")
        for name in ("unit_cost", "setup_cost"):
            cost = getattr(self, name)
            if not (math.isfinite(cost) and cost >= 0):
                raise DomainError(f"{self.id}: {name} must be finite and >= 0, got {cost!r}")
        if self.max_resolvable is None:
            object.__setattr__(self, "max_resolvable", self.cfg.n_missing)
        if (int(self.max_resolvable) != self.max_resolvable
                or not 0 <= self.max_resolvable <= self.cfg.n_missing):
            raise DomainError(
                f"{self.id}: max_resolvable must be in [0, {self.cfg.n_missing}], "
                f"got {self.max_resolvable!r}"
            )

    def cost(self, n1: int) -> float:
        """Follow-up cost of resolving n1 values here"""
        if n1 <= 0:
            return 0.0
        return self.setup_cost + self.unit_cost * n1


@dataclass
class DesignProblem:
    """Budget-constrained follow-up allocation over several variables"""
    variables: List[VariableRecord]
    budget: float
    mode: DesignMode = DesignMode.EXACT

    def __post_init__(self):
        if not self.variables:
            raise DomainError("a design problem needs at least one variable")
        ids = [v.id for v in self.variables]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise DomainError(f"duplicate variable ids: {', '.join(dupes)}")
        if not (math.isfinite(self.budget) and self.budget >= 0):
            raise DomainError(f"budget must be finite and >= 0, got {self.budget!r}")
        if isinstance(self.mode, str):
            self.mode = DesignMode(self.mode)

    def total_cost(self, allocations: Dict[str, int]) -> float:
        return sum(v.cost(allocations.get(v.id, 0)) for v in self.variables)


@dataclass
class DesignSolution:
    """Chosen allocation and its overall inverse relative information"""
    allocations: Dict[str, int]
    objective: float
    budget_used: float
    optimal: bool
    excluded: List[str] = field(default_factory=list)
    variability: Dict[str, float] = field(default_factory=dict)
    suggests_new_individuals: bool = False


@dataclass(frozen=True)
class ComparisonReport:
    """Resolving missing values vs collecting new individuals"""
    id: str
    n1_resolve: int
    n_new: int
    resolve_factor: float
    new_individuals_factor: float
    larger: str
    break_even_n_new: float


@dataclass(frozen=True)
class SimConfig:
    """Joint (observed, complete) lod simulation settings"""
    n: int
    n0: int
    true_p: float
    p0: float
    replicates: int
    seed: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.n0) != self.n0 or not 0 < self.n0 <= self.n:
            raise DomainError(f"need integers 0 < n0 <= n, got n={self.n!r}, n0={self.n0!r}")
        check_probability(self.true_p, "true_p")
        check_probability(self.p0, "p0")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise DomainError(f"replicates must be >= 1, got {self.replicates!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass
class JointSample:
    """Per-replicate MLE-vs-null lods on the observed and the complete data"""
    lod_ob: np.ndarray
    lod_co: np.ndarray
    config: SimConfig

    @property
    def pairs(self) -> np.ndarray:
        """(replicates, 2) array of (lod_ob, lod_co)"""
        return np.column_stack([self.lod_ob, self.lod_co])

    def __len__(self) -> int:
        return len(self.lod_ob)


@dataclass(frozen=True)
class RatioStats:
    """Distribution summary of lod_co / lod_ob"""
    count: int
    excluded: int
    mean: float
    sd: float
    max: float
    quantiles: Dict[float, float]
    floor: float


@dataclass(frozen=True)
class ReferenceLine:
    """Segment of y = r x spanning the grid's x range"""
    r: float
    x_start: float
    y_start: float
    x_end: float
    y_end: float


@dataclass
class DensityGrid:
    """Equal-width 2-D histogram of (lod_ob, lod_co)"""
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray
    reference_lines: List[ReferenceLine] = field(default_factory=list)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def normalized(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def x_centers(self) -> np.ndarray:
        return 0.5 * (self.x_edges[:-1] + self.x_edges[1:])

    @property
    def y_centers(self) -> np.ndarray:
        return 0.5 * (self.y_edges[:-1] + self.y_edges[1:])


@dataclass(frozen=True)
class SdRow:
    x0: int
    sd_inverse_ri: Optional[float]

    @property
    def stable(self) -> bool:
        return self.sd_inverse_ri is not None


@dataclass
class SdCurve:
    """Plug-in sd of RI_y^-1 against x0, with x0 mass curves per true p"""
    n: int
    n0: int
    p0: float
    rows: List[SdRow]
    density_curves: Dict[float, np.ndarray]

    def sd_values(self) -> List[Optional[float]]:
        return [row.sd_inverse_ri for row in self.rows]


@dataclass
class StudyTable:
    """Variables parsed from a study CSV plus table-wide options"""
    records: List[VariableRecord]
    default_p0: float = 0.5
    requested_n1: Dict[str, Union[int, str]] = field(default_factory=dict)

    @property
    def ids(self) -> List[str]:
        return [r.id for r in self.records]

    def get(self, variable_id: str) -> Optional[VariableRecord]:
        for record in self.records:
            if record.id == variable_id:
                return record
        return None
