"""
Configuration and constants
"""
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .models import LogBase

# Paths
SCRIPT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
OUTPUT_DIR = os.path.join(SCRIPT_DIR, "results")
LOG_DIR = os.path.join(SCRIPT_DIR, "logs")

# Output schema tag for every JSON document
SCHEMA = "relinfo/1"

# Numerical thresholds (natural-log units)
EPS_LOD = 1e-9
RATIO_FLOOR = 1e-3

# Null probability used when a study table row has no p0 column
DEFAULT_P0 = 0.5

# Simulation defaults
DEFAULT_N = 1000
DEFAULT_N0 = 800
DEFAULT_TRUE_PS = (0.55, 0.6, 0.7)
DEFAULT_REPLICATES = 100_000
DEFAULT_BINS = 40
REFERENCE_RATIOS = (1.0, 1.25)
OBSERVED_FRACTION = 0.8

# Replicates per counter-based stream block
CHUNK_SIZE = 8192

# Solver / oracle limits
EXACT_SUBSET_LIMIT = 20
MAX_ENUMERATION = 10 ** 6
MAX_EXACT_MISSING = 10 ** 5

# Allocations within this fraction of their mean count as "similar"
UNIFORM_DESIGN_TOLERANCE = 0.10


@dataclass(frozen=True)
class Config:
    """Runtime configuration"""
    log_base: LogBase = LogBase.NATURAL
    eps_lod: float = EPS_LOD
    continuity_correction: bool = False
    exact_subset_limit: int = EXACT_SUBSET_LIMIT
    ratio_floor: float = RATIO_FLOOR
    reference_ratios: Tuple[float, ...] = field(default=REFERENCE_RATIOS)
    workers: int = 1

    def __post_init__(self):
        if not self.eps_lod > 0:
            raise ValueError(f"eps_lod must be positive, got {self.eps_lod}")
        if not self.ratio_floor > 0:
            raise ValueError(f"ratio_floor must be positive, got {self.ratio_floor}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


DEFAULT_CONFIG = Config()


def resolve(config: Optional[Config]) -> Config:
    """Return the given config or the module default"""
    return DEFAULT_CONFIG if config is None else config
