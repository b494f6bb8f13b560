"""
Monte Carlo and exact-enumeration checks of the relative-information formulas
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from core.config import MAX_EXACT_MISSING, Config, resolve
from core.errors import AllExcludedError, DomainError, InstabilityError, SizeError
from core.lod import lod_fixed_natural, lod_mle_natural, log_ratio_terms
from core.logger import get_logger, log_simulation_result
from core.models import (
    DensityGrid,
    JointSample,
    RatioStats,
    ReferenceLine,
    SdCurve,
    SdRow,
    SimConfig,
    StudyConfig,
    check_probability,
)
from core.rel_info import variance_inverse_ri

from .rng import (
    STREAM_CONDITIONAL,
    STREAM_MISSING,
    STREAM_OBSERVED,
    block_uniforms,
    inverter,
    run_blocks,
)

logger = get_logger(__name__)

RATIO_QUANTILES = (0.5, 0.9, 0.99)


def _observed_lod(cfg: StudyConfig, p: float, config: Config) -> float:
    lod_ob = lod_fixed_natural(cfg.observed, p, cfg.p0)
    if abs(lod_ob) < config.eps_lod:
        raise InstabilityError(
            f"|lod(p={p:.6g}, p0={cfg.p0:.6g}; Y_ob)| = {abs(lod_ob):.3g} is below eps_lod"
        )
    return lod_ob


# ============================================================
# JOINT (OBSERVED, COMPLETE) LODS
# ============================================================

def simulate_joint_lod(cfg: SimConfig, config: Optional[Config] = None) -> JointSample:
    """
    Draw X_ob ~ Bin(n0, p) and X_mis ~ Bin(n - n0, p) per replicate and
    return the MLE-vs-null lods of the observed and the complete data.
    """
    config = resolve(config)
    n_missing = cfg.n - cfg.n0
    draw_ob = inverter(cfg.n0, cfg.true_p)
    draw_mis = inverter(n_missing, cfg.true_p)

    def block(index: int, size: int) -> np.ndarray:
        x_ob = draw_ob(block_uniforms(cfg.seed, STREAM_OBSERVED, index, size))
        x_mis = draw_mis(block_uniforms(cfg.seed, STREAM_MISSING, index, size))
        lod_ob = lod_mle_natural(x_ob, cfg.n0, cfg.p0)
        lod_co = lod_mle_natural(x_ob + x_mis, cfg.n, cfg.p0)
        return np.column_stack([np.atleast_1d(lod_ob), np.atleast_1d(lod_co)])

    pairs = run_blocks(cfg.replicates, block, config.workers)
    sample = JointSample(lod_ob=pairs[:, 0].copy(), lod_co=pairs[:, 1].copy(), config=cfg)
    log_simulation_result(sample)
    return sample


def empirical_ratio_stats(sample: JointSample, ratio_floor: Optional[float] = None,
                          config: Optional[Config] = None) -> RatioStats:
    """Summary of lod_co / lod_ob over pairs whose lod_ob reaches the floor"""
    config = resolve(config)
    floor = config.ratio_floor if ratio_floor is None else ratio_floor
    if not floor > 0:
        raise DomainError(f"ratio_floor must be positive, got {floor!r}")

    keep = sample.lod_ob >= floor
    kept = int(keep.sum())
    if kept == 0:
        raise AllExcludedError(f"no pair has lod_ob >= {floor:g}")

    ratios = sample.lod_co[keep] / sample.lod_ob[keep]
    quantiles = np.quantile(ratios, RATIO_QUANTILES)
    return RatioStats(
        count=kept,
        excluded=len(sample) - kept,
        mean=float(ratios.mean()),
        sd=float(ratios.std(ddof=1)) if kept > 1 else 0.0,
        max=float(ratios.max()),
        quantiles={q: float(v) for q, v in zip(RATIO_QUANTILES, quantiles)},
        floor=floor,
    )


def pearson_correlation(sample: JointSample) -> float:
    """Correlation of lod_ob with lod_co; nan when either is constant"""
    if np.ptp(sample.lod_ob) == 0 or np.ptp(sample.lod_co) == 0:
        return math.nan
    return float(np.corrcoef(sample.lod_ob, sample.lod_co)[0, 1])


# ============================================================
# CONDITIONAL RI_y^-1 GIVEN Y_ob
# ============================================================

def conditional_simulate(cfg: StudyConfig, true_p: float, replicates: int, seed: int,
                         config: Optional[Config] = None) -> np.ndarray:
    """
    Draw X_mis ~ Bin(n - n0, true_p) given the observed data and return
    (lod_ob + lod_mis) / lod_ob per replicate, lods fixed at (true_p, p0).
    """
    config = resolve(config)
    check_probability(true_p, "true_p")
    sim = SimConfig(cfg.n, cfg.n0, true_p, cfg.p0, replicates, seed)
    lod_ob = _observed_lod(cfg, true_p, config)
    a, b = log_ratio_terms(true_p, cfg.p0)
    n_missing = cfg.n_missing
    draw = inverter(n_missing, true_p)

    def block(index: int, size: int) -> np.ndarray:
        x_mis = draw(block_uniforms(sim.seed, STREAM_CONDITIONAL, index, size))
        lod_mis = x_mis * a + (n_missing - x_mis) * b
        return (lod_ob + lod_mis) / lod_ob

    return run_blocks(sim.replicates, block, config.workers)


def _missing_masses(cfg: StudyConfig, true_p: float) -> Tuple[np.ndarray, np.ndarray]:
    """Support 0..n-n0 of X_mis and its Binomial masses, normalised in log space"""
    n_missing = cfg.n_missing
    if n_missing > MAX_EXACT_MISSING:
        raise SizeError(f"n - n0 = {n_missing} exceeds the enumeration bound {MAX_EXACT_MISSING}")
    k = np.arange(n_missing + 1)
    log_mass = binom.logpmf(k, n_missing, true_p)
    return k, np.exp(log_mass - logsumexp(log_mass))


def exact_conditional_moments(cfg: StudyConfig, true_p: float,
                              config: Optional[Config] = None) -> Tuple[float, float]:
    """Exact mean and variance of RI_y^-1 by enumerating X_mis"""
    config = resolve(config)
    check_probability(true_p, "true_p")
    lod_ob = _observed_lod(cfg, true_p, config)
    k, mass = _missing_masses(cfg, true_p)
    a, b = log_ratio_terms(true_p, cfg.p0)
    values = (lod_ob + k * a + (cfg.n_missing - k) * b) / lod_ob
    mean = float(np.dot(mass, values))
    variance = float(np.dot(mass, (values - mean) ** 2))
    return mean, variance


def exact_complete_lod_variance(cfg: StudyConfig, p: float, p1: float, p2: float) -> float:
    """Variance of lod(p1, p2; Y_co) given Y_ob by enumerating X_mis ~ Bin(n - n0, p)"""
    check_probability(p)
    check_probability(p1, "p1")
    check_probability(p2, "p2")
    k, mass = _missing_masses(cfg, p)
    a, b = log_ratio_terms(p1, p2)
    lod_co = lod_fixed_natural(cfg.observed, p1, p2) + k * a + (cfg.n_missing - k) * b
    mean = np.dot(mass, lod_co)
    return float(np.dot(mass, (lod_co - mean) ** 2))


# ============================================================
# PLOT-READY GRIDS AND CURVES
# ============================================================

def _edges(values: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    pad = 0.01 * (hi - lo)
    if pad == 0:
        pad = 0.01 * abs(lo) or 0.5
    return np.linspace(lo - pad, hi + pad, bins + 1)


def reference_ratios(sample: JointSample, config: Config) -> List[float]:
    """1, n/n0 and any configured ratios, ascending"""
    cfg = sample.config
    return sorted({1.0, cfg.n / cfg.n0, *map(float, config.reference_ratios)})


def contour_grid(sample: JointSample, bins_x: int, bins_y: int,
                 config: Optional[Config] = None) -> DensityGrid:
    """Equal-width 2-D histogram of (lod_ob, lod_co) with y = r x reference lines"""
    config = resolve(config)
    if bins_x < 2 or bins_y < 2:
        raise DomainError(f"need at least 2 bins per axis, got {bins_x} x {bins_y}")
    x_edges = _edges(sample.lod_ob, bins_x)
    y_edges = _edges(sample.lod_co, bins_y)
    counts, _, _ = np.histogram2d(sample.lod_ob, sample.lod_co, bins=[x_edges, y_edges])
    lines = [
        ReferenceLine(r, x_edges[0], r * x_edges[0], x_edges[-1], r * x_edges[-1])
        for r in reference_ratios(sample, config)
    ]
    return DensityGrid(x_edges, y_edges, counts.astype(np.int64), lines)


def _cell_index(edges: np.ndarray, value: float) -> int:
    return int(np.clip(np.searchsorted(edges, value, side="right") - 1, 0, len(edges) - 2))


def cell_offset_from_line(grid: DensityGrid, r: float) -> int:
    """
    Cells between the maximum-mass cell and the line y = r x, measured along
    y within the cell's own column. 0 means the line crosses the cell.
    """
    i, j = np.unravel_index(int(np.argmax(grid.counts)), grid.counts.shape)
    j_lo = _cell_index(grid.y_edges, r * grid.x_edges[i])
    j_hi = _cell_index(grid.y_edges, r * grid.x_edges[i + 1])
    if j_lo <= j <= j_hi:
        return 0
    return int(min(abs(j - j_lo), abs(j - j_hi)))


def sd_curve(n: int, n0: int, p0: float, true_ps: Sequence[float],
             config: Optional[Config] = None) -> SdCurve:
    """
    Plug-in sd of RI_y^-1 for every x0 in 0..n0 (None where the observed
    lod vanishes or the MLE is on the boundary) and Bin(n0, p) mass curves.
    """
    config = resolve(config)
    check_probability(p0, "p0")
    if int(n) != n or int(n0) != n0 or not 0 < n0 <= n:
        raise DomainError(f"need integers 0 < n0 <= n, got n={n!r}, n0={n0!r}")

    rows = []
    for x0 in range(n0 + 1):
        p_hat = x0 / n0
        if x0 in (0, n0) or p_hat == p0:
            rows.append(SdRow(x0, None))
            continue
        cfg = StudyConfig(n, n0, x0, p0)
        try:
            sd = math.sqrt(variance_inverse_ri(cfg, p_hat, n - n0, config))
        except InstabilityError:
            sd = None
        rows.append(SdRow(x0, sd))

    support = np.arange(n0 + 1)
    curves = {}
    for p in true_ps:
        check_probability(p, "true_p")
        curves[float(p)] = binom.pmf(support, n0, p)

    unstable = sum(1 for row in rows if not row.stable)
    logger.debug(f"sd curve n={n}, n0={n0}: {unstable} unstable point(s)")
    return SdCurve(n, n0, p0, rows, curves)
