"""
Binomial likelihood, MLE and lod scores

All arithmetic is in natural-log units; a LogBase only converts what is
returned. Binomial coefficients are dropped everywhere.
"""
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import xlogy

from .config import Config, resolve
from .models import BinomialData, FixedPair, LodScore, LogBase, MleVsNull, check_probability


def _base(config: Optional[Config]) -> LogBase:
    return resolve(config).log_base


def loglik_natural(data: BinomialData, p: float) -> float:
    check_probability(p)
    return data.successes * math.log(p) + data.failures * math.log1p(-p)


def binomial_loglik(data: BinomialData, p: float, config: Optional[Config] = None) -> float:
    """x log p + (m - x) log(1 - p), in the configured base"""
    return _base(config).from_natural(loglik_natural(data, p))


def log_ratio_terms(p1: float, p2: float) -> Tuple[float, float]:
    """(log(p1/p2), log((1 - p1)/(1 - p2))): per-success and per-failure lod"""
    return math.log(p1) - math.log(p2), math.log1p(-p1) - math.log1p(-p2)


def lod_fixed_natural(data: BinomialData, p1: float, p2: float) -> float:
    check_probability(p1, "p1")
    check_probability(p2, "p2")
    if p1 == p2:
        return 0.0
    a, b = log_ratio_terms(p1, p2)
    return data.successes * a + data.failures * b


def lod_fixed(data: BinomialData, p1: float, p2: float,
              config: Optional[Config] = None) -> LodScore:
    """lod(p1, p2; data) = x log(p1/p2) + (m - x) log((1 - p1)/(1 - p2))"""
    base = _base(config)
    value = base.from_natural(lod_fixed_natural(data, p1, p2))
    return LodScore(value, base, FixedPair(float(p1), float(p2)))


def mle(data: BinomialData) -> float:
    """x / m; boundary values are returned as-is"""
    return data.successes / data.trials


def lod_mle_natural(successes, trials, p0: float):
    """
    MLE-vs-null lod in natural units, vectorised over successes/trials.

    Uses xlogy so that 0 log 0 = 0 at boundary MLEs.
    """
    x = np.asarray(successes, dtype=float)
    m = np.asarray(trials, dtype=float)
    p_hat = x / m
    value = (xlogy(x, p_hat) + xlogy(m - x, 1.0 - p_hat)
             - x * math.log(p0) - (m - x) * math.log1p(-p0))
    # rounding can leave -1e-16 where p_hat == p0
    value = np.maximum(value, 0.0)
    if value.ndim == 0:
        return float(value)
    return value


def lod_mle_vs_null(data: BinomialData, p0: float,
                    config: Optional[Config] = None) -> LodScore:
    """lod(p_hat, p0; data) with p_hat = x/m, never negative"""
    check_probability(p0, "p0")
    p_hat = mle(data)
    if p_hat == p0:
        natural = 0.0
    elif 0.0 < p_hat < 1.0:
        natural = max(lod_fixed_natural(data, p_hat, p0), 0.0)
    else:
        natural = lod_mle_natural(data.successes, data.trials, p0)
    base = _base(config)
    return LodScore(base.from_natural(natural), base, MleVsNull(p_hat, float(p0)))


def kl_bernoulli(p: float, q: float) -> float:
    """p log(p/q) + (1 - p) log((1 - p)/(1 - q)): expected per-trial lod(p, q)"""
    if p == q:
        return 0.0
    a, b = log_ratio_terms(p, q)
    return p * a + (1.0 - p) * b


def log_odds_gap(p1: float, p2: float) -> float:
    """log(p1/p2) - log((1 - p1)/(1 - p2)); the lod increment per extra success"""
    a, b = log_ratio_terms(p1, p2)
    return a - b
