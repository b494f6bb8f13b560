"""
Closed-form moments of the inverse empirical relative information RI_y^-1

Conditioning on the observed data, the lod of the complete data is the observed
lod plus the lod of the missing values, a linear function of
X_mis ~ Binomial(n1, p). Hence RI_y^-1 = 1 + lod_mis / lod_ob has

    E   = 1 + n1 * KL(p, p0) / lod(p, p0; Y_ob)
    var = n1 * p (1 - p) * gap(p, p0)^2 / lod(p, p0; Y_ob)^2

where gap is the log-odds difference. Plugging in p = x0/n0 makes the
denominator n0 * KL(p_hat, p0), so E collapses to 1 + n1/n0.
"""
import math
from typing import Optional

from .config import Config, resolve
from .errors import BoundaryMleError, DomainError, InstabilityError
from .lod import kl_bernoulli, lod_fixed, lod_fixed_natural, log_odds_gap
from .logger import get_logger
from .models import RelInfoSummary, StudyConfig, check_probability

logger = get_logger(__name__)


def _check_n1(cfg: StudyConfig, n1: int) -> int:
    if int(n1) != n1 or not 0 <= n1 <= cfg.n_missing:
        raise DomainError(f"n1 must be an integer in [0, {cfg.n_missing}], got {n1!r}")
    return int(n1)


def _stable_lod_ob(cfg: StudyConfig, p: float, config: Config) -> float:
    """lod(p, p0; Y_ob) in natural units, or InstabilityError"""
    lod_ob = lod_fixed_natural(cfg.observed, p, cfg.p0)
    if abs(lod_ob) < config.eps_lod:
        raise InstabilityError(
            f"|lod(p={p:.6g}, p0={cfg.p0:.6g}; Y_ob)| = {abs(lod_ob):.3g} "
            f"is below eps_lod={config.eps_lod:g}"
        )
    return lod_ob


def complete_lod_variance(cfg: StudyConfig, p: float, p1: float, p2: float) -> float:
    """var[lod(p1, p2; Y_co) | Y_ob, p] = (n - n0) p (1 - p) gap(p1, p2)^2"""
    check_probability(p)
    check_probability(p1, "p1")
    check_probability(p2, "p2")
    if p1 == p2:
        return 0.0
    return cfg.n_missing * p * (1.0 - p) * log_odds_gap(p1, p2) ** 2


def inverse_ri_slope(cfg: StudyConfig, p: float, config: Optional[Config] = None) -> float:
    """Increase of E[RI_y^-1] per resolved value"""
    config = resolve(config)
    check_probability(p)
    lod_ob = _stable_lod_ob(cfg, p, config)
    if p == cfg.p_hat:
        # lod(p_hat, p0; Y_ob) = n0 KL(p_hat, p0)
        return 1.0 / cfg.n0
    return kl_bernoulli(p, cfg.p0) / lod_ob


def expected_inverse_ri(cfg: StudyConfig, p: float, n1: int,
                        config: Optional[Config] = None) -> float:
    """E[RI_y^-1 | Y_ob] when n1 missing values are resolved under true p"""
    n1 = _check_n1(cfg, n1)
    slope = inverse_ri_slope(cfg, p, config)
    return 1.0 + n1 * slope


def variance_inverse_ri(cfg: StudyConfig, p: float, n1: int,
                        config: Optional[Config] = None) -> float:
    """var[RI_y^-1 | Y_ob] when n1 missing values are resolved under true p"""
    config = resolve(config)
    n1 = _check_n1(cfg, n1)
    check_probability(p)
    # the squared gap vanishes at p == p0 whatever the denominator
    if p == cfg.p0 or n1 == 0:
        return 0.0
    lod_ob = _stable_lod_ob(cfg, p, config)
    return n1 * p * (1.0 - p) * log_odds_gap(p, cfg.p0) ** 2 / lod_ob ** 2


def plugin_probability(cfg: StudyConfig, config: Optional[Config] = None) -> float:
    """
    p_hat_ob = x0/n0, clamped to [1/(2 n0), 1 - 1/(2 n0)] when continuity
    correction is on; BoundaryMleError otherwise.
    """
    config = resolve(config)
    if not cfg.boundary_mle:
        return cfg.p_hat
    if not config.continuity_correction:
        raise BoundaryMleError(
            f"observed MLE x0/n0 = {cfg.x0}/{cfg.n0} is on the boundary; "
            f"enable continuity correction to clamp it"
        )
    half = 0.5 / cfg.n0
    return min(max(cfg.p_hat, half), 1.0 - half)


def _summary(cfg: StudyConfig, p: float, n1: int, config: Config) -> RelInfoSummary:
    n1 = _check_n1(cfg, n1)
    lod_ob = lod_fixed(cfg.observed, p, cfg.p0, config)
    expected = expected_inverse_ri(cfg, p, n1, config)
    sd = math.sqrt(variance_inverse_ri(cfg, p, n1, config))
    return RelInfoSummary(
        expected_inverse_ri=expected,
        sd_inverse_ri=sd,
        plugin_ri1=1.0 / expected if expected > 0 else math.nan,
        stable=lod_ob.natural > config.eps_lod,
        lod_ob=lod_ob,
        n1=n1,
        p=p,
    )


def plugin_summary(cfg: StudyConfig, n1: int, config: Optional[Config] = None) -> RelInfoSummary:
    """Summary of RI_y^-1 with p replaced by the observed MLE"""
    config = resolve(config)
    p = plugin_probability(cfg, config)
    return _summary(cfg, p, n1, config)


def fixed_summary(cfg: StudyConfig, p: float, n1: int,
                  config: Optional[Config] = None) -> RelInfoSummary:
    """
    Summary of RI_y^-1 at a chosen alternative p instead of the MLE.

    A p on the far side of p0 from the data gives a negative observed lod;
    the numbers are still returned but the summary is marked unstable.
    """
    config = resolve(config)
    check_probability(p)
    summary = _summary(cfg, p, n1, config)
    if not summary.stable:
        logger.warning(
            f"lod(p={p:.6g}, p0={cfg.p0:.6g}; Y_ob) = {summary.lod_ob.natural:.4g} < 0; "
            f"ratio interpretation does not hold"
        )
    return summary


def equivalent_additional_individuals(ri: float, n: int) -> float:
    """New independent individuals matching full resolution: n (1/ri - 1)"""
    if not (isinstance(ri, (int, float)) and 0.0 < ri <= 1.0):
        raise DomainError(f"ri must lie in (0, 1], got {ri!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return n * (1.0 / ri - 1.0)
