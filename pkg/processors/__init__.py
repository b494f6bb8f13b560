# Processors module
from .montecarlo import (
    conditional_simulate,
    contour_grid,
    empirical_ratio_stats,
    exact_conditional_moments,
    sd_curve,
    simulate_joint_lod,
)
