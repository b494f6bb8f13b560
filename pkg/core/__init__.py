# Core module
from .models import BinomialData, LodScore, LogBase, StudyConfig, VariableRecord
from .config import Config, DEFAULT_CONFIG
from .lod import binomial_loglik, lod_fixed, lod_mle_vs_null, mle
from .rel_info import plugin_summary, equivalent_additional_individuals
from .design import optimize_allocation, combine_overall_inverse_ri
