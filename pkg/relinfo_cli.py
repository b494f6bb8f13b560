"""
RELINFO - missing-information fractions and follow-up designs
=============================================================
Quantify how much of the evidence in a binomial likelihood-ratio test is
lost to missing observations, and plan which missing values to resolve.

Subcommands:
  estimate   plug-in relative information per variable of a study table
  design     budget-optimal follow-up allocation across variables
  compare    resolving missing values vs collecting new individuals
  simulate   joint (observed, complete) lod distribution: contour CSV + ratio stats
  curves     sd of the inverse relative information against x0

Usage:
  python relinfo_cli.py estimate studies.csv
  python relinfo_cli.py design studies.csv --budget 500 --mode exact
  python relinfo_cli.py simulate --true-p 0.55 --seed 7 --out-dir results/
  python relinfo_cli.py curves --n 1000 --p0 0.5 --true-p 0.55 0.6 0.7
"""

import argparse
import io
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

# Add current directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core import config as settings
from core.config import Config
from core.design import brute_force_allocation, compare_markers_vs_individuals, optimize_allocation
from core.errors import AllExcludedError, InstabilityError, RelInfoError, UsageError
from core.logger import get_logger, log_summary_result, set_console_level
from core.models import DesignMode, DesignProblem, LogBase, SimConfig, StudyTable
from core.rel_info import equivalent_additional_individuals, fixed_summary, plugin_summary
from core.table import FULL, read_study_table
from formatters.output import (
    CONTOUR_COLUMNS,
    ESTIMATE_COLUMNS,
    LINE_COLUMNS,
    comparison_row,
    contour_rows,
    error_json,
    estimate_row,
    format_table,
    line_rows,
    ratio_stats_payload,
    save_output,
    sd_curve_columns,
    sd_curve_rows,
    solution_payload,
    to_json,
    write_csv,
)
from processors.montecarlo import (
    contour_grid,
    empirical_ratio_stats,
    pearson_correlation,
    sd_curve,
    simulate_joint_lod,
)

logger = get_logger("relinfo")


# ============================================================
# COMMANDS
# ============================================================

def _resolve_n1(table: StudyTable, record, default: Union[int, str]) -> int:
    n1 = table.requested_n1.get(record.id, default)
    return record.cfg.n_missing if n1 == FULL else int(n1)


def cmd_estimate(table: StudyTable, n1: Union[int, str] = FULL, config: Optional[Config] = None,
                 true_p: Optional[float] = None) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]]]:
    """
    Per-variable relative-information report.

    Returns:
        (rows, hard_errors); unstable rows are flagged, not counted as errors
    """
    config = settings.resolve(config)
    rows, hard = [], []
    for record in table.records:
        try:
            k = _resolve_n1(table, record, n1)
            if true_p is None:
                summary = plugin_summary(record.cfg, k, config)
            else:
                summary = fixed_summary(record.cfg, true_p, k, config)
            log_summary_result(record.id, summary)
            equivalent = None
            if summary.stable and 0 < summary.plugin_ri1 <= 1:
                equivalent = equivalent_additional_individuals(summary.plugin_ri1, record.cfg.n)
            rows.append(estimate_row(record, summary, equivalent, config.log_base))
        except InstabilityError as e:
            logger.warning(f"{record.id}: unstable ({e})")
            rows.append(estimate_row(record, None, None, config.log_base, error=str(e)))
        except (RelInfoError, ValueError) as e:
            logger.error(f"{record.id}: {e}")
            rows.append(estimate_row(record, None, None, config.log_base, error=str(e)))
            hard.append({"id": record.id, "type": type(e).__name__, "message": str(e)})
    return rows, hard


def cmd_design(table: StudyTable, budget: float, mode: str = "exact",
               config: Optional[Config] = None, oracle: bool = False) -> Dict[str, Any]:
    """Optimal follow-up allocation as a JSON-ready payload"""
    config = settings.resolve(config)
    problem = DesignProblem(list(table.records), budget, DesignMode(mode))
    solver = brute_force_allocation if oracle else optimize_allocation
    solution = solver(problem, config)
    return solution_payload(solution, budget, "oracle" if oracle else mode)


def cmd_compare(table: StudyTable, n_new: int, n1: Union[int, str] = FULL,
                config: Optional[Config] = None) -> List[Dict[str, Any]]:
    config = settings.resolve(config)
    return [
        comparison_row(compare_markers_vs_individuals(
            record, _resolve_n1(table, record, n1), n_new, config))
        for record in table.records
    ]


def cmd_simulate(sim: SimConfig, bins_x: int, bins_y: int,
                 config: Optional[Config] = None) -> Tuple[str, str, Dict[str, Any]]:
    """
    Joint lod simulation.

    Returns:
        (contour CSV text, reference-line CSV text, ratio-stats payload)
    """
    config = settings.resolve(config)
    sample = simulate_joint_lod(sim, config)
    grid = contour_grid(sample, bins_x, bins_y, config)

    contour = io.StringIO()
    write_csv(contour_rows(grid, config.log_base), CONTOUR_COLUMNS, contour)
    lines = io.StringIO()
    write_csv(line_rows(grid, config.log_base), LINE_COLUMNS, lines)

    try:
        stats = ratio_stats_payload(empirical_ratio_stats(sample, config=config))
    except AllExcludedError as e:
        logger.warning(str(e))
        stats = None

    payload = {
        "config": sim,
        "log_base": config.log_base,
        "correlation": pearson_correlation(sample),
        "ratio_stats": stats,
    }
    return contour.getvalue(), lines.getvalue(), payload


def cmd_curves(n: int, n0: Optional[int], p0: float, true_ps: Sequence[float],
               config: Optional[Config] = None) -> str:
    """sd curve CSV for one sample size"""
    if n0 is None:
        n0 = max(1, round(settings.OBSERVED_FRACTION * n))
    curve = sd_curve(n, n0, p0, true_ps, config)
    out = io.StringIO()
    write_csv(sd_curve_rows(curve), sd_curve_columns(curve), out)
    return out.getvalue()


# ============================================================
# ARGUMENTS
# ============================================================

def _n1_arg(value: str) -> Union[int, str]:
    if value.strip().lower() == FULL:
        return FULL
    try:
        n1 = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or '{FULL}', got {value!r}")
    if n1 < 0:
        raise argparse.ArgumentTypeError("n1 must be >= 0")
    return n1


class JsonErrorParser(argparse.ArgumentParser):
    """Reports usage errors as the JSON error document on stderr"""

    def error(self, message: str):
        error = UsageError(f"{self.prog}: {message}").to_dict()
        error["usage"] = self.format_usage().strip()
        sys.stderr.write(error_json(error))
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    common = JsonErrorParser(add_help=False)
    common.add_argument('--log-base', choices=['e', '10'], default='e',
                        help="Base for reported lod values (default e)")
    common.add_argument('--eps-lod', type=float, default=settings.EPS_LOD,
                        help="Observed-lod instability threshold, natural-log units")
    common.add_argument('--continuity-correction', action='store_true',
                        help="Clamp boundary MLEs to [1/(2 n0), 1 - 1/(2 n0)]")
    common.add_argument('--workers', type=int, default=1,
                        help="Threads for Monte Carlo blocks (output does not depend on it)")
    common.add_argument('--output', '-o', help="Write the main output here instead of stdout")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true')
    verbosity.add_argument('--quiet', '-q', action='store_true')

    parser = JsonErrorParser(
        prog='relinfo',
        description="Missing-information fractions and follow-up study designs",
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('estimate', parents=[common], help="Per-variable relative information")
    p.add_argument('table', help="Study CSV")
    p.add_argument('--p0', type=float, default=settings.DEFAULT_P0,
                   help="Null probability for rows without a p0 column")
    p.add_argument('--n1', type=_n1_arg, default=FULL,
                   help="Missing values resolved per variable, or 'full' (default)")
    p.add_argument('--true-p', type=float,
                   help="Evaluate at this fixed p instead of the observed MLE")
    p.add_argument('--format', choices=['json', 'csv', 'table'], default='json')

    p = sub.add_parser('design', parents=[common], help="Budget-optimal follow-up allocation")
    p.add_argument('table', help="Study CSV")
    p.add_argument('--p0', type=float, default=settings.DEFAULT_P0)
    p.add_argument('--budget', type=float, required=True)
    p.add_argument('--mode', choices=['exact', 'greedy'], default='exact')
    p.add_argument('--exact-subset-limit', type=int, default=settings.EXACT_SUBSET_LIMIT)
    p.add_argument('--oracle', action='store_true', help=argparse.SUPPRESS)

    p = sub.add_parser('compare', parents=[common], help="Resolve missing values vs add individuals")
    p.add_argument('table', help="Study CSV")
    p.add_argument('--p0', type=float, default=settings.DEFAULT_P0)
    p.add_argument('--n1', type=_n1_arg, default=FULL)
    p.add_argument('--n-new', type=int, default=0)

    p = sub.add_parser('simulate', parents=[common], help="Joint lod distribution (contour data)")
    p.add_argument('--n', type=int, default=settings.DEFAULT_N)
    p.add_argument('--n0', type=int, default=settings.DEFAULT_N0)
    p.add_argument('--true-p', type=float, default=settings.DEFAULT_TRUE_PS[0])
    p.add_argument('--p0', type=float, default=settings.DEFAULT_P0)
    p.add_argument('--reps', type=int, default=settings.DEFAULT_REPLICATES)
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--bins', type=int, default=settings.DEFAULT_BINS)
    p.add_argument('--bins-y', type=int, help="Bins along lod_co (default: --bins)")
    p.add_argument('--ratio', type=float, action='append', default=[],
                   help="Extra reference ratio r for y = r x (repeatable)")
    p.add_argument('--ratio-floor', type=float, default=settings.RATIO_FLOOR)
    p.add_argument('--out-dir', default=settings.OUTPUT_DIR)

    p = sub.add_parser('curves', parents=[common], help="sd of RI_y^-1 against x0")
    p.add_argument('--n', type=int, default=settings.DEFAULT_N)
    p.add_argument('--n0', type=int, help="Observed individuals (default 0.8 n)")
    p.add_argument('--p0', type=float, default=settings.DEFAULT_P0)
    p.add_argument('--true-p', type=float, nargs='+', default=list(settings.DEFAULT_TRUE_PS))

    return parser


def build_config(args: argparse.Namespace) -> Config:
    ratios = tuple(settings.REFERENCE_RATIOS) + tuple(getattr(args, 'ratio', []) or [])
    return Config(
        log_base=LogBase.parse(args.log_base),
        eps_lod=args.eps_lod,
        continuity_correction=args.continuity_correction,
        exact_subset_limit=getattr(args, 'exact_subset_limit', settings.EXACT_SUBSET_LIMIT),
        ratio_floor=getattr(args, 'ratio_floor', settings.RATIO_FLOOR),
        reference_ratios=ratios,
        workers=args.workers,
    )


# ============================================================
# MAIN
# ============================================================

def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _run(args: argparse.Namespace, config: Config) -> int:
    if args.command == 'estimate':
        table = read_study_table(args.table, args.p0)
        rows, hard = cmd_estimate(table, args.n1, config, args.true_p)
        if args.format == 'csv':
            out = io.StringIO()
            write_csv(rows, ESTIMATE_COLUMNS, out)
            text = out.getvalue()
        elif args.format == 'table':
            text = format_table(rows, ESTIMATE_COLUMNS[:-1]) + "\n"
        else:
            text = to_json({"log_base": config.log_base, "variables": rows})
        _emit(text, args.output)
        if hard:
            sys.stderr.write(error_json({
                "type": "RowErrors",
                "message": f"{len(hard)} row(s) failed",
                "rows": hard,
            }))
            return 1
        return 0

    if args.command == 'design':
        table = read_study_table(args.table, args.p0)
        payload = cmd_design(table, args.budget, args.mode, config, args.oracle)
        _emit(to_json(payload), args.output)
        return 0

    if args.command == 'compare':
        table = read_study_table(args.table, args.p0)
        rows = cmd_compare(table, args.n_new, args.n1, config)
        _emit(to_json({"comparisons": rows}), args.output)
        return 0

    if args.command == 'simulate':
        sim = SimConfig(args.n, args.n0, args.true_p, args.p0, args.reps, args.seed)
        contour, lines, payload = cmd_simulate(sim, args.bins, args.bins_y or args.bins, config)
        contour_path = save_output(contour, args.out_dir, "contour.csv")
        save_output(lines, args.out_dir, "reference_lines.csv")
        stats_text = to_json(payload)
        save_output(stats_text, args.out_dir, "ratio_stats.json")
        logger.info(f"Saved: {os.path.dirname(contour_path)}")
        _emit(stats_text, args.output)
        return 0

    if args.command == 'curves':
        _emit(cmd_curves(args.n, args.n0, args.p0, args.true_p, config), args.output)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verbose:
        set_console_level(logging.DEBUG)
    elif args.quiet:
        set_console_level(logging.ERROR)

    try:
        config = build_config(args)
        return _run(args, config)
    except RelInfoError as e:
        sys.stderr.write(error_json(e.to_dict()))
        return 1
    except (ValueError, OSError) as e:
        sys.stderr.write(error_json({"type": type(e).__name__, "message": str(e)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
