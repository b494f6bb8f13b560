"""
Structured Logging Configuration
================================
Centralized logging for the relinfo project
"""

import logging
from datetime import datetime
from pathlib import Path

# Log directory
LOG_DIR = Path(__file__).parent.parent / "logs"

# Log file with date
LOG_FILE = LOG_DIR / f"relinfo_{datetime.now().strftime('%Y%m%d')}.log"

_console_level = logging.INFO
_console_handlers = []


def _file_handler():
    """Dated file handler, or None when the log directory is not writable"""
    try:
        LOG_DIR.mkdir(exist_ok=True)
        handler = logging.FileHandler(LOG_FILE, encoding='utf-8')
    except OSError:
        return None
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(
        '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))
    return handler


def get_logger(name: str) -> logging.Logger:
    """
    Get a configured logger instance

    Args:
        name: Logger name (usually __name__ from calling module)

    Returns:
        Configured logger instance

    Usage:
        from core.logger import get_logger
        logger = get_logger(__name__)
        logger.info("Message here")
    """
    logger = logging.getLogger(name)

    # Only configure if not already configured
    if not logger.handlers:
        logger.setLevel(logging.DEBUG)
        logger.propagate = False

        # Console handler (stderr, INFO and above by default)
        console_handler = logging.StreamHandler()
        console_handler.setLevel(_console_level)
        console_handler.setFormatter(logging.Formatter('[%(levelname)s] %(message)s'))
        logger.addHandler(console_handler)
        _console_handlers.append(console_handler)

        file_handler = _file_handler()
        if file_handler is not None:
            logger.addHandler(file_handler)

    return logger


def set_console_level(level: int) -> None:
    """Change the console threshold of every logger created so far (and later)"""
    global _console_level
    _console_level = level
    for handler in _console_handlers:
        handler.setLevel(level)


def log_summary_result(variable_id: str, summary) -> None:
    """Log a relative-information summary"""
    logger = get_logger("rel_info")
    logger.debug(
        f"{variable_id}: E[RI^-1]={summary.expected_inverse_ri:.6g} "
        f"sd={summary.sd_inverse_ri:.6g} RI1={summary.plugin_ri1:.6g} stable={summary.stable}"
    )


def log_design_result(solution, budget: float) -> None:
    """Log optimizer results"""
    logger = get_logger("design")
    active = sum(1 for n1 in solution.allocations.values() if n1 > 0)
    logger.info(
        f"Design: objective {solution.objective:.6f}, {active} active variable(s), "
        f"budget used {solution.budget_used:.6g}/{budget:.6g}, optimal={solution.optimal}"
    )
    if solution.excluded:
        logger.warning(f"Excluded unstable variables: {', '.join(solution.excluded)}")


def log_simulation_result(sample) -> None:
    """Log a joint-lod simulation"""
    logger = get_logger("montecarlo")
    cfg = sample.config
    logger.info(
        f"Simulated {cfg.replicates} replicate(s) "
        f"(n={cfg.n}, n0={cfg.n0}, p={cfg.true_p}, p0={cfg.p0}, seed={cfg.seed})"
    )
