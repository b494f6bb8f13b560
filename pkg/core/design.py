"""
Overall relative information across variables and follow-up allocation

The overall inverse relative information is the lod-weighted mean of the
per-variable plug-in E[RI^-1]. Each of those is linear in the number of
resolved values, so the objective is 1 + sum_i w_i n1_i and the allocation
problem is a bounded integer knapsack with optional fixed (setup) charges.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pybnb

from .config import MAX_ENUMERATION, UNIFORM_DESIGN_TOLERANCE, Config, resolve
from .errors import DomainError, EmptyWeightError, InstabilityError, SizeError
from .lod import lod_mle_vs_null
from .logger import get_logger, log_design_result
from .models import (
    ComparisonReport,
    DesignMode,
    DesignProblem,
    DesignSolution,
    VariableRecord,
)
from .rel_info import expected_inverse_ri, inverse_ri_slope, plugin_probability, plugin_summary

logger = get_logger(__name__)

# feasibility slack on the budget
BUDGET_TOL = 1e-9
# objective values closer than this count as ties
VALUE_TOL = 1e-12


@dataclass(frozen=True)
class _Term:
    """A stable variable reduced to what the objective needs"""
    record: VariableRecord
    lod_ob: float
    p: float
    slope: float

    @property
    def id(self) -> str:
        return self.record.id


def _terms(variables: Iterable[VariableRecord], config: Config) -> Tuple[List[_Term], List[str]]:
    """Split variables into stable terms and unstable ids"""
    terms, unstable = [], []
    for record in variables:
        cfg = record.cfg
        lod_ob = lod_mle_vs_null(cfg.observed, cfg.p0).natural
        if lod_ob < config.eps_lod:
            unstable.append(record.id)
            continue
        p = plugin_probability(cfg, config)
        terms.append(_Term(record, lod_ob, p, inverse_ri_slope(cfg, p, config)))
    return terms, unstable


def weighted_inverse_ri(lods: Sequence[float], inverse_ris: Sequence[float]) -> float:
    """sum_i lod_i RI_i^-1 / sum_i lod_i"""
    total = math.fsum(lods)
    return math.fsum(l * r for l, r in zip(lods, inverse_ris)) / total


def _check_allocation(record: VariableRecord, n1: int) -> int:
    if int(n1) != n1 or not 0 <= n1 <= record.max_resolvable:
        raise DomainError(
            f"{record.id}: allocation must be an integer in [0, {record.max_resolvable}], got {n1!r}"
        )
    return int(n1)


def combine_overall_inverse_ri(variables: List[VariableRecord], allocations: Dict[str, int],
                               config: Optional[Config] = None) -> float:
    """Overall inverse relative information of a follow-up allocation"""
    config = resolve(config)
    known = {v.id for v in variables}
    unknown = sorted(set(allocations) - known)
    if unknown:
        raise DomainError(f"allocations for unknown variables: {', '.join(unknown)}")

    terms, unstable = _terms(variables, config)
    if unstable:
        raise InstabilityError(
            f"observed lod below eps_lod for: {', '.join(unstable)}", ids=unstable
        )
    lods = [t.lod_ob for t in terms]
    if math.fsum(lods) < config.eps_lod:
        raise EmptyWeightError("total observed lod weight is zero")

    inverse_ris = []
    for t in terms:
        n1 = _check_allocation(t.record, allocations.get(t.id, 0))
        inverse_ris.append(expected_inverse_ri(t.record.cfg, t.p, n1, config))
    return weighted_inverse_ri(lods, inverse_ris)


# ============================================================
# SOLVERS
# ============================================================

@dataclass(frozen=True)
class KnapsackItem:
    id: str
    value: float        # objective gain per resolved value
    unit_cost: float
    setup_cost: float
    upper: int

    @property
    def ratio(self) -> float:
        return math.inf if self.unit_cost == 0 else self.value / self.unit_cost

    @property
    def amortized_ratio(self) -> float:
        full = self.unit_cost * self.upper + self.setup_cost
        return math.inf if full == 0 else self.value * self.upper / full

    def cost(self, n1: int) -> float:
        return 0.0 if n1 <= 0 else self.setup_cost + self.unit_cost * n1

    def most_affordable(self, budget: float) -> int:
        """Largest n1 <= upper whose cost fits, 0 if none"""
        if self.upper == 0 or budget + BUDGET_TOL < self.setup_cost + self.unit_cost:
            return 0
        if self.unit_cost == 0:
            return self.upper
        n1 = min(self.upper, int(math.floor((budget - self.setup_cost) / self.unit_cost + BUDGET_TOL)))
        while n1 > 0 and self.cost(n1) > budget + BUDGET_TOL:
            n1 -= 1
        return n1


def _items(terms: List[_Term]) -> List[KnapsackItem]:
    total = math.fsum(t.lod_ob for t in terms)
    return [
        KnapsackItem(t.id, t.lod_ob * t.slope / total, t.record.unit_cost,
              t.record.setup_cost, t.record.max_resolvable)
        for t in terms
    ]


def _greedy(items: List[KnapsackItem], budget: float) -> Dict[str, int]:
    """Fill variables by amortized value per cost, ties by id"""
    alloc = {}
    remaining = budget
    for item in sorted(items, key=lambda it: (-it.amortized_ratio, it.id)):
        n1 = item.most_affordable(remaining) if item.value > 0 else 0
        alloc[item.id] = n1
        remaining -= item.cost(n1)
    return alloc


def _relaxation(items: List[KnapsackItem], k: int, budget: float) -> float:
    """Fractional fill of items[k:] with setup costs dropped"""
    bound = 0.0
    for item in items[k:]:
        if budget <= 0:
            break
        if item.unit_cost == 0:
            bound += item.value * item.upper
            continue
        take = min(item.upper, budget / item.unit_cost)
        bound += item.value * take
        budget -= item.unit_cost * take
    return bound


class FixedChargeKnapsack(pybnb.Problem):
    """
    Bounded integer knapsack with setup charges, one tree level per variable.

    Items are ordered by value per unit cost, so the fractional fill of the
    remaining items bounds every completion and the bound is nondecreasing in
    the count chosen at the current level. Every node is a feasible allocation
    (unvisited variables at zero).
    """

    def __init__(self, items: List[KnapsackItem], budget: float, incumbent: float = -math.inf):
        self._items = sorted(items, key=lambda it: (-it.ratio, it.id))
        self._incumbent = incumbent
        self._level = 0
        self._remaining = budget
        self._value = 0.0
        self._counts: Tuple[int, ...] = ()

    def sense(self):
        return pybnb.maximize

    def objective(self):
        return self._value

    def bound(self):
        return self._value + _relaxation(self._items, self._level, self._remaining)

    def save_state(self, node):
        node.state = (self._level, self._remaining, self._value, self._counts)

    def load_state(self, node):
        self._level, self._remaining, self._value, self._counts = node.state

    def notify_new_best_node(self, node, current):
        self._incumbent = max(self._incumbent, node.objective)

    def branch(self):
        k = self._level
        if k == len(self._items):
            return
        item = self._items[k]
        top = item.most_affordable(self._remaining) if item.value > 0 else 0
        for n1 in range(top, 0, -1):
            rest = self._remaining - item.cost(n1)
            value = self._value + item.value * n1
            if value + _relaxation(self._items, k + 1, rest) <= self._incumbent + VALUE_TOL:
                # bound only shrinks as n1 decreases
                break
            yield self._child(rest, value, n1)
        yield self._child(self._remaining, self._value, 0)

    def _child(self, remaining: float, value: float, n1: int) -> pybnb.Node:
        child = pybnb.Node()
        child.objective = value
        child.state = (self._level + 1, remaining, value, self._counts + (n1,))
        return child

    def allocation(self, counts: Sequence[int]) -> Dict[str, int]:
        """Counts along a tree path; levels below the path stay at zero"""
        padded = list(counts) + [0] * (len(self._items) - len(counts))
        return {item.id: int(n1) for item, n1 in zip(self._items, padded)}


def _value_of(items: List[KnapsackItem], alloc: Dict[str, int]) -> float:
    return sum(it.value * alloc.get(it.id, 0) for it in items)


def _branch_and_bound(items: List[KnapsackItem], budget: float, seed: Dict[str, int]) -> Dict[str, int]:
    """Exact allocation, with the greedy fill as the starting incumbent"""
    seed_value = _value_of(items, seed)
    problem = FixedChargeKnapsack(items, budget, incumbent=seed_value)
    results = pybnb.Solver(comm=None).solve(
        problem,
        best_objective=seed_value,
        absolute_gap=0,
        relative_gap=0,
        queue_strategy="depth",
        log=None,
    )
    logger.debug(f"Branch and bound explored {results.nodes} node(s): {results.solution_status}")
    node = results.best_node
    if node is None or node.state is None or results.objective <= seed_value + VALUE_TOL:
        return dict(seed)
    return problem.allocation(node.state[3])


def _uniform(allocations: Dict[str, int]) -> bool:
    counts = list(allocations.values())
    if len(counts) < 2 or min(counts) == 0:
        return False
    mean = sum(counts) / len(counts)
    return max(abs(c - mean) for c in counts) <= UNIFORM_DESIGN_TOLERANCE * mean


def _solution(problem: DesignProblem, terms: List[_Term], unstable: List[str],
              alloc: Dict[str, int], optimal: bool, config: Config) -> DesignSolution:
    stable_records = [t.record for t in terms]
    allocations = {t.id: int(alloc.get(t.id, 0)) for t in sorted(terms, key=lambda t: t.id)}
    variability = {
        t.id: plugin_summary(t.record.cfg, allocations[t.id], config).sd_inverse_ri
        for t in sorted(terms, key=lambda t: t.id)
    }
    solution = DesignSolution(
        allocations=allocations,
        objective=combine_overall_inverse_ri(stable_records, allocations, config),
        budget_used=math.fsum(t.record.cost(allocations[t.id]) for t in terms),
        optimal=optimal,
        excluded=sorted(unstable),
        variability=variability,
        suggests_new_individuals=_uniform(allocations),
    )
    log_design_result(solution, problem.budget)
    return solution


def _stable_terms(problem: DesignProblem, config: Config) -> Tuple[List[_Term], List[str]]:
    terms, unstable = _terms(problem.variables, config)
    if unstable:
        logger.warning(
            f"Dropping {len(unstable)} unstable variable(s) from the objective: "
            f"{', '.join(sorted(unstable))}"
        )
    if not terms:
        raise EmptyWeightError("no stable variables left to weight the objective")
    return terms, unstable


def optimize_allocation(problem: DesignProblem, config: Optional[Config] = None) -> DesignSolution:
    """Maximize overall inverse RI subject to the follow-up budget"""
    config = resolve(config)
    terms, unstable = _stable_terms(problem, config)
    items = _items(terms)

    # free variables cost nothing at any level
    free = {it.id: it.upper for it in items
            if it.unit_cost == 0 and it.setup_cost == 0 and it.value > 0}
    paid = [it for it in items if it.id not in free]

    greedy = _greedy(paid, problem.budget)
    exact = problem.mode is DesignMode.EXACT and len(paid) <= config.exact_subset_limit
    if problem.mode is DesignMode.EXACT and not exact:
        logger.warning(
            f"{len(paid)} variables exceed exact_subset_limit={config.exact_subset_limit}; "
            f"falling back to greedy"
        )

    if exact:
        alloc = _branch_and_bound(paid, problem.budget, greedy)
    else:
        alloc = greedy
    logger.info(f"Solved {len(items)} variable(s) with {'branch and bound' if exact else 'greedy'}")

    alloc.update(free)
    return _solution(problem, terms, unstable, alloc, exact, config)


def brute_force_allocation(problem: DesignProblem, config: Optional[Config] = None) -> DesignSolution:
    """Exhaustive enumeration of every feasible integer allocation"""
    config = resolve(config)
    terms, unstable = _stable_terms(problem, config)
    items = sorted(_items(terms), key=lambda it: it.id)

    size = math.prod(it.upper + 1 for it in items)
    if size > MAX_ENUMERATION:
        raise SizeError(f"{size} allocations exceed the enumeration bound {MAX_ENUMERATION}")

    best, best_value = None, -math.inf
    for combo in itertools.product(*(range(it.upper + 1) for it in items)):
        cost = math.fsum(it.cost(n1) for it, n1 in zip(items, combo))
        if cost > problem.budget + BUDGET_TOL:
            continue
        value = sum(it.value * n1 for it, n1 in zip(items, combo))
        # lexicographic order of enumeration keeps the smallest tied vector
        if value > best_value + VALUE_TOL:
            best, best_value = combo, value

    alloc = {it.id: n1 for it, n1 in zip(items, best)}
    return _solution(problem, terms, unstable, alloc, True, config)


# ============================================================
# MARKERS VS INDIVIDUALS
# ============================================================

def compare_markers_vs_individuals(record: VariableRecord, n1_resolve: int, n_new: int,
                                   config: Optional[Config] = None) -> ComparisonReport:
    """
    Inverse-information factor of resolving n1_resolve missing values next to
    that of adding n_new individuals at the same missing rate, (n + n_new)/n.
    """
    config = resolve(config)
    if int(n_new) != n_new or n_new < 0:
        raise DomainError(f"n_new must be a nonnegative integer, got {n_new!r}")
    cfg = record.cfg
    if int(n1_resolve) != n1_resolve or not 0 <= n1_resolve <= cfg.n_missing:
        raise DomainError(f"n1_resolve must be an integer in [0, {cfg.n_missing}], got {n1_resolve!r}")
    if n1_resolve == 0:
        resolve_factor = 1.0
    else:
        resolve_factor = plugin_summary(cfg, n1_resolve, config).expected_inverse_ri
    new_factor = (cfg.n + n_new) / cfg.n

    if math.isclose(resolve_factor, new_factor, rel_tol=1e-12, abs_tol=1e-12):
        larger = "equal"
    elif resolve_factor > new_factor:
        larger = "resolve"
    else:
        larger = "new_individuals"

    return ComparisonReport(
        id=record.id,
        n1_resolve=int(n1_resolve),
        n_new=int(n_new),
        resolve_factor=resolve_factor,
        new_individuals_factor=new_factor,
        larger=larger,
        break_even_n_new=cfg.n * (resolve_factor - 1.0),
    )
