"""
Tests for the overall inverse relative information and follow-up allocation
Run with: python -m pytest tests/test_design.py -v
"""
import numpy as np
import pybnb
import pytest
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.config import Config
from core.design import (
    FixedChargeKnapsack,
    KnapsackItem,
    brute_force_allocation,
    combine_overall_inverse_ri,
    compare_markers_vs_individuals,
    optimize_allocation,
    weighted_inverse_ri,
)
from core.errors import BoundaryMleError, DomainError, EmptyWeightError, InstabilityError, SizeError
from core.lod import lod_mle_vs_null
from core.models import DesignMode, DesignProblem, StudyConfig, VariableRecord
from core.rel_info import expected_inverse_ri


@pytest.fixture
def pair():
    """Two stable variables with different observed sizes"""
    return [
        VariableRecord("A", StudyConfig(1000, 800, 440, 0.5)),
        VariableRecord("B", StudyConfig(300, 200, 130, 0.5), unit_cost=2.0),
    ]


@pytest.fixture
def greedy_trap():
    """Equal per-unit value; the cheap-looking variable blocks the better fill"""
    cfg = StudyConfig(100, 80, 48, 0.5)
    return [
        VariableRecord("A", cfg, unit_cost=1.0, setup_cost=0.0, max_resolvable=2),
        VariableRecord("B", cfg, unit_cost=0.5, setup_cost=6.0, max_resolvable=8),
    ]


def random_problem(rng):
    variables = []
    for k in range(int(rng.integers(1, 5))):
        n0 = int(rng.integers(20, 61))
        x0 = int(rng.integers(1, n0))
        if 2 * x0 == n0:
            x0 += 1
        upper = int(rng.integers(0, 6))
        variables.append(VariableRecord(
            id=f"v{k}",
            cfg=StudyConfig(n0 + upper + int(rng.integers(0, 4)), n0, x0, 0.5),
            unit_cost=float(rng.choice([0.0, 0.5, 1.0, 1.7, 3.0])),
            setup_cost=float(rng.choice([0.0, 0.0, 1.0, 2.5, 6.0])),
            max_resolvable=upper,
        ))
    return DesignProblem(variables, float(rng.uniform(0, 15)))


class TestCombine:
    """Tests for the lod-weighted overall inverse RI"""

    def test_weighted_mean_example(self):
        assert weighted_inverse_ri([4, 1], [1.25, 1.10]) == pytest.approx(1.22, abs=1e-12)

    def test_scale_invariant_in_lods(self):
        base = weighted_inverse_ri([4, 1, 2.5], [1.25, 1.10, 1.4])
        scaled = weighted_inverse_ri([40, 10, 25], [1.25, 1.10, 1.4])
        assert scaled == pytest.approx(base, rel=1e-14)

    def test_single_variable_reduces_to_its_ratio(self):
        record = VariableRecord("A", StudyConfig(100, 80, 44, 0.5))
        assert combine_overall_inverse_ri([record], {"A": 10}) == pytest.approx(1.125, abs=1e-12)

    def test_nothing_resolved(self, pair):
        assert combine_overall_inverse_ri(pair, {}) == pytest.approx(1.0, abs=1e-15)

    def test_linear_in_allocations(self, pair):
        lods = [lod_mle_vs_null(v.cfg.observed, v.cfg.p0).natural for v in pair]
        total = sum(lods)
        expected = 1 + (lods[0] * 150 / 800 + lods[1] * 40 / 200) / total
        value = combine_overall_inverse_ri(pair, {"A": 150, "B": 40})
        assert value == pytest.approx(expected, abs=1e-12)

    def test_nondecreasing_in_each_allocation(self, pair):
        values = [combine_overall_inverse_ri(pair, {"A": k, "B": 10}) for k in range(0, 201, 20)]
        assert values == sorted(values)

    def test_unknown_variable(self, pair):
        with pytest.raises(DomainError):
            combine_overall_inverse_ri(pair, {"C": 1})

    def test_allocation_out_of_range(self, pair):
        with pytest.raises(DomainError):
            combine_overall_inverse_ri(pair, {"B": 101})

    def test_unstable_variable_named(self, pair):
        variables = pair + [VariableRecord("C", StudyConfig(100, 80, 40, 0.5))]
        with pytest.raises(InstabilityError) as info:
            combine_overall_inverse_ri(variables, {"A": 1})
        assert info.value.ids == ["C"]


class TestCombineProperties:
    """The overall inverse RI over seeded random instances"""

    @staticmethod
    def instances(seed, count=300):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            problem = random_problem(rng)
            alloc = {v.id: int(rng.integers(0, v.max_resolvable + 1)) for v in problem.variables}
            yield rng, problem.variables, alloc

    def test_value_one_without_resolution(self):
        for _, variables, _ in self.instances(11):
            zeros = {v.id: 0 for v in variables}
            assert combine_overall_inverse_ri(variables, zeros) == pytest.approx(1.0, abs=1e-15)
            assert combine_overall_inverse_ri(variables, {}) == pytest.approx(1.0, abs=1e-15)

    def test_single_variable_reduces_to_its_ratio(self):
        for _, variables, alloc in self.instances(12):
            v = variables[0]
            n1 = alloc[v.id]
            value = combine_overall_inverse_ri([v], {v.id: n1})
            assert value == pytest.approx(expected_inverse_ri(v.cfg, v.cfg.p_hat, n1), abs=1e-12)
            assert value == pytest.approx(1 + n1 / v.cfg.n0, abs=1e-12)

    def test_scale_invariant_in_lods(self):
        for rng, variables, alloc in self.instances(13):
            lods = [lod_mle_vs_null(v.cfg.observed, v.cfg.p0).natural for v in variables]
            ris = [expected_inverse_ri(v.cfg, v.cfg.p_hat, alloc[v.id]) for v in variables]
            overall = combine_overall_inverse_ri(variables, alloc)
            assert weighted_inverse_ri(lods, ris) == pytest.approx(overall, abs=1e-12)
            scale = float(rng.choice([1e-4, 0.3, 7.0, 1e5]))
            scaled = weighted_inverse_ri([scale * l for l in lods], ris)
            assert scaled == pytest.approx(overall, rel=1e-12)

    def test_nondecreasing_in_each_allocation(self):
        for _, variables, alloc in self.instances(14):
            base = combine_overall_inverse_ri(variables, alloc)
            for v in variables:
                if alloc[v.id] < v.max_resolvable:
                    more = dict(alloc, **{v.id: alloc[v.id] + 1})
                    assert combine_overall_inverse_ri(variables, more) >= base - 1e-15


class TestOptimizeAllocation:
    """Tests for the budget-constrained allocation"""

    def test_zero_budget(self, pair):
        solution = optimize_allocation(DesignProblem(pair, 0.0))
        assert solution.allocations == {"A": 0, "B": 0}
        assert solution.objective == pytest.approx(1.0)
        assert solution.budget_used == 0.0

    def test_budget_covers_everything(self, pair):
        solution = optimize_allocation(DesignProblem(pair, 1e6))
        assert solution.allocations == {"A": 200, "B": 100}
        assert solution.optimal

    def test_exact_beats_greedy_on_setup_costs(self, greedy_trap):
        exact = optimize_allocation(DesignProblem(greedy_trap, 10.0, DesignMode.EXACT))
        greedy = optimize_allocation(DesignProblem(greedy_trap, 10.0, DesignMode.GREEDY))
        assert exact.allocations == {"A": 0, "B": 8}
        assert exact.objective == pytest.approx(1 + 8 / 160, abs=1e-12)
        assert exact.optimal
        assert greedy.allocations == {"A": 2, "B": 4}
        assert greedy.objective == pytest.approx(1 + 6 / 160, abs=1e-12)
        assert not greedy.optimal

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(20240611)
        for _ in range(200):
            problem = random_problem(rng)
            exact = optimize_allocation(problem)
            oracle = brute_force_allocation(problem)
            assert exact.objective == pytest.approx(oracle.objective, abs=1e-9)
            assert problem.total_cost(exact.allocations) <= problem.budget + 1e-9
            assert exact.objective == pytest.approx(
                combine_overall_inverse_ri(problem.variables, exact.allocations), abs=1e-12)

    def test_greedy_never_beats_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            problem = random_problem(rng)
            exact = optimize_allocation(problem)
            problem.mode = DesignMode.GREEDY
            greedy = optimize_allocation(problem)
            assert greedy.objective <= exact.objective + 1e-12
            assert greedy.budget_used <= problem.budget + 1e-9

    def test_objective_nondecreasing_in_budget(self, greedy_trap):
        values = [optimize_allocation(DesignProblem(greedy_trap, b)).objective
                  for b in np.linspace(0, 12, 25)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_string_mode(self, greedy_trap):
        assert DesignProblem(greedy_trap, 10.0, "greedy").mode is DesignMode.GREEDY

    def test_free_variables_filled(self, pair):
        free = VariableRecord("F", StudyConfig(50, 40, 30, 0.5), unit_cost=0.0)
        solution = optimize_allocation(DesignProblem(pair + [free], 5.0))
        assert solution.allocations["F"] == 10
        assert solution.budget_used <= 5.0

    def test_unstable_variable_excluded(self, pair):
        unstable = VariableRecord("C", StudyConfig(100, 80, 40, 0.5))
        solution = optimize_allocation(DesignProblem(pair + [unstable], 50.0))
        assert solution.excluded == ["C"]
        assert "C" not in solution.allocations

    def test_all_unstable(self):
        only = [VariableRecord("C", StudyConfig(100, 80, 40, 0.5))]
        with pytest.raises(EmptyWeightError):
            optimize_allocation(DesignProblem(only, 10.0))

    def test_boundary_mle(self):
        record = VariableRecord("Z", StudyConfig(100, 80, 0, 0.5))
        with pytest.raises(BoundaryMleError):
            optimize_allocation(DesignProblem([record], 10.0))
        solution = optimize_allocation(DesignProblem([record], 10.0),
                                       Config(continuity_correction=True))
        assert solution.allocations == {"Z": 10}

    def test_exact_limit_falls_back(self, greedy_trap):
        problem = DesignProblem(greedy_trap, 10.0)
        solution = optimize_allocation(problem, Config(exact_subset_limit=1))
        assert not solution.optimal
        assert solution.allocations == {"A": 2, "B": 4}

    def test_uniform_allocation_flagged(self):
        cfg = StudyConfig(100, 80, 48, 0.5)
        variables = [VariableRecord(v, cfg) for v in ("A", "B", "C")]
        solution = optimize_allocation(DesignProblem(variables, 60.0))
        assert solution.allocations == {"A": 20, "B": 20, "C": 20}
        assert solution.suggests_new_individuals

    def test_variability_reported(self, pair):
        solution = optimize_allocation(DesignProblem(pair, 100.0))
        assert set(solution.variability) == {"A", "B"}
        assert all(sd >= 0 for sd in solution.variability.values())

    def test_problem_validation(self, pair):
        with pytest.raises(DomainError):
            DesignProblem([], 1.0)
        with pytest.raises(DomainError):
            DesignProblem(pair + [pair[0]], 1.0)
        with pytest.raises(DomainError):
            DesignProblem(pair, -1.0)


class TestFixedChargeKnapsack:
    """Tests for the exact search run directly through pybnb"""

    @staticmethod
    def solve(problem):
        return pybnb.Solver(comm=None).solve(
            problem, absolute_gap=0, relative_gap=0, queue_strategy="depth", log=None)

    def test_unseeded_search_finds_optimum(self):
        items = [KnapsackItem("A", 1.0, 1.0, 0.0, 2), KnapsackItem("B", 1.0, 0.5, 6.0, 8)]
        problem = FixedChargeKnapsack(items, 10.0)
        results = self.solve(problem)
        assert results.objective == pytest.approx(8.0)
        assert problem.allocation(results.best_node.state[3]) == {"A": 0, "B": 8}

    def test_nothing_affordable(self):
        problem = FixedChargeKnapsack([KnapsackItem("A", 1.0, 5.0, 1.0, 3)], 4.0)
        results = self.solve(problem)
        assert results.objective == 0.0

    def test_root_bound_is_setup_free_fill(self):
        items = [KnapsackItem("A", 2.0, 1.0, 3.0, 4), KnapsackItem("B", 1.0, 1.0, 0.0, 10)]
        problem = FixedChargeKnapsack(items, 6.0)
        assert problem.bound() == pytest.approx(2.0 * 4 + 1.0 * 2)
        assert problem.objective() == 0.0

    def test_partial_path_pads_with_zeros(self):
        items = [KnapsackItem("A", 1.0, 1.0, 0.0, 2), KnapsackItem("B", 1.0, 0.5, 6.0, 8)]
        assert FixedChargeKnapsack(items, 10.0).allocation([8]) == {"B": 8, "A": 0}


class TestBruteForce:

    def test_size_limit(self):
        variables = [VariableRecord(f"v{k}", StudyConfig(300, 100, 60, 0.5)) for k in range(3)]
        with pytest.raises(SizeError):
            brute_force_allocation(DesignProblem(variables, 10.0))

    def test_greedy_trap(self, greedy_trap):
        solution = brute_force_allocation(DesignProblem(greedy_trap, 10.0))
        assert solution.allocations == {"A": 0, "B": 8}

    def test_single_variable(self):
        record = VariableRecord("A", StudyConfig(100, 95, 60, 0.5), unit_cost=2.0)
        solution = brute_force_allocation(DesignProblem([record], 6.0))
        assert solution.allocations == {"A": 3}


class TestCompare:
    """Tests for resolving missing values vs adding individuals"""

    @pytest.fixture
    def record(self):
        return VariableRecord("A", StudyConfig(1000, 800, 440, 0.5))

    def test_break_even(self, record):
        report = compare_markers_vs_individuals(record, 200, 250)
        assert report.resolve_factor == pytest.approx(1.25, abs=1e-12)
        assert report.new_individuals_factor == pytest.approx(1.25)
        assert report.larger == "equal"
        assert report.break_even_n_new == pytest.approx(250, abs=1e-9)

    def test_partial_resolution(self, record):
        report = compare_markers_vs_individuals(record, 100, 0)
        assert report.resolve_factor == pytest.approx(1.125, abs=1e-12)
        assert report.break_even_n_new == pytest.approx(125, abs=1e-9)

    def test_resolve_wins(self, record):
        assert compare_markers_vs_individuals(record, 200, 100).larger == "resolve"

    def test_new_individuals_win(self, record):
        assert compare_markers_vs_individuals(record, 200, 400).larger == "new_individuals"

    def test_nothing_resolved(self, record):
        report = compare_markers_vs_individuals(record, 0, 0)
        assert report.resolve_factor == 1.0
        assert report.larger == "equal"
        assert report.break_even_n_new == 0.0

    @pytest.mark.parametrize("n1,n_new", [(201, 0), (-1, 0), (10, -5)])
    def test_invalid(self, record, n1, n_new):
        with pytest.raises(DomainError):
            compare_markers_vs_individuals(record, n1, n_new)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
