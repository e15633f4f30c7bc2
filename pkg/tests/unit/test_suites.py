"""Unit tests for suites module."""

import json
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from restricted_mc.errors import UnknownStrategy, UnknownSuite
from restricted_mc.problems import make_bit_restriction
from restricted_mc.strategy import tree_caps, worst_case_expected_cards
from restricted_mc.suites import (
    SUITE_STRATEGIES,
    SuiteOutcome,
    make_check,
    random_budgeted_strategy,
    random_grid_tree,
    resolve_strategy,
    run_bounds,
    run_engine,
    run_factor3,
    run_lemma1,
    run_lemma2,
    run_markov,
    run_oracle,
    run_suite,
    run_theorem1,
    suite_entries,
)


def check_names(outcome: SuiteOutcome) -> list[str]:
    """Check names in order."""
    return [check["check"] for check in outcome.checks]


class TestSuiteEntries:
    """Tests for the shipped strategy suite."""

    def test_all_members(self) -> None:
        """Test every member builds with declared caps."""
        entries = suite_entries()

        assert len(entries) == len(SUITE_STRATEGIES) == 15
        assert all(entry.strategy.caps is not None for entry in entries)

    def test_single_member(self) -> None:
        """Test selecting one member."""
        (entry,) = suite_entries("bit_then_query")

        assert entry.name == "bit_then_query"
        assert entry.budgets() == (1, 1)

    def test_budgets(self) -> None:
        """Test budgets are the ceiling of the largest expected cards."""
        assert suite_entries("coin")[0].budgets() == (0, 1)
        assert suite_entries("full_branching")[0].budgets() == (2, 2)
        assert suite_entries("lazy_coin")[0].budgets() == (1, 1)

    def test_unknown_member(self) -> None:
        """Test unknown members raise with a suggestion."""
        with pytest.raises(UnknownStrategy, match="coin"):
            suite_entries("con")


class TestResolveStrategy:
    """Tests for resolve_strategy function."""

    def test_suite_and_problem_strategies(self) -> None:
        """Test suite members and parametrized integrators resolve."""
        assert resolve_strategy("two_bits").name == "two_bits"
        assert resolve_strategy("midpoint", {"n": 2}).name == "midpoint(2)"
        assert resolve_strategy("bit_stratified", {"n_cells": 2, "bits_per_cell": 1}).caps == (2, 2)

    def test_json_file(self, tmp_path: Path) -> None:
        """Test decision-tree files resolve."""
        path = tmp_path / "leaf.json"
        path.write_text(json.dumps({"kind": "stop", "output": 1}), encoding="utf-8")

        assert resolve_strategy(str(path)).name == "leaf"

    def test_unknown(self) -> None:
        """Test unknown names raise."""
        with pytest.raises(UnknownStrategy):
            resolve_strategy("no_such_strategy")


class TestRandomStrategies:
    """Tests for random strategy generation."""

    def test_random_tree_respects_caps(self) -> None:
        """Test generated trees stay within their hard caps."""
        rng = np.random.default_rng(0)
        restriction = make_bit_restriction()
        for _ in range(20):
            info, rand = tree_caps(random_grid_tree(rng, 8, (2, 1), restriction))
            assert info <= 2
            assert rand <= 1

    def test_random_budgeted_strategy(self) -> None:
        """Test generated strategies meet their expected budgets."""
        rng = np.random.default_rng(1)
        restriction = make_bit_restriction()
        for i in range(10):
            strategy = random_budgeted_strategy(rng, 8, (1, 1), restriction, f"random_{i}")
            assert strategy.tree is not None
            info, rand = worst_case_expected_cards(strategy.tree, restriction)
            assert info <= 1
            assert rand <= 1


class TestPropertySuites:
    """Tests for the verification suites on small members."""

    def test_lemma1(self) -> None:
        """Test truncation checks pass."""
        outcome = run_lemma1(suite_entries("bit_then_query") + suite_entries("geometric_bits"))

        assert outcome.passed
        assert check_names(outcome)[:2] == ["truncation_output", "truncation_caps"]

    def test_lemma2_attains_cost_bound(self) -> None:
        """Test derandomization checks pass and the cost bound is attained."""
        outcome = run_lemma2(suite_entries("coin") + suite_entries("full_branching"))

        assert outcome.passed
        assert check_names(outcome)[-1] == "cost_bound_attained"
        assert "full_branching" in outcome.checks[-1]["witness"]

    def test_markov(self) -> None:
        """Test P(B_f) >= 1/3 for members within their budgets."""
        outcome = run_markov(suite_entries("lazy_coin") + suite_entries("biased_draw"))

        assert outcome.passed
        assert check_names(outcome) == ["markov_bound", "markov_bound"]

    def test_factor3(self) -> None:
        """Test the factor-3 inequality and the conditional-expectation identity."""
        outcome = run_factor3(suite_entries("adaptive_escalation") + suite_entries("trit_pair"))

        assert outcome.passed
        assert check_names(outcome)[:3] == ["factor3_inequality", "conditional_expectation", "pipeline_cost"]

    def test_theorem1_small_grid(self) -> None:
        """Test the lower bound holds on a short adversarial search."""
        outcome = run_theorem1(suite_entries("coin"), m=8, search_size=3)

        assert outcome.passed
        table = outcome.tables["theorem1"]
        assert table["n"].tolist() == [1, 2]
        assert table["k"].tolist() == [0, 0]
        assert table["counterexamples"].tolist() == [0, 0]

    def test_oracle(self) -> None:
        """Test the oracle suite for small grids."""
        outcome = run_oracle(3)

        assert outcome.passed
        assert len(outcome.checks) == 6

    def test_engine_deterministic_members(self) -> None:
        """Test closure, additivity and agreement for members with deterministic output."""
        outcome = run_engine(suite_entries("constant") + suite_entries("pure_info"), samples=50)

        assert outcome.passed
        assert check_names(outcome)[:3] == ["probability_closure", "cost_additivity", "sampled_agreement"]

    def test_engine_samples_first_middle_and_last_inputs(self) -> None:
        """Test sampled agreement is checked on the first, middle and last inputs."""
        entry = suite_entries("pure_info")[0]
        inputs = entry.problem.test_inputs()
        outcome = run_engine([entry], samples=50)

        subjects = [check["subject"] for check in outcome.checks if check["check"] == "sampled_agreement"]
        labels = [entry.problem.label(inputs[i]) for i in (0, len(inputs) // 2, len(inputs) - 1)]
        assert subjects == [f"pure_info on {label}" for label in labels]
        assert outcome.passed

    def test_bounds(self) -> None:
        """Test calculator constants and corollary consistency."""
        outcome = run_bounds()

        assert outcome.passed
        names = check_names(outcome)
        assert names.count("calculator") == 5
        assert names.count("cor3_eventual_form") == 1
        assert names.count("cor2_consistency") == 3


class TestRunSuite:
    """Tests for run_suite function."""

    def test_prints_status_lines(self) -> None:
        """Test one status line per check."""
        with patch("sys.stdout", new=StringIO()) as fake_out:
            outcome = run_suite("oracle")
            output = fake_out.getvalue()

        assert outcome.passed
        assert "[MODE] Running suite 'oracle'" in output
        assert output.count("[PASS]") == len(outcome.checks)

    def test_unknown_suite(self) -> None:
        """Test unknown suites raise with a suggestion."""
        with pytest.raises(UnknownSuite, match="markov"):
            run_suite("markv")

    def test_outcome_extend(self) -> None:
        """Test merging outcomes."""
        outcome = SuiteOutcome()
        outcome.extend(SuiteOutcome(checks=[make_check("a", "b", "c", passed=False, witness="w")]))

        assert not outcome.passed
        assert outcome.checks[0]["status"] == "[FAIL]"
