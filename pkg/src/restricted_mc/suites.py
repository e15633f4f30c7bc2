"""Shipped strategy suite and the property-verification suites."""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from restricted_mc.algebra import ArithmeticMode, ExtendedOutput, outputs_equal, zero_like
from restricted_mc.bounds import (
    brute_force_det_minimal_error,
    cor2_bit_lower_bound,
    cor2_error_threshold,
    cor3_bit_lower_bound,
    cor3_threshold_n0,
    det_minimal_error_grid,
    grid_adversary_inputs,
    grid_det_error,
    kappa,
    lipschitz_adversary_inputs,
    theorem1_inflated_cardinality,
    theorem1_lower_bound,
)
from restricted_mc.engine import (
    conditional_expectation,
    empirical_error,
    enumerate_branches,
    expected_cards,
    expected_output,
    prob_within_caps,
    run_with_draws,
    sampled_mean,
)
from restricted_mc.errors import UnknownStrategy, UnknownSuite
from restricted_mc.models import BoundParams, CheckResult, FiniteRestriction, Problem, Strategy, TreeNode
from restricted_mc.name_matcher import unknown_name_message
from restricted_mc.problems import (
    PROBLEM_STRATEGIES,
    bit_stratified_mc,
    make_bit_restriction,
    make_finite_restriction,
    make_grid_family,
    make_grid_problem,
    make_lipschitz_problem,
    midpoint_rule,
    sawtooth,
)
from restricted_mc.strategy import (
    ask_info,
    ask_rand,
    load_tree_strategy,
    stop,
    tree_strategy,
    worst_case_expected_cards,
)
from restricted_mc.transforms import derandomize, theorem1_pipeline, truncate

SUITE_NAMES = ("lemma1", "lemma2", "markov", "factor3", "theorem1", "oracle", "engine", "bounds", "all")
THEOREM1_BUDGETS: tuple[tuple[int, int], ...] = ((1, 0), (2, 0), (1, 1))
DEFAULT_THEOREM1_M = 32
DEFAULT_SEARCH_SIZE = 100
DEFAULT_ENGINE_SAMPLES = 10_000
MAX_GENERATION_ATTEMPTS = 50
ORACLE_MAX_M = 4
STOP_OUTPUTS = (Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1))


@dataclass(frozen=True)
class SuiteEntry:
    """A strategy with the restriction and problem it is verified on."""

    name: str
    strategy: Strategy
    restriction: FiniteRestriction
    problem: Problem

    def budgets(self, mode: ArithmeticMode = "rational") -> tuple[int, int]:
        """Smallest integer budgets (n, k) covering the expected cards on every input."""
        info = 0
        rand = 0
        for f in self.problem.test_inputs():
            card_info, card_rand = expected_cards(self.strategy, self.problem, f, self.restriction, mode)
            info = max(info, math.ceil(card_info))
            rand = max(rand, math.ceil(card_rand))
        return info, rand


@dataclass
class SuiteOutcome:
    """Checks produced by one or more suites, plus any tables they built."""

    checks: list[CheckResult] = field(default_factory=lambda: [])
    tables: dict[str, pd.DataFrame] = field(default_factory=lambda: {})

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(check["passed"] for check in self.checks)

    def extend(self, other: SuiteOutcome) -> None:
        """Append another outcome's checks and tables."""
        self.checks.extend(other.checks)
        self.tables.update(other.tables)


def make_check(suite: str, check: str, subject: str, passed: bool, witness: str) -> CheckResult:
    """Build a check record."""
    return CheckResult(
        suite=suite,
        check=check,
        subject=subject,
        passed=passed,
        status="[PASS]" if passed else "[FAIL]",
        witness=witness,
    )


# Shipped strategies


def _info_leaf(coordinate: int, output: Callable[[int], Any]) -> TreeNode:
    return ask_info(coordinate, {-1: stop(output(-1)), 1: stop(output(1))})


def _echo(coordinate: int) -> TreeNode:
    return _info_leaf(coordinate, lambda v: v)


def _average_of(coordinates: Sequence[int], seen: tuple[int, ...] = ()) -> TreeNode:
    if not coordinates:
        return stop(Fraction(sum(seen), len(seen)))
    first, rest = coordinates[0], coordinates[1:]
    return ask_info(first, {v: _average_of(rest, (*seen, v)) for v in (-1, 1)})


def coin_tree() -> TreeNode:
    """Ask bit 1; output +1 on u₁ and −1 on u₀."""
    return ask_rand(1, {0: stop(-1), 1: stop(1)})


def _grid_entry(name: str, tree: TreeNode, m: int, restriction: FiniteRestriction | None = None) -> SuiteEntry:
    return SuiteEntry(
        name,
        tree_strategy(tree, name=name),
        restriction or make_bit_restriction(),
        make_grid_problem(m),
    )


def _trits() -> FiniteRestriction:
    return make_finite_restriction(("a", "b", "c"))


def _coin() -> SuiteEntry:
    return _grid_entry("coin", coin_tree(), 1)


def _constant() -> SuiteEntry:
    return _grid_entry("constant", stop(7), 2)


def _pure_info() -> SuiteEntry:
    return _grid_entry("pure_info", _echo(1), 2)


def _bit_then_query() -> SuiteEntry:
    return _grid_entry("bit_then_query", ask_rand(1, {0: _echo(1), 1: _echo(2)}), 2)


def _two_bits() -> SuiteEntry:
    outputs = {(0, 0): Fraction(-1), (0, 1): Fraction(-1, 3), (1, 0): Fraction(1, 3), (1, 1): Fraction(1)}
    tree = ask_rand(1, {a: ask_rand(2, {b: stop(outputs[a, b]) for b in (0, 1)}) for a in (0, 1)})
    return _grid_entry("two_bits", tree, 2)


def _full_branching() -> SuiteEntry:
    pairs = {(0, 0): (1, 2), (0, 1): (2, 3), (1, 0): (3, 4), (1, 1): (4, 1)}
    tree = ask_rand(1, {a: ask_rand(2, {b: _average_of(pairs[a, b]) for b in (0, 1)}) for a in (0, 1)})
    return _grid_entry("full_branching", tree, 4)


def _random_coordinate() -> SuiteEntry:
    tree = ask_rand(1, {a: ask_rand(2, {b: _echo(2 * a + b + 1) for b in (0, 1)}) for a in (0, 1)})
    return _grid_entry("random_coordinate", tree, 4)


def _trit_coordinate() -> SuiteEntry:
    tree = ask_rand(1, {symbol: _echo(i + 1) for i, symbol in enumerate("abc")})
    return _grid_entry("trit_coordinate", tree, 3, _trits())


def _trit_pair() -> SuiteEntry:
    pairs = {"a": (2, 3), "b": (1, 3), "c": (1, 2)}
    tree = ask_rand(1, {symbol: _average_of(pairs[symbol]) for symbol in "abc"})
    return _grid_entry("trit_pair", tree, 3, _trits())


def _adaptive_escalation() -> SuiteEntry:
    escalate = ask_rand(1, {0: _average_of((2, 3)), 1: _average_of((3, 4))})
    tree = ask_info(1, {1: stop(1), -1: escalate})
    return _grid_entry("adaptive_escalation", tree, 4)


def _lazy_coin() -> SuiteEntry:
    return _grid_entry("lazy_coin", ask_rand(1, {0: stop(0), 1: _echo(1)}), 2)


def _geometric_bits() -> SuiteEntry:
    tree: TreeNode = stop(0)
    for index in (3, 2, 1):
        tree = ask_rand(index, {1: _echo(index), 0: tree})
    return _grid_entry("geometric_bits", tree, 4)


def _biased_draw() -> SuiteEntry:
    restriction = make_finite_restriction((0, 1), (Fraction(9, 10), Fraction(1, 10)))
    return _grid_entry("biased_draw", ask_rand(1, {0: _echo(1), 1: _echo(2)}), 2, restriction)


def _sign_flip_estimator() -> SuiteEntry:
    tree = ask_rand(1, {0: _info_leaf(1, lambda v: -v), 1: _echo(1)})
    return _grid_entry("sign_flip_estimator", tree, 2)


def _three_bit_interleaved() -> SuiteEntry:
    def level(depth: int, seen: tuple[int, ...]) -> TreeNode:
        if depth == 3:
            return stop(Fraction(sum(seen), 3))
        return ask_rand(
            depth + 1,
            {
                bit: ask_info(2 * depth + bit + 1, {v: level(depth + 1, (*seen, v)) for v in (-1, 1)})
                for bit in (0, 1)
            },
        )

    return _grid_entry("three_bit_interleaved", level(0, ()), 6)


SUITE_STRATEGIES: dict[str, Callable[[], SuiteEntry]] = {
    "coin": _coin,
    "constant": _constant,
    "pure_info": _pure_info,
    "bit_then_query": _bit_then_query,
    "two_bits": _two_bits,
    "full_branching": _full_branching,
    "random_coordinate": _random_coordinate,
    "trit_coordinate": _trit_coordinate,
    "trit_pair": _trit_pair,
    "adaptive_escalation": _adaptive_escalation,
    "lazy_coin": _lazy_coin,
    "geometric_bits": _geometric_bits,
    "biased_draw": _biased_draw,
    "sign_flip_estimator": _sign_flip_estimator,
    "three_bit_interleaved": _three_bit_interleaved,
}


def suite_entries(only: str | None = None) -> list[SuiteEntry]:
    """Build the shipped suite, or the single member named ``only``.

    Raises:
        UnknownStrategy: If ``only`` is not a suite member
    """
    if only is None:
        return [build() for build in SUITE_STRATEGIES.values()]
    if only not in SUITE_STRATEGIES:
        raise UnknownStrategy(unknown_name_message("strategy", only, SUITE_STRATEGIES))
    return [SUITE_STRATEGIES[only]()]


def resolve_strategy(name: str, params: dict[str, Any] | None = None) -> Strategy:
    """Resolve a built-in strategy name or a decision-tree JSON path.

    Raises:
        UnknownStrategy: If the name is neither built in nor an existing file
    """
    if name in SUITE_STRATEGIES:
        return SUITE_STRATEGIES[name]().strategy
    if name in PROBLEM_STRATEGIES:
        return PROBLEM_STRATEGIES[name](**(params or {}))
    if name.endswith(".json") or Path(name).exists():
        return load_tree_strategy(name)
    raise UnknownStrategy(unknown_name_message("strategy", name, [*SUITE_STRATEGIES, *PROBLEM_STRATEGIES]))


# Random strategies for the adversarial search


def random_grid_tree(
    rng: np.random.Generator,
    m: int,
    caps: tuple[int, int],
    restriction: FiniteRestriction,
    stop_probability: float = 0.25,
) -> TreeNode:
    """Random decision tree on the grid problem with at most ``caps`` calls on any path."""

    def grow(info: int, rand: int, seen: tuple[int, ...]) -> TreeNode:
        options: list[str] = []
        if info < caps[0]:
            options.append("info")
        if rand < caps[1]:
            options.append("rand")
        if not options or rng.random() < stop_probability:
            if seen and rng.random() < 0.7:
                return stop(Fraction(sum(seen), len(seen)))
            return stop(STOP_OUTPUTS[int(rng.integers(len(STOP_OUTPUTS)))])
        if options[int(rng.integers(len(options)))] == "info":
            coordinate = int(rng.integers(1, m + 1))
            return ask_info(coordinate, {v: grow(info + 1, rand, (*seen, v)) for v in (-1, 1)})
        return ask_rand(rand + 1, {value: grow(info, rand + 1, seen) for value in restriction.alphabet})

    return grow(0, 0, ())


def random_budgeted_strategy(
    rng: np.random.Generator,
    m: int,
    budgets: tuple[int, int],
    restriction: FiniteRestriction,
    name: str,
) -> Strategy:
    """Random strategy whose expected cards stay within ``budgets`` on every input.

    Trees with hard limit (3n, 3k) are tried first and accepted on their
    input-independent expected-cost bound; the fallback uses hard limit (n, k).
    """
    n, k = budgets
    if k > 0:
        for _ in range(MAX_GENERATION_ATTEMPTS):
            tree = random_grid_tree(rng, m, (3 * n, 3 * k), restriction)
            info, rand = worst_case_expected_cards(tree, restriction)
            if info <= n and rand <= k:
                return tree_strategy(tree, name=name)
    return tree_strategy(random_grid_tree(rng, m, (n, k), restriction), name=name)


def _fixed_search_strategies(m: int) -> list[tuple[Strategy, tuple[int, int]]]:
    half = m // 2 + 1
    return [
        (tree_strategy(_echo(1), name="coordinate_1"), (1, 0)),
        (tree_strategy(_average_of((1, 2)), name="pair_average"), (2, 0)),
        (tree_strategy(ask_rand(1, {0: _echo(1), 1: _echo(half)}), name="random_half"), (1, 1)),
        (tree_strategy(ask_rand(1, {0: stop(0), 1: _average_of((1, half))}), name="lazy_pair"), (1, 1)),
    ]


# Suites


def _subject(entry: SuiteEntry, f: Any) -> str:
    return f"{entry.name} on {entry.problem.label(f)}"


def run_lemma1(entries: Sequence[SuiteEntry], mode: ArithmeticMode = "rational") -> SuiteOutcome:
    """Truncation reproduces (A·1_B, 1_B) on every branch and respects its caps pointwise."""
    outcome = SuiteOutcome()
    for entry in entries:
        n, k = entry.budgets(mode)
        cap_pairs = sorted({(0, 0), (n, k), (max(n - 1, 0), k), (n, max(k - 1, 0)), (3 * n, 3 * k)})
        mismatches: list[str] = []
        cap_breaches: list[str] = []
        branches_checked = 0
        for cap_info, cap_rand in cap_pairs:
            truncated = truncate(entry.strategy, cap_info, cap_rand, problem=entry.problem)
            for f in entry.problem.test_inputs():
                for branch in enumerate_branches(entry.strategy, entry.problem, f, entry.restriction, mode=mode):
                    result = branch.result
                    draws = result.transcript.rand_draws()
                    replay = run_with_draws(truncated, entry.problem, f, entry.restriction, draws)
                    inside = result.card_info <= cap_info and result.card_rand <= cap_rand
                    wanted = (
                        ExtendedOutput(result.output, 1)
                        if inside
                        else ExtendedOutput(zero_like(entry.strategy.fallback_output), 0)
                    )
                    branches_checked += 1
                    if not outputs_equal(replay.output, wanted):
                        label = f"caps ({cap_info},{cap_rand}) {_subject(entry, f)}"
                        mismatches.append(f"{label}: {replay.output} != {wanted}")
                    if replay.card_info > cap_info or replay.card_rand > cap_rand:
                        cap_breaches.append(f"caps ({cap_info},{cap_rand}) {_subject(entry, f)}")
        outcome.checks.append(
            make_check(
                "lemma1",
                "truncation_output",
                entry.name,
                not mismatches,
                mismatches[0] if mismatches else f"{branches_checked} branches match over caps {cap_pairs}",
            )
        )
        outcome.checks.append(
            make_check(
                "lemma1",
                "truncation_caps",
                entry.name,
                not cap_breaches,
                cap_breaches[0] if cap_breaches else "pointwise caps hold on every branch",
            )
        )
    return outcome


def run_lemma2(entries: Sequence[SuiteEntry], mode: ArithmeticMode = "rational") -> SuiteOutcome:
    """Derandomized trees equal E A(f,·) and cost at most n·|K'|^k."""
    outcome = SuiteOutcome()
    attained: list[str] = []
    for entry in entries:
        caps = entry.strategy.caps
        tree = derandomize(entry.strategy, entry.restriction, entry.problem, mode=mode)
        bound = tree.cost_bound if tree.cost_bound is not None else 0
        mismatches: list[str] = []
        worst = 0
        for f in entry.problem.test_inputs():
            result = tree.evaluate(entry.problem, f)
            wanted = expected_output(entry.strategy, entry.problem, f, entry.restriction, mode)
            worst = max(worst, result.card_info)
            if not outputs_equal(result.output, wanted):
                mismatches.append(f"{_subject(entry, f)}: tree {result.output} != expectation {wanted}")
        if worst == bound:
            attained.append(entry.name)
        outcome.checks.append(
            make_check(
                "lemma2",
                "derandomize_exact",
                entry.name,
                not mismatches,
                mismatches[0] if mismatches else f"tree equals E A(f,·) on {len(entry.problem.test_inputs())} inputs",
            )
        )
        outcome.checks.append(
            make_check(
                "lemma2",
                "derandomize_cost",
                entry.name,
                worst <= bound,
                f"worst cardInfo {worst} <= n|K'|^k = {bound} with caps {caps}",
            )
        )
    if len(entries) > 1:
        outcome.checks.append(
            make_check(
                "lemma2",
                "cost_bound_attained",
                "suite",
                bool(attained),
                f"equality attained by {', '.join(attained)}" if attained else "no member attains n|K'|^k",
            )
        )
    return outcome


def run_markov(
    entries: Sequence[SuiteEntry],
    mode: ArithmeticMode = "rational",
    budgets: tuple[int, int] | None = None,
) -> SuiteOutcome:
    """P(B_f) ≥ 1/3 at caps (3n, 3k) whenever the expected cards are within (n, k)."""
    outcome = SuiteOutcome()
    third = Fraction(1, 3) if mode == "rational" else 1 / 3
    for entry in entries:
        n, k = budgets if budgets is not None else entry.budgets(mode)
        lowest = None
        witness_input = ""
        for f in entry.problem.test_inputs():
            info, rand = expected_cards(entry.strategy, entry.problem, f, entry.restriction, mode)
            if info > n or rand > k:
                continue
            p = prob_within_caps(entry.strategy, entry.problem, f, entry.restriction, 3 * n, 3 * k, mode)
            if lowest is None or p < lowest:
                lowest = p
                witness_input = entry.problem.label(f)
        passed = lowest is None or lowest >= third
        witness = (
            "no input within budgets"
            if lowest is None
            else f"min P(B_f)={lowest} >= 1/3 at caps ({3 * n},{3 * k}) on {witness_input}"
        )
        outcome.checks.append(make_check("markov", "markov_bound", entry.name, passed, witness))
    return outcome


def run_factor3(entries: Sequence[SuiteEntry], mode: ArithmeticMode = "rational") -> SuiteOutcome:
    """Per input: ‖S(f) − Ã*(f)‖ ≤ 3·E‖S(f) − A(f,·)‖ and Ã*(f) = E(A(f,·) | B_f)."""
    outcome = SuiteOutcome()
    for entry in entries:
        n, k = entry.budgets(mode)
        tree = theorem1_pipeline(entry.strategy, (n, k), entry.restriction, entry.problem, mode)
        bound = theorem1_inflated_cardinality(n, k, max(entry.restriction.size, 2)) if n > 0 else 0
        violations: list[str] = []
        conditional_mismatches: list[str] = []
        worst_cost = 0
        for f in entry.problem.test_inputs():
            result = tree.evaluate(entry.problem, f)
            worst_cost = max(worst_cost, result.card_info)
            lhs = entry.problem.error(f, result.output)
            branches = enumerate_branches(entry.strategy, entry.problem, f, entry.restriction, mode=mode)
            rhs = 3 * sum(b.probability * entry.problem.error(f, b.result.output) for b in branches)
            if lhs > rhs and not outputs_equal(lhs, rhs):
                violations.append(f"{_subject(entry, f)}: {lhs} > {rhs}")
            conditional = conditional_expectation(
                entry.strategy, entry.problem, f, entry.restriction, 3 * n, 3 * k, mode
            )
            if not outputs_equal(result.output, conditional):
                conditional_mismatches.append(f"{_subject(entry, f)}: {result.output} != {conditional}")
        outcome.checks.append(
            make_check(
                "factor3",
                "factor3_inequality",
                entry.name,
                not violations,
                violations[0] if violations else f"holds on {len(entry.problem.test_inputs())} inputs at ({n},{k})",
            )
        )
        outcome.checks.append(
            make_check(
                "factor3",
                "conditional_expectation",
                entry.name,
                not conditional_mismatches,
                conditional_mismatches[0] if conditional_mismatches else "tree output equals E(A | B_f)",
            )
        )
        outcome.checks.append(
            make_check(
                "factor3",
                "pipeline_cost",
                entry.name,
                worst_cost <= bound,
                f"worst cardInfo {worst_cost} <= 3n|K'|^(3k) = {bound}",
            )
        )
    return outcome


def _theorem1_row(
    strategy: Strategy,
    budgets: tuple[int, int],
    restriction: FiniteRestriction,
    family: Problem,
    m: int,
    mode: ArithmeticMode,
) -> tuple[Any, Any, bool]:
    tree = theorem1_pipeline(strategy, budgets, restriction, family, mode, check=False)
    adversary = family.with_test_set(grid_adversary_inputs(tree, m))
    error = empirical_error(strategy, adversary, restriction, arithmetic=mode).supremum
    lower = theorem1_lower_bound(grid_det_error(m), budgets[0], budgets[1], restriction.size)
    return error, lower, error >= lower


def run_theorem1(
    entries: Sequence[SuiteEntry],
    m: int = DEFAULT_THEOREM1_M,
    search_size: int = DEFAULT_SEARCH_SIZE,
    seed: int = 0,
    mode: ArithmeticMode = "rational",
) -> SuiteOutcome:
    """e(A) ≥ (1/3)·e^det at 3n|K'|^{3k} for the suite and a randomized search on grid m."""
    outcome = SuiteOutcome()
    for entry in entries:
        n, k = entry.budgets(mode)
        q = max(entry.restriction.size, 2)
        error = empirical_error(entry.strategy, entry.problem, entry.restriction, arithmetic=mode).supremum
        lower = theorem1_lower_bound(grid_det_error(entry.problem.params["m"]), n, k, q)
        outcome.checks.append(
            make_check(
                "theorem1",
                "finite_grid",
                entry.name,
                error >= lower,
                f"e(A)={error} >= {lower} at budgets ({n},{k}), |K'|={entry.restriction.size}",
            )
        )

    restriction = make_bit_restriction()
    family = make_grid_family(m)
    rows: list[dict[str, Any]] = []
    fixed = _fixed_search_strategies(m)
    for budget_index, budgets in enumerate(THEOREM1_BUDGETS):
        cardinality = theorem1_inflated_cardinality(budgets[0], budgets[1], restriction.size)
        if cardinality >= m:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(budget_index,)))
        strategies = [strategy for strategy, b in fixed if b == budgets]
        strategies.extend(
            random_budgeted_strategy(rng, m, budgets, restriction, f"random_{budgets[0]}_{budgets[1]}_{i}")
            for i in range(search_size)
        )
        counterexamples: list[str] = []
        smallest = None
        lower = None
        for strategy in strategies:
            error, lower, holds = _theorem1_row(strategy, budgets, restriction, family, m, mode)
            smallest = error if smallest is None or error < smallest else smallest
            if not holds:
                counterexamples.append(f"{strategy.name}: e(A)={error} < {lower}")
        rows.append(
            {
                "m": m,
                "n": budgets[0],
                "k": budgets[1],
                "inflated_cardinality": cardinality,
                "lower_bound": str(lower),
                "strategies": len(strategies),
                "min_error": str(smallest),
                "counterexamples": len(counterexamples),
            }
        )
        outcome.checks.append(
            make_check(
                "theorem1",
                "adversarial_search",
                f"grid m={m} budgets {budgets}",
                not counterexamples,
                counterexamples[0]
                if counterexamples
                else f"{len(strategies)} strategies, min e(A)={smallest} >= {lower}",
            )
        )
    outcome.tables["theorem1"] = pd.DataFrame(rows)
    return outcome


def run_oracle(max_m: int = ORACLE_MAX_M) -> SuiteOutcome:
    """Minimax oracle equals (m − n)/m and is nonincreasing in n."""
    outcome = SuiteOutcome()
    for m in range(1, max_m + 1):
        problem = make_grid_problem(m)
        values = [brute_force_det_minimal_error(problem, n) for n in range(m + 1)]
        closed = [det_minimal_error_grid(m, n) for n in range(m + 1)]
        disagreements = [f"n={n}: {v} != {c}" for n, (v, c) in enumerate(zip(values, closed, strict=True)) if v != c]
        outcome.checks.append(
            make_check(
                "oracle",
                "grid_closed_form",
                f"grid m={m}",
                not disagreements,
                disagreements[0] if disagreements else f"values {[str(v) for v in values]}",
            )
        )
        monotone = all(b <= a for a, b in itertools.pairwise(values)) and values[0] <= 1
        outcome.checks.append(
            make_check("oracle", "monotone_in_n", f"grid m={m}", monotone, "nonincreasing and bounded by radius 1")
        )
    return outcome


def run_engine(
    entries: Sequence[SuiteEntry],
    samples: int = DEFAULT_ENGINE_SAMPLES,
    seed: int = 0,
    mode: ArithmeticMode = "rational",
) -> SuiteOutcome:
    """Probability closure, cost additivity and sampled-versus-exact agreement."""
    outcome = SuiteOutcome()
    for index, entry in enumerate(entries):
        closure_failures: list[str] = []
        additivity_failures: list[str] = []
        inputs = entry.problem.test_inputs()
        for f in inputs:
            branches = enumerate_branches(entry.strategy, entry.problem, f, entry.restriction, mode=mode)
            total = sum(b.probability for b in branches)
            if not outputs_equal(total, 1, 1e-12):
                closure_failures.append(f"{_subject(entry, f)}: Σp = {total}")
            for b in branches:
                if b.result.card_info + b.result.card_rand != len(b.result.transcript):
                    additivity_failures.append(_subject(entry, f))
        outcome.checks.append(
            make_check(
                "engine",
                "probability_closure",
                entry.name,
                not closure_failures,
                closure_failures[0] if closure_failures else f"Σp = 1 on {len(inputs)} inputs",
            )
        )
        outcome.checks.append(
            make_check(
                "engine",
                "cost_additivity",
                entry.name,
                not additivity_failures,
                additivity_failures[0] if additivity_failures else "cardInfo + cardRand = transcript length",
            )
        )
        for position in sorted({0, len(inputs) // 2, len(inputs) - 1}):
            f = inputs[position]
            exact = float(expected_output(entry.strategy, entry.problem, f, entry.restriction, mode))
            mean, stderr = sampled_mean(entry.strategy, entry.problem, f, entry.restriction, seed + index, samples)
            gap = abs(float(mean[0]) - exact)
            agrees = gap <= 3 * float(stderr[0]) or gap <= 1e-9
            outcome.checks.append(
                make_check(
                    "engine",
                    "sampled_agreement",
                    _subject(entry, f),
                    agrees,
                    f"|mean − E| = {gap:.3g} vs 3·SE = {3 * float(stderr[0]):.3g} over {samples} samples",
                )
            )
    return outcome


CORRECTNESS_PARAMS = BoundParams(c0=2.0**-10, c3=0.25, sigma=0.5, d=1.0, r=1.0)


def run_bounds() -> SuiteOutcome:
    """Calculator constants and corollary consistency on the Lipschitz integrators."""
    outcome = SuiteOutcome()
    cor3_defaults = BoundParams(c0=1.0, c3=1.0, alpha=0.0)
    cor3_expected = (1024 / 9 - math.log2(3072)) / 3
    cor2_params = BoundParams(c0=1.0, c3=3.0, sigma=0.5, d=1.0, r=1.0)
    constants = [
        ("kappa(16,1)", kappa(16, 1), 8),
        ("kappa(4,1)", kappa(4, 1), 2),
        ("thm1(2,1,2)", theorem1_inflated_cardinality(2, 1, 2), 48),
        ("cor3(n=1024)", cor3_bit_lower_bound(cor3_defaults, 1024), cor3_expected),
        ("cor2(n=4096)", cor2_bit_lower_bound(cor2_params, 4096), 2),
    ]
    for label, value, wanted in constants:
        outcome.checks.append(
            make_check("bounds", "calculator", label, abs(value - wanted) <= 1e-9, f"{value} vs {wanted}")
        )

    n0 = cor3_threshold_n0(cor3_defaults)
    if n0 is not None:
        sizes = [n0, 2 * n0, 4 * n0]
        eventual_ok = all(
            cor3_bit_lower_bound(cor3_defaults, n) >= cor3_bit_lower_bound(cor3_defaults, n, n0=n0) for n in sizes
        )
        outcome.checks.append(
            make_check("bounds", "cor3_eventual_form", f"n0={n0}", eventual_ok, f"full form dominates at {sizes}")
        )

    restriction = make_bit_restriction()
    integrators = [(midpoint_rule(2), 2, 0), (midpoint_rule(4), 4, 0), (bit_stratified_mc(2, 1), 2, 2)]
    for strategy, n, k in integrators:
        k_min = cor2_bit_lower_bound(CORRECTNESS_PARAMS, n)
        if k >= k_min:
            continue
        threshold = cor2_error_threshold(CORRECTNESS_PARAMS, n)
        tooth_problem = make_lipschitz_problem([sawtooth(n)])
        tree = derandomize(strategy, restriction, tooth_problem)
        family = [*lipschitz_adversary_inputs(tree), sawtooth(n), sawtooth(n * 2)]
        problem = make_lipschitz_problem(family)
        error = empirical_error(strategy, problem, restriction).supremum
        outcome.checks.append(
            make_check(
                "bounds",
                "cor2_consistency",
                strategy.name,
                error > threshold,
                f"k={k} < k_min={k_min:.3f}; worst error {float(error):.4g} > c0·n^(-r/d-σ) = {threshold:.4g}",
            )
        )
    return outcome


def run_suite(
    name: str,
    *,
    only: str | None = None,
    budgets: tuple[int, int] | None = None,
    m: int = DEFAULT_THEOREM1_M,
    samples: int = DEFAULT_ENGINE_SAMPLES,
    seed: int = 0,
    search_size: int = DEFAULT_SEARCH_SIZE,
    mode: ArithmeticMode = "rational",
) -> SuiteOutcome:
    """Run a named suite (or ``all``) and print one status line per check.

    Raises:
        UnknownSuite: If the suite name is unknown
    """
    if name not in SUITE_NAMES:
        raise UnknownSuite(unknown_name_message("suite", name, SUITE_NAMES))
    names = [s for s in SUITE_NAMES if s != "all"] if name == "all" else [name]
    entries = suite_entries(only)
    outcome = SuiteOutcome()
    for suite in names:
        print(f"\n[MODE] Running suite '{suite}'")
        if suite == "lemma1":
            result = run_lemma1(entries, mode)
        elif suite == "lemma2":
            result = run_lemma2(entries, mode)
        elif suite == "markov":
            result = run_markov(entries, mode, budgets)
        elif suite == "factor3":
            result = run_factor3(entries, mode)
        elif suite == "theorem1":
            result = run_theorem1(entries, m, search_size, seed, mode)
        elif suite == "oracle":
            result = run_oracle()
        elif suite == "engine":
            result = run_engine(entries, samples, seed, mode)
        else:
            result = run_bounds()
        for check in result.checks:
            print(f"  {check['status']} {check['check']} - {check['subject']}: {check['witness']}")
        outcome.extend(result)
    return outcome

