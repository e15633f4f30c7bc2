"""Execution engine: sampled runs, exhaustive branch enumeration and error estimates."""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from restricted_mc.algebra import (
    ArithmeticMode,
    ExtendedOutput,
    Number,
    OutputValue,
    divide,
    json_number,
    one,
    weighted_sum,
    zero,
    zero_like,
)
from restricted_mc.errors import InsufficientSamples, MalformedStrategy, NonterminatingPath
from restricted_mc.models import (
    Answer,
    AskInfo,
    BranchOutcome,
    ErrorMode,
    ErrorReport,
    FiniteRestriction,
    InfoQuery,
    Problem,
    RandQuery,
    RunResult,
    Stop,
    Strategy,
    Transcript,
)
from restricted_mc.strategy import action_at

DEFAULT_MAX_STEPS = 10**6


def evaluate_information(problem: Problem, f: Any, query: InfoQuery) -> Any:
    """Answer an information query, rejecting queries outside Λ.

    Raises:
        MalformedStrategy: If the query is not valid for the problem
    """
    if not problem.is_valid_query(query):
        msg = f"Query {query!r} is not a valid information functional of problem '{problem.name}'"
        raise MalformedStrategy(msg)
    return problem.evaluate(f, query)


def _execute(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    draw: Callable[[RandQuery], Any],
    max_steps: int,
) -> RunResult:
    if max_steps < 1:
        msg = f"max_steps must be >= 1, got {max_steps}"
        raise ValueError(msg)
    transcript = Transcript()
    card_info = 0
    card_rand = 0
    # ξ_j is one random variable: repeated calls see the same value
    drawn: dict[int, Any] = {}
    while True:
        action = action_at(strategy, transcript)
        if isinstance(action, Stop):
            return RunResult(action.output, card_info, card_rand, transcript, terminated=True)
        if card_info + card_rand >= max_steps:
            return RunResult(strategy.fallback_output, card_info, card_rand, transcript, terminated=False)
        if isinstance(action, AskInfo):
            value = evaluate_information(problem, f, action.query)
            transcript = transcript.extend(action.query, Answer.info(value))
            card_info += 1
        else:
            index = action.query.index
            if index not in drawn:
                drawn[index] = draw(action.query)
            transcript = transcript.extend(action.query, Answer.rand(drawn[index]))
            card_rand += 1


def _generator_draw(restriction: FiniteRestriction, rng: np.random.Generator) -> Callable[[RandQuery], Any]:
    def draw(query: RandQuery) -> Any:
        return restriction.draw(query, rng)

    return draw


def run_sampled(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    seed: int | np.random.SeedSequence,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> RunResult:
    """Run once with random values drawn from a seeded generator.

    Args:
        strategy: Strategy to execute
        problem: Problem answering information queries
        f: Problem input
        restriction: Distributions of the random calls
        seed: Seed of the draw sequence
        max_steps: Maximum number of calls before giving up

    Returns:
        RunResult; ``terminated`` is False and the output is φ₀ when the
        step limit is reached

    Raises:
        MalformedStrategy: If the strategy asks an invalid query
    """
    return _execute(strategy, problem, f, _generator_draw(restriction, np.random.default_rng(seed)), max_steps)


def run_with_draws(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    draws: Mapping[int, Any],
    max_steps: int = DEFAULT_MAX_STEPS,
) -> RunResult:
    """Run once with a fixed realization ξⱼ = draws[j].

    Raises:
        ValueError: If a requested ξⱼ is missing from ``draws`` or outside K'
    """

    def draw(query: RandQuery) -> Any:
        if query.index not in draws:
            msg = f"No value supplied for random query {query.index}"
            raise ValueError(msg)
        value = draws[query.index]
        if value not in restriction.alphabet:
            msg = f"Value {value!r} for random query {query.index} is not in the alphabet {restriction.alphabet}"
            raise ValueError(msg)
        return value

    return _execute(strategy, problem, f, draw, max_steps)


def enumerate_branches(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    max_steps: int = DEFAULT_MAX_STEPS,
    mode: ArithmeticMode = "rational",
) -> list[BranchOutcome]:
    """Expand every positive-probability realization of the random calls.

    Branches are produced depth first in the alphabet's declared order.

    Raises:
        NonterminatingPath: If some branch makes more than ``max_steps`` calls
        MalformedStrategy: If the strategy asks an invalid query
    """
    outcomes: list[BranchOutcome] = []
    # (transcript, card_info, card_rand, probability, realized draws)
    stack: list[tuple[Transcript, int, int, Number, dict[int, Any]]] = [(Transcript(), 0, 0, one(mode), {})]
    while stack:
        transcript, card_info, card_rand, probability, drawn = stack.pop()
        while True:
            action = action_at(strategy, transcript)
            if isinstance(action, Stop):
                result = RunResult(action.output, card_info, card_rand, transcript, terminated=True)
                outcomes.append(BranchOutcome(probability, result))
                break
            if card_info + card_rand >= max_steps:
                msg = f"Strategy '{strategy.name}' did not stop within {max_steps} calls on input {problem.label(f)}"
                raise NonterminatingPath(msg)
            if isinstance(action, AskInfo):
                value = evaluate_information(problem, f, action.query)
                transcript = transcript.extend(action.query, Answer.info(value))
                card_info += 1
                continue
            query = action.query
            if query.index in drawn:
                transcript = transcript.extend(query, Answer.rand(drawn[query.index]))
                card_rand += 1
                continue
            children = [
                (
                    transcript.extend(query, Answer.rand(value)),
                    card_info,
                    card_rand + 1,
                    probability * p,
                    drawn | {query.index: value},
                )
                for value, p in restriction.support(query, mode)
            ]
            stack.extend(reversed(children))
            break
    return outcomes


def expected_output(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    mode: ArithmeticMode = "rational",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> OutputValue:
    """E A(f,·): probability-weighted sum of branch outputs."""
    branches = enumerate_branches(strategy, problem, f, restriction, max_steps, mode)
    return weighted_sum([b.probability for b in branches], [b.result.output for b in branches])


def expected_cards(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    mode: ArithmeticMode = "rational",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[Number, Number]:
    """Exact (E card_Λ, E card_Λ') on input f."""
    branches = enumerate_branches(strategy, problem, f, restriction, max_steps, mode)
    info = sum((b.probability * b.result.card_info for b in branches), zero(mode))
    rand = sum((b.probability * b.result.card_rand for b in branches), zero(mode))
    return info, rand


def _within(result: RunResult, cap_info: int, cap_rand: int) -> bool:
    return result.card_info <= cap_info and result.card_rand <= cap_rand


def prob_within_caps(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    cap_info: int,
    cap_rand: int,
    mode: ArithmeticMode = "rational",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Number:
    """P(B_f): probability that a run stays within both caps."""
    branches = enumerate_branches(strategy, problem, f, restriction, max_steps, mode)
    return sum((b.probability for b in branches if _within(b.result, cap_info, cap_rand)), zero(mode))


def conditional_expectation(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    cap_info: int,
    cap_rand: int,
    mode: ArithmeticMode = "rational",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> OutputValue:
    """E(A(f,·) | B_f); zero when P(B_f) = 0."""
    branches = enumerate_branches(strategy, problem, f, restriction, max_steps, mode)
    inside = [b for b in branches if _within(b.result, cap_info, cap_rand)]
    if not inside:
        return zero_like(branches[0].result.output)
    mass = sum((b.probability for b in inside), zero(mode))
    total = weighted_sum([b.probability for b in inside], [b.result.output for b in inside])
    return divide(total, mass)


def _output_array(output: OutputValue) -> np.ndarray:
    return np.atleast_1d(np.asarray(output, dtype=float))


def sampled_mean(
    strategy: Strategy,
    problem: Problem,
    f: Any,
    restriction: FiniteRestriction,
    seed: int,
    samples: int,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error of the output over ``samples`` seeded runs.

    Raises:
        InsufficientSamples: If fewer than two samples are requested
    """
    if samples < 2:
        msg = f"Sampled estimation needs at least 2 samples, got {samples}"
        raise InsufficientSamples(msg)
    draw = _generator_draw(restriction, np.random.default_rng(seed))
    rows = [_output_array(_execute(strategy, problem, f, draw, max_steps).output) for _ in range(samples)]
    values = np.vstack(rows)
    return values.mean(axis=0), values.std(axis=0, ddof=1) / math.sqrt(samples)


def empirical_error(
    strategy: Strategy,
    problem: Problem,
    restriction: FiniteRestriction,
    mode: ErrorMode = "exact-enumeration",
    seed: int | None = None,
    samples: int | None = None,
    arithmetic: ArithmeticMode = "rational",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> ErrorReport:
    """Per-input expected error E‖S(f) − A(f,·)‖ and its supremum over the test set.

    Exact mode enumerates branches; sampled mode averages ``samples`` runs per
    input, with input i drawing from ``SeedSequence(seed, spawn_key=(i,))``.
    Suprema over a test set of an infinite family are lower estimates.

    Raises:
        InsufficientSamples: If sampled mode gets fewer than two samples
        ValueError: If the problem has no inputs to test
    """
    inputs = problem.test_inputs()
    if not inputs:
        msg = f"Problem '{problem.name}' has no inputs or test set"
        raise ValueError(msg)
    labels = tuple(problem.label(f) for f in inputs)
    if mode == "exact-enumeration":
        errors: list[Number] = []
        for f in inputs:
            branches = enumerate_branches(strategy, problem, f, restriction, max_steps, arithmetic)
            errors.append(
                sum((b.probability * problem.error(f, b.result.output) for b in branches), zero(arithmetic))
            )
        return ErrorReport(tuple(errors), labels, mode, lower_estimate=not problem.is_finite)

    if samples is None or samples < 2:
        msg = f"Sampled estimation needs at least 2 samples, got {samples}"
        raise InsufficientSamples(msg)
    base_seed = 0 if seed is None else seed
    means: list[Number] = []
    stderrs: list[float] = []
    for i, f in enumerate(inputs):
        rng = np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(i,)))
        draw = _generator_draw(restriction, rng)
        values = np.array(
            [float(problem.error(f, _execute(strategy, problem, f, draw, max_steps).output)) for _ in range(samples)]
        )
        means.append(float(values.mean()))
        stderrs.append(float(values.std(ddof=1) / math.sqrt(samples)))
    return ErrorReport(
        tuple(means),
        labels,
        mode,
        seed=base_seed,
        samples=samples,
        standard_errors=tuple(stderrs),
        lower_estimate=True,
    )


def _output_columns(output: OutputValue) -> dict[str, Any]:
    if isinstance(output, ExtendedOutput):
        columns = {f"{key}_value": value for key, value in _output_columns(output.value).items()}
        columns["output_flag"] = json_number(output.flag)
        return columns
    if isinstance(output, tuple):
        return {f"output_{i}": json_number(x) for i, x in enumerate(output)}
    if isinstance(output, int | float | Fraction):
        return {"output": json_number(output)}
    return {"output": str(output)}


def branches_to_frame(branches: list[BranchOutcome]) -> pd.DataFrame:
    """Tabulate branches with columns branch_id, probability, output…, card_info, card_rand."""
    rows: list[dict[str, Any]] = []
    for branch_id, branch in enumerate(branches):
        row: dict[str, Any] = {"branch_id": branch_id, "probability": json_number(branch.probability)}
        row.update(_output_columns(branch.result.output))
        row["card_info"] = branch.result.card_info
        row["card_rand"] = branch.result.card_rand
        rows.append(row)
    return pd.DataFrame(rows)


def write_branches_csv(branches: list[BranchOutcome] | Mapping[str, list[BranchOutcome]], path: str | Path) -> Path:
    """Write a branch dump as CSV.

    A mapping from input labels to branch lists is written as one table with
    a leading ``input`` column; branch ids restart for every input.
    """
    output_path = Path(path)
    if isinstance(branches, Mapping):
        frames: list[pd.DataFrame] = []
        for label, group in branches.items():
            frame = branches_to_frame(group)
            frame.insert(0, "input", label)
            frames.append(frame)
        table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    else:
        table = branches_to_frame(branches)
    table.to_csv(output_path, index=False)
    return output_path
