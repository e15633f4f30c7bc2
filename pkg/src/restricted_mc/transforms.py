"""Truncation, derandomization and the budget-to-deterministic pipeline.

Deterministic algorithms are represented as replayable generator programs:
a program yields ``InfoQuery`` objects, receives the answers and returns its
output.  Programs never ask random queries, so a ``DeterministicTree`` is
seed-independent by construction.
"""

from __future__ import annotations

from collections.abc import Callable, Generator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from restricted_mc.algebra import (
    ArithmeticMode,
    ExtendedOutput,
    Number,
    OutputValue,
    check_probability_vector,
    divide,
    weighted_sum,
    zero_like,
)
from restricted_mc.engine import DEFAULT_MAX_STEPS, enumerate_branches, evaluate_information, expected_cards
from restricted_mc.errors import (
    BudgetViolated,
    CapsViolated,
    LengthMismatch,
    MalformedStrategy,
    SizeTooLarge,
)
from restricted_mc.models import (
    Action,
    Answer,
    AskInfo,
    AskRand,
    FiniteRestriction,
    InfoQuery,
    Problem,
    RandQuery,
    RunResult,
    Stop,
    Strategy,
    Transcript,
    TreeNode,
)
from restricted_mc.strategy import action_at, tree_caps

type Program = Generator[InfoQuery, Any, Any]
type ProgramFactory = Callable[[], Program]

DEFAULT_MAX_NODES = 200_000


@dataclass(frozen=True)
class DeterministicTree:
    """A deterministic algorithm: information calls and a final output, no randomness.

    Attributes:
        program: Factory of fresh generator programs
        cost_bound: Proven upper bound on information calls, if known
        name: Display name
    """

    program: ProgramFactory
    cost_bound: int | None = None
    name: str = "deterministic"

    @classmethod
    def constant(cls, output: OutputValue, name: str = "constant") -> DeterministicTree:
        """Tree that stops immediately with ``output``."""

        def program() -> Program:
            return output
            yield  # pragma: no cover

        return cls(program, cost_bound=0, name=name)

    @classmethod
    def query(
        cls,
        param: Any,
        continuation: Callable[[Any], DeterministicTree],
        name: str = "query",
    ) -> DeterministicTree:
        """Tree that asks f(param) and continues with ``continuation(answer)``."""

        def program() -> Program:
            answer = yield InfoQuery(param)
            return (yield from continuation(answer).program())

        return cls(program, name=name)

    @classmethod
    def from_node(cls, node: TreeNode, name: str = "tree") -> DeterministicTree:
        """Deterministic tree from a decision-tree node without random nodes.

        Raises:
            MalformedStrategy: If the node contains a random node
        """
        if _has_rand(node):
            msg = f"Decision tree '{name}' contains random nodes"
            raise MalformedStrategy(msg)

        def program() -> Program:
            current = node
            while current.kind == "info":
                answer = yield InfoQuery(current.query)
                if answer not in current.children:
                    msg = f"Tree has no branch for answer {answer!r} at query {current.query!r}"
                    raise MalformedStrategy(msg)
                current = current.children[answer]
            return current.output

        return cls(program, cost_bound=tree_caps(node)[0], name=name)

    @classmethod
    def from_strategy(cls, strategy: Strategy) -> DeterministicTree:
        """View a strategy that never asks random queries as a deterministic tree.

        Raises:
            MalformedStrategy: (when run) if the strategy asks a random query
        """

        def program() -> Program:
            return (yield from _strategy_program(strategy, None, Transcript(), "rational"))

        cost = strategy.caps[0] if strategy.caps is not None and strategy.caps[1] == 0 else None
        return cls(program, cost_bound=cost, name=strategy.name)

    def with_cost_bound(self, cost_bound: int | None) -> DeterministicTree:
        """Copy with a different recorded cost bound."""
        return DeterministicTree(self.program, cost_bound, self.name)

    def map_outputs(self, fn: Callable[[Any], Any], name: str | None = None) -> DeterministicTree:
        """Same queries, outputs transformed by ``fn``."""
        source = self.program

        def program() -> Program:
            return fn((yield from source()))

        return DeterministicTree(program, self.cost_bound, name or self.name)

    def run(self, answer: Callable[[InfoQuery], Any]) -> tuple[Any, list[tuple[InfoQuery, Any]]]:
        """Drive the program with an answer function; return output and the calls made."""
        calls: list[tuple[InfoQuery, Any]] = []
        program = self.program()
        try:
            query = next(program)
            while True:
                value = answer(query)
                calls.append((query, value))
                query = program.send(value)
        except StopIteration as done:
            return done.value, calls

    def evaluate(self, problem: Problem, f: Any) -> RunResult:
        """Run on input f; the transcript holds only information entries.

        Raises:
            MalformedStrategy: If the program asks an invalid query
        """
        output, calls = self.run(lambda query: evaluate_information(problem, f, query))
        transcript = Transcript((query, Answer.info(value)) for query, value in calls)
        return RunResult(output, len(calls), 0, transcript, terminated=True)

    def _replay(self, answers: Sequence[Any]) -> tuple[InfoQuery | None, Any]:
        program = self.program()
        try:
            query = next(program)
            for value in answers:
                query = program.send(value)
        except StopIteration as done:
            return None, done.value
        return query, None

    def as_strategy(self, name: str | None = None) -> Strategy:
        """Strategy whose policy replays the program on the transcript's answers."""

        def policy(transcript: Transcript) -> Action:
            program = self.program()
            sent = 0
            try:
                query = next(program)
                for recorded, answer in transcript:
                    if recorded != query:
                        msg = f"Transcript query {recorded!r} differs from the tree's query {query!r}"
                        raise MalformedStrategy(msg)
                    sent += 1
                    query = program.send(answer.value)
            except StopIteration as done:
                if sent == len(transcript):
                    return Stop(done.value)
                msg = "Transcript continues past the tree's leaf"
                raise MalformedStrategy(msg) from None
            return AskInfo(query)

        caps = (self.cost_bound, 0) if self.cost_bound is not None else None
        return Strategy(name or self.name, policy, caps=caps)

    def materialize(self, alphabet: Sequence[Any], max_nodes: int = DEFAULT_MAX_NODES) -> TreeNode:
        """Expand the program into an explicit decision tree over a finite answer alphabet.

        Raises:
            SizeTooLarge: If the expansion exceeds ``max_nodes`` nodes
        """
        count = 0

        def expand(prefix: list[Any]) -> TreeNode:
            nonlocal count
            count += 1
            if count > max_nodes:
                msg = f"Decision tree '{self.name}' has more than {max_nodes} nodes"
                raise SizeTooLarge(msg)
            query, output = self._replay(prefix)
            if query is None:
                return TreeNode("stop", output=output)
            return TreeNode("info", query=query.param, children={a: expand([*prefix, a]) for a in alphabet})

        return expand([])

    def worst_case_cost(self, alphabet: Sequence[Any], max_nodes: int = DEFAULT_MAX_NODES) -> int:
        """Maximum number of information calls over all answer sequences."""
        return tree_caps(self.materialize(alphabet, max_nodes))[0]


def _has_rand(node: TreeNode) -> bool:
    if node.kind == "rand":
        return True
    return any(_has_rand(child) for child in node.children.values())


def _strategy_program(
    strategy: Strategy,
    restriction: FiniteRestriction | None,
    prefix: Transcript,
    mode: ArithmeticMode,
) -> Program:
    """Run ``strategy`` from ``prefix``; random calls are averaged out by sequential composition."""
    transcript = prefix
    drawn = prefix.rand_draws()
    while True:
        action = action_at(strategy, transcript)
        if isinstance(action, Stop):
            return action.output
        if isinstance(action, AskInfo):
            value = yield action.query
            transcript = transcript.extend(action.query, Answer.info(value))
            continue
        query = action.query
        if query.index in drawn:
            transcript = transcript.extend(query, Answer.rand(drawn[query.index]))
            continue
        if restriction is None:
            msg = f"Strategy '{strategy.name}' asked random query {query.index} but is used as deterministic"
            raise MalformedStrategy(msg)
        support = restriction.support(query, mode)
        programs = [_conditioned(strategy, restriction, transcript, query, value, mode) for value, _ in support]
        return (yield from _sequential(programs, [p for _, p in support]))


def _conditioned(
    strategy: Strategy,
    restriction: FiniteRestriction,
    transcript: Transcript,
    query: RandQuery,
    value: Any,
    mode: ArithmeticMode,
) -> ProgramFactory:
    branch = transcript.extend(query, Answer.rand(value))

    def program() -> Program:
        return (yield from _strategy_program(strategy, restriction, branch, mode))

    return program


def _sequential(programs: Sequence[ProgramFactory], weights: Sequence[Number]) -> Program:
    outputs: list[Any] = []
    for program in programs:
        outputs.append((yield from program()))
    return weighted_sum(list(weights), outputs)


def compose_sequential(trees: Sequence[DeterministicTree], weights: Sequence[Number]) -> DeterministicTree:
    """Run the trees one after another on the real input and output Σ wᵢ·outputᵢ.

    The cost on every input is the sum of the constituent costs.

    Raises:
        LengthMismatch: If ``trees`` and ``weights`` differ in length
        BadDistribution: If ``weights`` is not a probability vector
    """
    if len(trees) != len(weights):
        msg = f"compose_sequential got {len(trees)} trees and {len(weights)} weights"
        raise LengthMismatch(msg)
    check_probability_vector(weights)
    programs = [tree.program for tree in trees]
    frozen_weights = list(weights)

    def program() -> Program:
        return (yield from _sequential(programs, frozen_weights))

    costs = [tree.cost_bound for tree in trees]
    cost = sum(c for c in costs if c is not None) if all(c is not None for c in costs) else None
    return DeterministicTree(program, cost_bound=cost, name="sequential")


def truncate(
    strategy: Strategy,
    cap_info: int,
    cap_rand: int,
    zero_output: Any = None,
    problem: Problem | None = None,
) -> Strategy:
    """Cap a strategy's calls pointwise, flagging whether the original run stayed within caps.

    The returned strategy outputs ``ExtendedOutput(A(f,ω), 1)`` when the run
    stays within ``(cap_info, cap_rand)``.  Otherwise it stops before the
    first call that would exceed a cap, with ``ExtendedOutput(0, 0)``.

    Args:
        strategy: Strategy to truncate
        cap_info: Maximum number of information calls
        cap_rand: Maximum number of random calls
        zero_output: Zero of G; defaults to the problem's zero, else the zero shaped like φ₀
        problem: Problem whose output dimension shapes the zero

    Returns:
        Strategy over G ⊕ ℝ with hard caps ``(cap_info, cap_rand)``

    Raises:
        ValueError: If a cap is negative
    """
    if cap_info < 0 or cap_rand < 0:
        msg = f"Caps must be nonnegative, got ({cap_info}, {cap_rand})"
        raise ValueError(msg)
    if zero_output is None:
        zero_output = problem.zero() if problem is not None else zero_like(strategy.fallback_output)
    empty = ExtendedOutput(zero_output, 0)

    def policy(transcript: Transcript) -> Action:
        action = action_at(strategy, transcript)
        if isinstance(action, Stop):
            return Stop(ExtendedOutput(action.output, 1))
        # counts include the pending call
        if isinstance(action, AskInfo) and transcript.info_count + 1 > cap_info:
            return Stop(empty)
        if isinstance(action, AskRand) and transcript.rand_count + 1 > cap_rand:
            return Stop(empty)
        return action

    return Strategy(
        name=f"truncate({strategy.name}, {cap_info}, {cap_rand})",
        policy=policy,
        caps=(cap_info, cap_rand),
        fallback_output=empty,
        params={"source": strategy.name, "cap_info": cap_info, "cap_rand": cap_rand},
    )


def verify_hard_caps(
    strategy: Strategy,
    restriction: FiniteRestriction,
    problem: Problem,
    caps: tuple[int, int],
    max_steps: int = DEFAULT_MAX_STEPS,
) -> None:
    """Check by enumeration that every branch on every test input respects ``caps``.

    Raises:
        CapsViolated: If some branch exceeds the caps
        NonterminatingPath: If some branch does not stop
    """
    for f in problem.test_inputs():
        for branch in enumerate_branches(strategy, problem, f, restriction, max_steps):
            result = branch.result
            if result.card_info > caps[0] or result.card_rand > caps[1]:
                msg = (
                    f"Strategy '{strategy.name}' uses cards ({result.card_info}, {result.card_rand}) "
                    f"beyond caps {caps} on input {problem.label(f)}"
                )
                raise CapsViolated(msg)


def derandomize(
    strategy: Strategy,
    restriction: FiniteRestriction,
    problem: Problem,
    caps: tuple[int, int] | None = None,
    mode: ArithmeticMode = "rational",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> DeterministicTree:
    """Replace a hard-capped randomized strategy by a deterministic tree computing E A(f,·).

    Information calls are kept.  At a random call the strategy is
    conditioned on each positive-probability value, each conditioned
    strategy is derandomized, and the results are composed sequentially with
    the probabilities as weights.  The cost is at most n·|K'|^k.

    Args:
        strategy: Strategy with hard caps (n, k)
        restriction: Finite restriction supplying the random values
        problem: Problem whose test inputs are used to verify the caps
        caps: Caps to verify; defaults to the strategy's declared caps
        mode: Arithmetic mode of the weights
        max_steps: Step limit for the cap verification

    Returns:
        DeterministicTree with ``cost_bound`` n·|K'|^k

    Raises:
        CapsViolated: If no caps are known or a branch exceeds them
        NonterminatingPath: If a branch does not stop
    """
    hard_caps = caps if caps is not None else strategy.caps
    if hard_caps is None:
        msg = f"Strategy '{strategy.name}' declares no hard caps"
        raise CapsViolated(msg)
    verify_hard_caps(strategy, restriction, problem, hard_caps, max_steps)

    def program() -> Program:
        return (yield from _strategy_program(strategy, restriction, Transcript(), mode))

    cost = hard_caps[0] * restriction.size ** hard_caps[1]
    return DeterministicTree(program, cost_bound=cost, name=f"derandomize({strategy.name})")


def conditional_normalize(tree: DeterministicTree) -> DeterministicTree:
    """Map leaves (v, w) to v/w, or to 0 when w = 0; plain outputs pass through."""

    def normalize(output: Any) -> Any:
        if not isinstance(output, ExtendedOutput):
            return output
        if output.flag == 0:
            return zero_like(output.value)
        if output.flag == 1:
            return output.value
        return divide(output.value, output.flag)

    return tree.map_outputs(normalize, name=f"normalize({tree.name})")


def check_budgets(
    strategy: Strategy,
    restriction: FiniteRestriction,
    problem: Problem,
    budgets: tuple[int, int],
    mode: ArithmeticMode = "rational",
) -> None:
    """Check E card_Λ ≤ n and E card_Λ' ≤ k on every test input.

    Raises:
        BudgetViolated: If an expectation exceeds its budget
    """
    for f in problem.test_inputs():
        info, rand = expected_cards(strategy, problem, f, restriction, mode)
        if info > budgets[0] or rand > budgets[1]:
            msg = (
                f"Strategy '{strategy.name}' has expected cards ({info}, {rand}) "
                f"beyond budgets {budgets} on input {problem.label(f)}"
            )
            raise BudgetViolated(msg)


def theorem1_pipeline(
    strategy: Strategy,
    budgets: tuple[int, int],
    restriction: FiniteRestriction,
    problem: Problem,
    mode: ArithmeticMode = "rational",
    check: bool = True,
) -> DeterministicTree:
    """Turn a strategy with expected budgets (n, k) into a deterministic tree.

    Truncates at (3n, 3k), derandomizes, then divides by the flag, so the
    result computes E(A(f,·) | B_f) with at most 3n·|K'|^{3k} information calls.

    Raises:
        BudgetViolated: If ``check`` is set and an expected budget is exceeded
    """
    n, k = budgets
    if n < 0 or k < 0:
        msg = f"Budgets must be nonnegative, got {budgets}"
        raise ValueError(msg)
    if check:
        check_budgets(strategy, restriction, problem, budgets, mode)
    truncated = truncate(strategy, 3 * n, 3 * k, problem=problem)
    tree = derandomize(truncated, restriction, problem, caps=(3 * n, 3 * k), mode=mode)
    normalized = conditional_normalize(tree)
    return normalized.with_cost_bound(3 * n * restriction.size ** (3 * k))


# Trace log for continuous answer sets


class AdaptiveTraceError(Exception):
    """A symbolic answer was compared or otherwise used nonlinearly."""


class LinearForm:
    """Affine combination c + Σ wᵢ·aᵢ of recorded answers aᵢ."""

    __slots__ = ("coefficients", "constant")

    def __init__(self, coefficients: Mapping[int, Number] | None = None, constant: Number = 0) -> None:
        self.coefficients: dict[int, Number] = dict(coefficients or {})
        self.constant: Number = constant

    @classmethod
    def variable(cls, index: int) -> LinearForm:
        """Form of the index-th recorded answer."""
        return cls({index: 1})

    def _combine(self, other: object, sign: int) -> LinearForm:
        if isinstance(other, LinearForm):
            coefficients = dict(self.coefficients)
            for index, weight in other.coefficients.items():
                coefficients[index] = coefficients.get(index, 0) + sign * weight
            return LinearForm(coefficients, self.constant + sign * other.constant)
        if isinstance(other, int | float | Fraction):
            return LinearForm(self.coefficients, self.constant + sign * other)
        msg = f"cannot add {type(other).__name__} to a symbolic answer"
        raise AdaptiveTraceError(msg)

    def __add__(self, other: object) -> LinearForm:
        return self._combine(other, 1)

    def __radd__(self, other: object) -> LinearForm:
        return self._combine(other, 1)

    def __sub__(self, other: object) -> LinearForm:
        return self._combine(other, -1)

    def __rsub__(self, other: object) -> LinearForm:
        return (-self)._combine(other, 1)

    def __neg__(self) -> LinearForm:
        return self * -1

    def __mul__(self, other: object) -> LinearForm:
        if not isinstance(other, int | float | Fraction):
            msg = "symbolic answers can only be scaled by numbers"
            raise AdaptiveTraceError(msg)
        return LinearForm({i: other * w for i, w in self.coefficients.items()}, other * self.constant)

    def __rmul__(self, other: object) -> LinearForm:
        return self * other

    def __truediv__(self, other: object) -> LinearForm:
        if not isinstance(other, int | float | Fraction):
            msg = "symbolic answers can only be divided by numbers"
            raise AdaptiveTraceError(msg)
        inverse = 1.0 / other if isinstance(other, float) else Fraction(1) / other
        return self * inverse

    def _refuse(self, *_args: object) -> Any:
        msg = "the tree inspects an answer value"
        raise AdaptiveTraceError(msg)

    __eq__ = _refuse  # type: ignore[assignment]
    __lt__ = _refuse
    __le__ = _refuse
    __gt__ = _refuse
    __ge__ = _refuse
    __bool__ = _refuse
    __hash__ = _refuse  # type: ignore[assignment]
    __float__ = _refuse
    __abs__ = _refuse

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready weighted sum of recorded answers."""
        return {
            "constant": _trace_number(self.constant),
            "terms": [
                {"answer": index, "weight": _trace_number(weight)}
                for index, weight in sorted(self.coefficients.items())
                if weight != 0
            ],
        }


def _trace_number(value: Any) -> Any:
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, tuple):
        return [_trace_number(x) for x in value]
    return value


def _leaf_formula(output: Any) -> Any:
    if isinstance(output, LinearForm):
        return output.to_dict()
    if isinstance(output, ExtendedOutput):
        return {"value": _leaf_formula(output.value), "flag": _leaf_formula(output.flag)}
    if isinstance(output, tuple):
        return [_leaf_formula(x) for x in output]
    return {"constant": _trace_number(output), "terms": []}


def trace_log(tree: DeterministicTree, problem: Problem | None = None) -> dict[str, Any]:
    """Serialize a deterministic tree over a continuous answer set.

    The tree is run symbolically: each answer is a variable and the leaf is
    reported as a weighted sum of the recorded answers.  When the tree
    inspects an answer (so its path depends on the input), a per-input trace
    over the problem's test inputs is produced instead.

    Raises:
        ValueError: If the tree is adaptive and no problem is given
    """
    counter = 0

    def symbolic(query: InfoQuery) -> LinearForm:
        nonlocal counter
        if isinstance(query.param, LinearForm):
            msg = "query depends on an earlier answer"
            raise AdaptiveTraceError(msg)
        counter += 1
        return LinearForm.variable(counter)

    try:
        output, calls = tree.run(symbolic)
    except AdaptiveTraceError:
        if problem is None:
            msg = f"Tree '{tree.name}' is adaptive; a problem with test inputs is needed for its trace"
            raise ValueError(msg) from None
    else:
        return {
            "name": tree.name,
            "mode": "symbolic",
            "cost_bound": tree.cost_bound,
            "queries": [
                {"step": step, "query": _trace_number(query.param), "continuation": 0}
                for step, (query, _) in enumerate(calls, start=1)
            ],
            "leaf": _leaf_formula(output),
        }

    traces: list[dict[str, Any]] = []
    for continuation, f in enumerate(problem.test_inputs()):
        result = tree.evaluate(problem, f)
        traces.append(
            {
                "input": problem.label(f),
                "continuation": continuation,
                "queries": [
                    {"query": _trace_number(query.param), "answer": _trace_number(answer.value)}
                    for query, answer in result.transcript
                ],
                "output": _trace_number(result.output),
            }
        )
    return {"name": tree.name, "mode": "per-input", "cost_bound": tree.cost_bound, "traces": traces}
