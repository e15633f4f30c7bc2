"""Data models for restricted Monte Carlo algorithms."""

from __future__ import annotations

import bisect
import dataclasses
import functools
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal, TypedDict, overload

import numpy as np

from restricted_mc.algebra import (
    ArithmeticMode,
    NormSpec,
    Number,
    OutputValue,
    check_norm,
    check_probability_vector,
    distance,
    json_number,
    to_mode,
)
from restricted_mc.errors import BadDistribution, BadParams, MalformedStrategy, MalformedTranscript

AnswerKind = Literal["info", "rand"]
ErrorMode = Literal["exact-enumeration", "sampled"]


@dataclass(frozen=True)
class InfoQuery:
    """An information functional λ ∈ Λ, identified by a problem-specific parameter."""

    param: Any


@dataclass(frozen=True)
class RandQuery:
    """The random functional ξⱼ ∈ Λ', identified by its index j ≥ 1."""

    index: int

    def __post_init__(self) -> None:
        if self.index < 1:
            msg = f"Random query index must be >= 1, got {self.index}"
            raise MalformedStrategy(msg)


Query = InfoQuery | RandQuery


@dataclass(frozen=True)
class Answer:
    """A tagged answer; the tag keeps information values and random values disjoint."""

    kind: AnswerKind
    value: Any

    @classmethod
    def info(cls, value: Any) -> Answer:
        """Create an information answer."""
        return cls("info", value)

    @classmethod
    def rand(cls, value: Any) -> Answer:
        """Create a random answer."""
        return cls("rand", value)


Entry = tuple[Query, Answer]


def _check_entry(query: Any, answer: Any) -> None:
    if not isinstance(answer, Answer):
        msg = f"Transcript answer must be an Answer, got {answer!r}"
        raise MalformedTranscript(msg)
    if isinstance(query, InfoQuery):
        expected = "info"
    elif isinstance(query, RandQuery):
        expected = "rand"
    else:
        msg = f"Transcript query must be InfoQuery or RandQuery, got {query!r}"
        raise MalformedTranscript(msg)
    if answer.kind != expected:
        msg = f"Answer tagged '{answer.kind}' recorded for a {expected} query {query!r}"
        raise MalformedTranscript(msg)


class Transcript(Sequence[Entry]):
    """Immutable, append-only sequence of (query, answer) pairs.

    Views share one buffer; extending the view that ends at the buffer's end
    appends in place, any other view copies its prefix first.
    """

    __slots__ = ("_buffer", "_info", "_length")

    def __init__(self, entries: Iterable[Entry] = ()) -> None:
        buffer: list[Entry] = []
        for query, answer in entries:
            _check_entry(query, answer)
            buffer.append((query, answer))
        self._buffer = buffer
        self._length = len(buffer)
        self._info = sum(1 for query, _ in buffer if isinstance(query, InfoQuery))

    @classmethod
    def _view(cls, buffer: list[Entry], length: int, info: int) -> Transcript:
        view = cls.__new__(cls)
        view._buffer = buffer
        view._length = length
        view._info = info
        return view

    def extend(self, query: Query, answer: Answer) -> Transcript:
        """Return a new transcript with one more entry."""
        _check_entry(query, answer)
        entry = (query, answer)
        info = self._info + (1 if isinstance(query, InfoQuery) else 0)
        buffer = self._buffer
        if len(buffer) == self._length:
            buffer.append(entry)
            # another view may have appended first
            if buffer[self._length] is entry:
                return Transcript._view(buffer, self._length + 1, info)
        copied = buffer[: self._length]
        copied.append(entry)
        return Transcript._view(copied, self._length + 1, info)

    def __len__(self) -> int:
        return self._length

    @overload
    def __getitem__(self, index: int) -> Entry: ...

    @overload
    def __getitem__(self, index: slice) -> tuple[Entry, ...]: ...

    def __getitem__(self, index: int | slice) -> Entry | tuple[Entry, ...]:
        if isinstance(index, slice):
            buffer = self._buffer
            return tuple(buffer[position] for position in range(*index.indices(self._length)))
        if index < 0:
            index += self._length
        if not 0 <= index < self._length:
            msg = "Transcript index out of range"
            raise IndexError(msg)
        return self._buffer[index]

    def __iter__(self) -> Iterator[Entry]:
        buffer = self._buffer
        for position in range(self._length):
            yield buffer[position]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Transcript):
            return NotImplemented
        return self._length == other._length and all(a == b for a, b in zip(self, other, strict=True))

    def __hash__(self) -> int:
        return hash(tuple(self))

    def __repr__(self) -> str:
        return f"Transcript({list(self)!r})"

    @property
    def info_count(self) -> int:
        """Number of information calls recorded."""
        return self._info

    @property
    def rand_count(self) -> int:
        """Number of random calls recorded."""
        return self._length - self._info

    def info_values(self) -> list[Any]:
        """Information answers in call order."""
        return [answer.value for _, answer in self if answer.kind == "info"]

    def rand_draws(self) -> dict[int, Any]:
        """Random answers keyed by the index j of ξⱼ."""
        return {query.index: answer.value for query, answer in self if isinstance(query, RandQuery)}


@dataclass(frozen=True)
class AskInfo:
    """Continue with an information call."""

    query: InfoQuery


@dataclass(frozen=True)
class AskRand:
    """Continue with a random call."""

    query: RandQuery


@dataclass(frozen=True)
class Stop:
    """Terminate with the given output."""

    output: Any


Action = AskInfo | AskRand | Stop
Policy = Callable[[Transcript], Action]
NodeKind = Literal["info", "rand", "stop"]


@dataclass(frozen=True, eq=True)
class TreeNode:
    """Node of a finite decision tree (JSON decision-tree format)."""

    kind: NodeKind
    query: Any = None
    children: Mapping[Any, TreeNode] = field(default_factory=lambda: {})
    output: Any = None

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Strategy:
    """An adaptive algorithm as a pure mapping from transcripts to actions.

    ``fallback_output`` is φ₀, the output reported when a run does not
    terminate within the step limit.
    """

    name: str
    policy: Policy
    caps: tuple[int, int] | None = None
    tree: TreeNode | None = None
    fallback_output: Any = 0
    params: Mapping[str, Any] = field(default_factory=lambda: {})


@dataclass(frozen=True)
class Problem:
    """An abstract numerical problem P = (F, G, S, K, Λ)."""

    name: str
    solution: Callable[[Any], OutputValue]
    evaluate: Callable[[Any, InfoQuery], Any]
    is_valid_query: Callable[[InfoQuery], bool]
    inputs: Sequence[Any] | None = None
    test_set: Sequence[Any] = ()
    sampler: Callable[[np.random.Generator], Any] | None = None
    queries: tuple[InfoQuery, ...] | None = None
    answer_alphabet: tuple[Any, ...] | None = None
    dimension: int = 1
    norm: NormSpec = "max"
    labeler: Callable[[Any], str] = str
    params: Mapping[str, Any] = field(default_factory=lambda: {})

    def __post_init__(self) -> None:
        check_norm(self.norm, self.dimension)

    @property
    def is_finite(self) -> bool:
        """Whether F is given as a finite enumerable list."""
        return self.inputs is not None

    def test_inputs(self) -> Sequence[Any]:
        """All inputs for finite problems, the adversarial test set otherwise."""
        return self.inputs if self.inputs is not None else self.test_set

    def with_test_set(self, test_set: Iterable[Any]) -> Problem:
        """Copy of this problem evaluated on a different test set."""
        return dataclasses.replace(self, inputs=None, test_set=tuple(test_set))

    def zero(self) -> OutputValue:
        """The zero of G, shaped by the output dimension."""
        return 0 if self.dimension == 1 else tuple(0 for _ in range(self.dimension))

    def error(self, f: Any, output: OutputValue) -> Number:
        """Return ‖S(f) − output‖_G."""
        return distance(self.solution(f), output, self.norm)

    def label(self, f: Any) -> str:
        """Human-readable input label."""
        return self.labeler(f)


@dataclass(frozen=True)
class FiniteRestriction:
    """Finite access restriction: alphabet K' with independent per-query distributions."""

    alphabet: tuple[Any, ...]
    probabilities: tuple[Number, ...]
    per_query: Mapping[int, tuple[Number, ...]] = field(default_factory=lambda: {})
    independent: bool = True

    def __post_init__(self) -> None:
        if len(set(self.alphabet)) != len(self.alphabet):
            msg = f"Random alphabet has repeated symbols: {self.alphabet}"
            raise BadDistribution(msg)
        check_probability_vector(self.probabilities, len(self.alphabet))
        for index, vector in self.per_query.items():
            if index < 1:
                msg = f"Per-query distribution index must be >= 1, got {index}"
                raise BadParams(msg)
            check_probability_vector(vector, len(self.alphabet))

    @property
    def size(self) -> int:
        """|K'|."""
        return len(self.alphabet)

    def distribution(self, query: RandQuery) -> tuple[Number, ...]:
        """Probability vector of ξⱼ over the alphabet."""
        return self.per_query.get(query.index, self.probabilities)

    def support(self, query: RandQuery, mode: ArithmeticMode = "rational") -> list[tuple[Any, Number]]:
        """Positive-probability values of ξⱼ in alphabet order, probabilities in ``mode``."""
        return [
            (value, to_mode(p, mode))
            for value, p in zip(self.alphabet, self.distribution(query), strict=True)
            if p > 0
        ]

    def draw(self, query: RandQuery, rng: np.random.Generator) -> Any:
        """Sample ξⱼ."""
        vector = self.per_query.get(query.index)
        cumulative = self._cumulative if vector is None else _cumulative(vector)
        position = bisect.bisect_right(cumulative, float(rng.random()) * cumulative[-1])
        return self.alphabet[min(position, len(self.alphabet) - 1)]

    @functools.cached_property
    def _cumulative(self) -> list[float]:
        return _cumulative(self.probabilities)


def _cumulative(probabilities: Sequence[Number]) -> list[float]:
    cumulative: list[float] = []
    running = 0.0
    for p in probabilities:
        running += float(p)
        cumulative.append(running)
    return cumulative


@dataclass(frozen=True)
class RunResult:
    """Outcome of one execution of a strategy."""

    output: Any
    card_info: int
    card_rand: int
    transcript: Transcript
    terminated: bool


@dataclass(frozen=True)
class BranchOutcome:
    """One leaf of the exhaustive randomness tree."""

    probability: Number
    result: RunResult


@dataclass(frozen=True)
class ErrorReport:
    """Per-input expected errors and their supremum over the test set."""

    per_input: tuple[Number, ...]
    input_labels: tuple[str, ...]
    mode: ErrorMode
    seed: int | None = None
    samples: int | None = None
    standard_errors: tuple[float, ...] | None = None
    lower_estimate: bool = False

    @property
    def supremum(self) -> Number:
        """Maximum of the per-input errors."""
        return max(self.per_input)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "mode": self.mode,
            "supremum": json_number(self.supremum),
            "supremum_float": float(self.supremum),
            "lower_estimate": self.lower_estimate,
            "seed": self.seed,
            "samples": self.samples,
            "per_input": [
                {"input": label, "error": json_number(error), "error_float": float(error)}
                for label, error in zip(self.input_labels, self.per_input, strict=True)
            ],
            "standard_errors": list(self.standard_errors) if self.standard_errors is not None else None,
        }


@dataclass
class WellFormednessReport:
    """Findings of a replay battery over a strategy."""

    purity_violations: list[str] = field(default_factory=lambda: [])
    invalid_queries: list[str] = field(default_factory=lambda: [])
    cap_violations: list[str] = field(default_factory=lambda: [])
    policy_errors: list[str] = field(default_factory=lambda: [])
    observed_caps: tuple[int, int] = (0, 0)
    declared_caps: tuple[int, int] | None = None
    transcripts_checked: int = 0
    exhaustive: bool = False
    truncated: bool = False

    @property
    def pure(self) -> bool:
        """No purity violation was found."""
        return not self.purity_violations

    @property
    def caps_verified(self) -> bool:
        """Declared caps exist and held on every replayed path."""
        return self.declared_caps is not None and not self.cap_violations and not self.truncated

    @property
    def ok(self) -> bool:
        """No finding of any kind."""
        return self.pure and not self.invalid_queries and not self.cap_violations and not self.policy_errors


@dataclass
class BoundParams:
    """Constants of the bit-count bounds; all dimensionless."""

    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    sigma: float = 0.5
    alpha: float = 0.0
    d: float = 1.0
    r: float = 1.0
    p: float = 2.0
    alphabet_size: int = 2

    @property
    def p_bar(self) -> float:
        """p̄ = min(p, 2)."""
        return min(self.p, 2.0)


class NameSuggestion(TypedDict):
    """A registered name resembling an unknown one."""

    requested: str
    candidate: str
    match_score: int
    confidence: str


class CheckResult(TypedDict):
    """One property check of a verification suite."""

    suite: str
    check: str
    subject: str
    passed: bool
    status: str
    witness: str


@dataclass
class ExperimentConfig:
    """Configuration for one CLI run; mirrors the command-line flags."""

    subcommand: str = "verify"
    suite: str = "all"
    problem: str | None = None
    m: int | None = None
    strategy: str | None = None
    strategy_params: dict[str, Any] = field(default_factory=lambda: {})
    n: list[int] = field(default_factory=lambda: [])
    k: int | None = None
    restriction: Any = None
    bits: str = "log"
    seeds: list[int] = field(default_factory=lambda: list(range(100)))
    samples: int | None = None
    mode: ArithmeticMode = "rational"
    out: str | None = None
    xlsx: str | None = None
    branches_csv: str | None = None
    family: Any = None
    bound: str | None = None
    bound_params: dict[str, Any] = field(default_factory=lambda: {})


def as_fraction_or_float(value: Any) -> Any:
    """Parse ``"p/q"`` strings into Fractions; leave other values untouched."""
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            return value
    return value


def ensure_transcript(transcript: Transcript | Sequence[Entry]) -> Transcript:
    """Coerce a sequence of entries to a validated ``Transcript``."""
    if isinstance(transcript, Transcript):
        return transcript
    return Transcript(transcript)
