"""Concrete problems, restrictions and reference algorithms.

Two problems are provided: averaging a sign vector over a grid (finite, so
every quantity is exactly computable) and integrating 1-Lipschitz functions
on [0, 1] from point evaluations.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, overload

import numpy as np

from restricted_mc.algebra import Number, check_probability_vector, to_mode
from restricted_mc.errors import BadDistribution, BadParams, SizeTooLarge, UnknownFamily
from restricted_mc.models import (
    Action,
    AskInfo,
    AskRand,
    FiniteRestriction,
    InfoQuery,
    Problem,
    RandQuery,
    Stop,
    Strategy,
    Transcript,
)
from restricted_mc.name_matcher import unknown_name_message

MAX_GRID_SIZE = 24
LIPSCHITZ_GRID_POINTS = 10_000
GRID_TEST_SAMPLES = 8
HALF = Fraction(1, 2)

# Grid problem


class SignVectors(Sequence[tuple[int, ...]]):
    """All 2^m vectors in {−1, +1}^m, produced on demand in binary order."""

    __slots__ = ("m",)

    def __init__(self, m: int) -> None:
        self.m = m

    def __len__(self) -> int:
        return 2**self.m

    @overload
    def __getitem__(self, index: int) -> tuple[int, ...]: ...

    @overload
    def __getitem__(self, index: slice) -> list[tuple[int, ...]]: ...

    def __getitem__(self, index: int | slice) -> tuple[int, ...] | list[tuple[int, ...]]:
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            msg = "Sign vector index out of range"
            raise IndexError(msg)
        return tuple(1 if (index >> (self.m - 1 - p)) & 1 else -1 for p in range(self.m))

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        for values in itertools.product((-1, 1), repeat=self.m):
            yield values


def sign_label(f: Sequence[int]) -> str:
    """Compact label such as ``(-1,+1,+1)``."""
    return "(" + ",".join("+1" if v > 0 else "-1" for v in f) + ")"


def _grid_problem(m: int, inputs: Sequence[Any] | None, test_set: Sequence[Any], sampler: Any) -> Problem:
    def solution(f: Sequence[int]) -> Fraction:
        return Fraction(sum(f), m)

    def evaluate(f: Sequence[int], query: InfoQuery) -> int:
        return f[query.param - 1]

    def is_valid_query(query: InfoQuery) -> bool:
        param = query.param
        return isinstance(param, int) and not isinstance(param, bool) and 1 <= param <= m

    return Problem(
        name=f"grid(m={m})",
        solution=solution,
        evaluate=evaluate,
        is_valid_query=is_valid_query,
        inputs=inputs,
        test_set=test_set,
        sampler=sampler,
        queries=tuple(InfoQuery(i) for i in range(1, m + 1)),
        answer_alphabet=(-1, 1),
        labeler=sign_label,
        params={"m": m},
    )


def make_grid_problem(m: int) -> Problem:
    """Average of a sign vector: F = {−1, +1}^m, S(f) = (1/m)·Σ f(i), Λ = coordinates.

    Args:
        m: Grid size

    Returns:
        Finite problem listing all 2^m inputs

    Raises:
        SizeTooLarge: If m is outside 1..24
    """
    if not 1 <= m <= MAX_GRID_SIZE:
        msg = f"Grid size must be between 1 and {MAX_GRID_SIZE} for enumeration, got {m}"
        raise SizeTooLarge(msg)
    return _grid_problem(m, SignVectors(m), (), None)


def grid_test_set(m: int, samples: int = GRID_TEST_SAMPLES, seed: int = 0) -> list[tuple[int, ...]]:
    """All-ones, all-minus-ones, alternating and ``samples`` seeded random sign vectors."""
    rng = np.random.default_rng(seed)
    test_set: list[tuple[int, ...]] = [
        tuple(1 for _ in range(m)),
        tuple(-1 for _ in range(m)),
        tuple(1 if i % 2 == 0 else -1 for i in range(m)),
    ]
    test_set.extend(tuple(int(v) for v in rng.choice((-1, 1), size=m)) for _ in range(samples))
    return test_set


def make_grid_family(m: int, samples: int = GRID_TEST_SAMPLES, seed: int = 0) -> Problem:
    """Grid problem of any size as a parametric family with a sampler and a test set.

    Raises:
        BadParams: If m < 1
    """
    if m < 1:
        msg = f"Grid size must be >= 1, got {m}"
        raise BadParams(msg)

    def sampler(rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(v) for v in rng.choice((-1, 1), size=m))

    return _grid_problem(m, None, grid_test_set(m, samples, seed), sampler)


# Lipschitz integration


def _exact(value: Any) -> Number:
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    return value


@dataclass(frozen=True)
class LipschitzFunction:
    """A named 1-Lipschitz function on [0, 1] with its exact integral."""

    family: str
    params: Mapping[str, Any]
    func: Callable[[Any], Any] = field(repr=False)
    integral: Number

    def __call__(self, x: Any) -> Any:
        return self.func(x)

    @property
    def label(self) -> str:
        """Display label such as ``sawtooth(n=2, phase=1/2)``."""
        args = ", ".join(f"{key}={value}" for key, value in self.params.items())
        return f"{self.family}({args})"


def _distance_to_integers(t: Any) -> Any:
    return abs(t - math.floor(t + Fraction(1, 2)))


def sawtooth(n: int, phase: Any = HALF, centered: bool = False) -> LipschitzFunction:
    """Triangle wave dist(n·x − phase, ℤ)/n with n teeth; mean 1/(4n), or 0 when centered.

    With phase 1/2 it vanishes at the midpoints (i − 1/2)/n.

    Raises:
        BadParams: If n < 1
    """
    if n < 1:
        msg = f"Sawtooth needs n >= 1, got {n}"
        raise BadParams(msg)
    shift = _exact(phase)
    offset = Fraction(1, 4 * n) if centered else 0

    def func(x: Any) -> Any:
        if isinstance(x, float):
            return abs(n * x - float(shift) - round(n * x - float(shift))) / n - float(offset)
        return _distance_to_integers(n * x - shift) / n - offset

    integral = Fraction(0) if centered else Fraction(1, 4 * n)
    params: dict[str, Any] = {"n": n, "phase": str(shift)}
    if centered:
        params["centered"] = True
    return LipschitzFunction("sawtooth", params, func, integral)


def hat(center: Any = HALF, height: Any = HALF) -> LipschitzFunction:
    """Tent max(0, height − |x − center|), clipped to [0, 1].

    Raises:
        BadParams: If center is outside [0, 1] or height is negative
    """
    c = _exact(center)
    h = _exact(height)
    if not 0 <= c <= 1 or h < 0:
        msg = f"Hat needs center in [0, 1] and height >= 0, got center={center}, height={height}"
        raise BadParams(msg)

    def func(x: Any) -> Any:
        if isinstance(x, float):
            return max(0.0, float(h) - abs(x - float(c)))
        return max(Fraction(0), h - abs(x - c))

    left = max(Fraction(0), h - c)
    right = max(Fraction(0), c + h - 1)
    integral = h * h - left * left / 2 - right * right / 2
    return LipschitzFunction("hat", {"center": str(c), "height": str(h)}, func, integral)


def linear(slope: Any = 1, intercept: Any = 0) -> LipschitzFunction:
    """f(x) = slope·x + intercept with |slope| ≤ 1.

    Raises:
        BadParams: If |slope| > 1
    """
    a = _exact(slope)
    b = _exact(intercept)
    if abs(a) > 1:
        msg = f"Linear member needs |slope| <= 1, got {slope}"
        raise BadParams(msg)

    def func(x: Any) -> Any:
        if isinstance(x, float):
            return float(a) * x + float(b)
        return a * x + b

    return LipschitzFunction("linear", {"slope": str(a), "intercept": str(b)}, func, Fraction(a) / 2 + b)


def random_pwl(seed: int, pieces: int = 8) -> LipschitzFunction:
    """Seeded piecewise-linear function on ``pieces`` equal cells with slopes in [−1, 1].

    Raises:
        BadParams: If pieces < 1
    """
    if pieces < 1:
        msg = f"random_pwl needs pieces >= 1, got {pieces}"
        raise BadParams(msg)
    rng = np.random.default_rng(seed)
    knots = np.linspace(0.0, 1.0, pieces + 1)
    slopes = rng.uniform(-1.0, 1.0, size=pieces)
    values = np.concatenate(([0.0], np.cumsum(slopes / pieces)))
    values -= values.mean()

    def func(x: Any) -> float:
        return float(np.interp(float(x), knots, values))

    integral = float(np.trapezoid(values, knots))
    return LipschitzFunction("random_pwl", {"seed": seed, "pieces": pieces}, func, integral)


def distance(points: Sequence[Any], sign: int = 1) -> LipschitzFunction:
    """sign·dist(x, Q) for a finite point set Q ⊂ [0, 1].

    It vanishes on Q, so it is the adversary for any rule querying exactly Q.

    Raises:
        BadParams: If Q is empty, leaves [0, 1], or sign is not ±1
    """
    q = sorted({_exact(p) for p in points})
    if not q or q[0] < 0 or q[-1] > 1 or sign not in (1, -1):
        msg = f"distance needs nonempty points in [0, 1] and sign ±1, got {list(points)}, {sign}"
        raise BadParams(msg)
    sorted_points = tuple(q)

    def func(x: Any) -> Any:
        if isinstance(x, float):
            return sign * min(abs(x - float(p)) for p in sorted_points)
        return sign * min(abs(x - p) for p in sorted_points)

    integral = sorted_points[0] ** 2 / 2 + (1 - sorted_points[-1]) ** 2 / 2
    integral += sum((b - a) ** 2 / 4 for a, b in itertools.pairwise(sorted_points))
    return LipschitzFunction(
        "distance",
        {"points": [str(p) for p in sorted_points], "sign": sign},
        func,
        sign * Fraction(integral),
    )


FAMILY_GENERATORS: dict[str, Callable[..., LipschitzFunction]] = {
    "sawtooth": sawtooth,
    "hat": hat,
    "linear": linear,
    "random_pwl": random_pwl,
    "distance": distance,
}


def make_family_member(spec: Mapping[str, Any]) -> LipschitzFunction:
    """Build one member from a spec such as ``{"family": "hat", "center": 0.5}``.

    Raises:
        UnknownFamily: If the generator name is not built in
        BadParams: If the parameters are rejected by the generator
    """
    name = str(spec.get("family", ""))
    if name not in FAMILY_GENERATORS:
        raise UnknownFamily(unknown_name_message("family", name, FAMILY_GENERATORS))
    params = {key: value for key, value in spec.items() if key != "family"}
    try:
        return FAMILY_GENERATORS[name](**params)
    except TypeError as e:
        msg = f"Invalid parameters for family '{name}': {e}"
        raise BadParams(msg) from e


def load_family_spec(source: str | Path | Mapping[str, Any] | Sequence[Mapping[str, Any]]) -> list[LipschitzFunction]:
    """Load family members from a JSON file path, a single spec or a list of specs.

    Raises:
        FileNotFoundError: If a given path does not exist
        UnknownFamily: If a spec names an unknown generator
        BadParams: If a member fails the 1-Lipschitz grid check
    """
    data: Any = source
    if isinstance(source, str | Path):
        spec_file = Path(source)
        if not spec_file.exists():
            msg = f"Family spec file not found: {source}"
            raise FileNotFoundError(msg)
        with spec_file.open(encoding="utf-8") as f:
            data = json.load(f)
    if isinstance(data, Mapping):
        data = data["members"] if "members" in data else [data]
    members = [make_family_member(spec) for spec in data]
    for member in members:
        if not check_lipschitz(member):
            msg = f"Family member {member.label} is not 1-Lipschitz on [0, 1]"
            raise BadParams(msg)
    return members


def check_lipschitz(member: LipschitzFunction, grid_points: int = LIPSCHITZ_GRID_POINTS) -> bool:
    """Check |f(x) − f(y)| ≤ |x − y| between neighbours of a uniform grid."""
    xs = np.linspace(0.0, 1.0, grid_points)
    ys = np.array([float(member(float(x))) for x in xs])
    return bool(np.all(np.abs(np.diff(ys)) <= np.diff(xs) + 1e-12))


def make_lipschitz_problem(
    family: str | Path | Mapping[str, Any] | Sequence[Mapping[str, Any]] | Sequence[LipschitzFunction],
    name: str = "lipschitz",
) -> Problem:
    """Integration S(f) = ∫₀¹ f over a family of 1-Lipschitz functions, Λ = point evaluations.

    Args:
        family: Family spec (path, spec, list of specs) or built members
        name: Problem name

    Returns:
        Problem whose test set is the family's members

    Raises:
        UnknownFamily: If a spec names an unknown generator
    """
    if isinstance(family, Sequence) and not isinstance(family, str) and all(
        isinstance(member, LipschitzFunction) for member in family
    ):
        members = [member for member in family if isinstance(member, LipschitzFunction)]
    else:
        members = load_family_spec(family)  # type: ignore[arg-type]

    def solution(f: LipschitzFunction) -> Number:
        return f.integral

    def evaluate(f: LipschitzFunction, query: InfoQuery) -> Any:
        return f(query.param)

    def is_valid_query(query: InfoQuery) -> bool:
        param = query.param
        return isinstance(param, int | float | Fraction) and not isinstance(param, bool) and 0 <= param <= 1

    def sampler(rng: np.random.Generator) -> LipschitzFunction:
        return random_pwl(int(rng.integers(2**31)))

    return Problem(
        name=name,
        solution=solution,
        evaluate=evaluate,
        is_valid_query=is_valid_query,
        test_set=tuple(members),
        sampler=sampler,
        labeler=lambda f: f.label,
        params={"members": [member.label for member in members]},
    )


def default_rate_family(n_cells: int, bits_per_cell: int) -> list[LipschitzFunction]:
    """Test members for a stratified sweep: the identity and the tooth that vanishes at every sample point."""
    return [linear(1), sawtooth(n_cells * 2**bits_per_cell)]


# Restrictions


def make_bit_restriction() -> FiniteRestriction:
    """Independent fair bits: K' = {0, 1}, P(ξⱼ = 0) = P(ξⱼ = 1) = 1/2."""
    return FiniteRestriction((0, 1), (Fraction(1, 2), Fraction(1, 2)))


def make_finite_restriction(
    alphabet: Sequence[Any],
    distribution: Sequence[Number] | None = None,
    per_query: Mapping[int, Sequence[Number]] | None = None,
) -> FiniteRestriction:
    """Finite restriction over ``alphabet``; uniform when no distribution is given.

    Float probabilities are read exactly through their decimal representation.

    Raises:
        BadDistribution: If the alphabet is empty, or a distribution is mis-sized, negative or does not sum to 1
    """
    symbols = tuple(alphabet)
    if not symbols:
        msg = "Random alphabet must not be empty"
        raise BadDistribution(msg)
    if distribution is None:
        probabilities: tuple[Number, ...] = tuple(Fraction(1, len(symbols)) for _ in symbols)
    else:
        probabilities = tuple(to_mode(p, "rational") for p in distribution)
    check_probability_vector(probabilities, len(symbols))
    vectors = {int(j): tuple(to_mode(p, "rational") for p in vector) for j, vector in (per_query or {}).items()}
    return FiniteRestriction(symbols, probabilities, vectors)


def restriction_from_spec(spec: Any) -> FiniteRestriction:
    """Build a restriction from ``"bit"`` or ``{"alphabet": [...], "probabilities": [...]}``.

    Raises:
        BadParams: If the spec has an unknown form
    """
    if spec is None or spec == "bit":
        return make_bit_restriction()
    if isinstance(spec, Mapping) and "alphabet" in spec:
        per_query = spec.get("per_query")
        return make_finite_restriction(spec["alphabet"], spec.get("probabilities"), per_query)
    msg = f"Unknown restriction spec: {spec!r}"
    raise BadParams(msg)


# Reference algorithms


def midpoint_rule(n: int) -> Strategy:
    """Deterministic rule querying f((i − 1/2)/n), i = 1..n, and outputting the mean.

    Raises:
        BadParams: If n < 1
    """
    if n < 1:
        msg = f"Midpoint rule needs n >= 1, got {n}"
        raise BadParams(msg)
    nodes = [Fraction(2 * i + 1, 2 * n) for i in range(n)]

    def policy(transcript: Transcript) -> Action:
        step = len(transcript)
        if step < n:
            return AskInfo(InfoQuery(nodes[step]))
        return Stop(sum(transcript.info_values()) / n)

    return Strategy(f"midpoint({n})", policy, caps=(n, 0), params={"n": n})


def stratified_point(cell: int, u: int, n_cells: int, bits_per_cell: int) -> Fraction:
    """Dyadic point (cell + (u + 1/2)·2^−b)/n_cells inside the given cell."""
    return (cell + Fraction(2 * u + 1, 2 ** (bits_per_cell + 1))) / n_cells


def bit_stratified_mc(n_cells: int, bits_per_cell: int) -> Strategy:
    """Stratified Monte Carlo integrator spending ``bits_per_cell`` fair bits per cell.

    For each cell the strategy draws b fresh bits (most significant first),
    forms u ∈ {0, …, 2^b − 1}, evaluates f at the dyadic point of the cell and
    finally outputs the average.  Every branch uses exactly (n_cells, n_cells·b)
    calls.

    Raises:
        BadParams: If n_cells < 1 or bits_per_cell < 1
    """
    if n_cells < 1 or bits_per_cell < 1:
        msg = f"Stratified integrator needs n_cells >= 1 and bits_per_cell >= 1, got {n_cells}, {bits_per_cell}"
        raise BadParams(msg)
    b = bits_per_cell
    block = b + 1

    def policy(transcript: Transcript) -> Action:
        step = len(transcript)
        cell, offset = divmod(step, block)
        if cell == n_cells:
            return Stop(sum(transcript.info_values()) / n_cells)
        if offset < b:
            return AskRand(RandQuery(cell * b + offset + 1))
        u = 0
        for _, answer in transcript[step - b : step]:
            u = 2 * u + int(answer.value)
        return AskInfo(InfoQuery(stratified_point(cell, u, n_cells, b)))

    return Strategy(
        f"bit_stratified({n_cells},{b})",
        policy,
        caps=(n_cells, n_cells * b),
        params={"n_cells": n_cells, "bits_per_cell": b},
    )


def bits_for_cells(n_cells: int) -> int:
    """⌈log₂ n⌉ bits per cell, at least one."""
    return max(1, math.ceil(math.log2(n_cells))) if n_cells > 1 else 1


PROBLEM_STRATEGIES: dict[str, Callable[..., Strategy]] = {
    "midpoint": midpoint_rule,
    "bit_stratified": bit_stratified_mc,
}
