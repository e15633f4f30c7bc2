"""Arithmetic on output-space elements.

Outputs live in a finite-dimensional real space G: scalars, tuples of
scalars, or ``ExtendedOutput`` pairs for G ⊕ ℝ.  Two arithmetic modes are
supported: exact rationals (``Fraction``) and float64.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Literal

from restricted_mc.errors import BadDistribution, BadParams

Number = int | float | Fraction
Vector = tuple[Number, ...]
ArithmeticMode = Literal["rational", "float"]
NormName = Literal["max", "l1", "l2"]

ARITHMETIC_MODES: tuple[ArithmeticMode, ...] = ("rational", "float")
FLOAT_TOLERANCE = 1e-9
PROBABILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ExtendedOutput:
    """Element of G ⊕ ℝ: an output value together with a real flag."""

    value: Any
    flag: Number

    def __add__(self, other: ExtendedOutput) -> ExtendedOutput:
        return ExtendedOutput(add(self.value, other.value), self.flag + other.flag)


type OutputValue = Number | Vector | ExtendedOutput
type NormSpec = NormName | Callable[[Any], Number]

NORM_NAMES: tuple[NormName, ...] = ("max", "l1", "l2")


def to_mode(x: Number, mode: ArithmeticMode) -> Number:
    """Convert a probability or weight to the requested arithmetic mode.

    Floats are read through their shortest decimal representation in
    rational mode, so ``0.9`` becomes ``9/10``.
    """
    if mode == "float":
        return float(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def one(mode: ArithmeticMode) -> Number:
    """Return the multiplicative identity of the mode."""
    return Fraction(1) if mode == "rational" else 1.0


def zero(mode: ArithmeticMode) -> Number:
    """Return the additive identity of the mode."""
    return Fraction(0) if mode == "rational" else 0.0


def zero_like(value: OutputValue) -> OutputValue:
    """Return the zero element with the same shape as ``value``."""
    if isinstance(value, ExtendedOutput):
        return ExtendedOutput(zero_like(value.value), 0)
    if isinstance(value, tuple):
        return tuple(0 for _ in value)
    return 0


def add(a: OutputValue, b: OutputValue) -> OutputValue:
    """Add two elements of the same shape."""
    if isinstance(a, ExtendedOutput) and isinstance(b, ExtendedOutput):
        return a + b
    if isinstance(a, tuple) and isinstance(b, tuple):
        if len(a) != len(b):
            msg = f"Cannot add vectors of dimension {len(a)} and {len(b)}"
            raise ValueError(msg)
        return tuple(x + y for x, y in zip(a, b, strict=True))
    return a + b


def scale(c: Number, value: OutputValue) -> OutputValue:
    """Multiply an element by a scalar."""
    if isinstance(value, ExtendedOutput):
        return ExtendedOutput(scale(c, value.value), c * value.flag)
    if isinstance(value, tuple):
        return tuple(c * x for x in value)
    return c * value


def divide(value: OutputValue, divisor: Number) -> OutputValue:
    """Divide an element by a nonzero scalar, exactly when possible."""
    inverse = 1.0 / divisor if isinstance(divisor, float) else Fraction(1) / divisor
    return scale(inverse, value)


def weighted_sum(weights: Sequence[Number], values: Sequence[OutputValue]) -> OutputValue:
    """Return Σ wᵢ·vᵢ.

    Raises:
        ValueError: If the sequences are empty or differ in length
    """
    if len(weights) != len(values) or not weights:
        msg = f"weighted_sum needs equal nonempty sequences, got {len(weights)} and {len(values)}"
        raise ValueError(msg)
    total = scale(weights[0], values[0])
    for weight, value in zip(weights[1:], values[1:], strict=True):
        total = add(total, scale(weight, value))
    return total


def norm(value: OutputValue, kind: NormSpec = "max") -> Number:
    """Norm of an element.

    Scalars always use the absolute value.  Vectors use the named norm:
    ``"max"`` (default), ``"l1"`` or ``"l2"``; a callable is applied as is.
    G ⊕ ℝ uses the maximum of the two component norms.

    Raises:
        BadParams: If the norm name is unknown
    """
    if isinstance(value, ExtendedOutput):
        return max(norm(value.value, kind), abs(value.flag))
    if callable(kind):
        return kind(value)
    if not isinstance(value, tuple):
        return abs(value)
    if kind == "max":
        return max((abs(x) for x in value), default=0)
    if kind == "l1":
        return sum((abs(x) for x in value), start=0)
    if kind == "l2":
        squares = sum((x * x for x in value), start=0)
        if isinstance(squares, int | Fraction):
            exact = Fraction(squares)
            num, den = math.isqrt(exact.numerator), math.isqrt(exact.denominator)
            if num * num == exact.numerator and den * den == exact.denominator:
                return Fraction(num, den)
        return math.sqrt(squares)
    msg = f"Unknown norm '{kind}', expected one of {', '.join(NORM_NAMES)}"
    raise BadParams(msg)


def distance(a: OutputValue, b: OutputValue, kind: NormSpec = "max") -> Number:
    """Return ‖a − b‖."""
    return norm(add(a, scale(-1, b)), kind)


def check_norm(kind: NormSpec, dimension: int) -> None:
    """Sanity-check a norm on the basis vectors of G and under scaling.

    Checks ‖0‖ = 0, ‖eᵢ‖ > 0, ‖c·eᵢ‖ = |c|·‖eᵢ‖ and the triangle
    inequality on e₁ + e₂.

    Raises:
        BadParams: If the dimension is not positive or a check fails
    """
    if dimension < 1:
        msg = f"Output dimension must be >= 1, got {dimension}"
        raise BadParams(msg)
    if dimension == 1:
        basis: list[OutputValue] = [Fraction(1)]
    else:
        basis = [tuple(Fraction(int(i == j)) for j in range(dimension)) for i in range(dimension)]
    failures: list[str] = []
    if norm(zero_like(basis[0]), kind) != 0:
        failures.append("norm of zero is not 0")
    for i, e in enumerate(basis):
        size = norm(e, kind)
        if not size > 0:
            failures.append(f"norm of basis vector {i + 1} is {size}")
        for c in (Fraction(-2), Fraction(1, 2)):
            if not outputs_equal(norm(scale(c, e), kind), abs(c) * size):
                failures.append(f"norm of {c}·e{i + 1} is not {abs(c)}·{size}")
    if dimension > 1:
        total = norm(add(basis[0], basis[1]), kind)
        if total > norm(basis[0], kind) + norm(basis[1], kind) + FLOAT_TOLERANCE:
            failures.append("triangle inequality fails on e1 + e2")
    if failures:
        msg = f"Output norm is not a norm: {failures[0]}"
        raise BadParams(msg)


def is_exact(value: OutputValue) -> bool:
    """Whether an element is free of floating point components."""
    if isinstance(value, ExtendedOutput):
        return is_exact(value.value) and is_exact(value.flag)
    if isinstance(value, tuple):
        return all(is_exact(x) for x in value)
    return isinstance(value, int | Fraction)


def outputs_equal(a: OutputValue, b: OutputValue, tolerance: float = FLOAT_TOLERANCE) -> bool:
    """Exact equality for rational elements, tolerance comparison otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return distance(a, b, "max") <= tolerance


def check_probability_vector(probabilities: Sequence[Number], expected_size: int | None = None) -> None:
    """Validate a probability vector.

    Args:
        probabilities: Candidate probabilities
        expected_size: Required length, if any

    Raises:
        BadDistribution: If entries are negative, the size is wrong or the sum is not one
    """
    if expected_size is not None and len(probabilities) != expected_size:
        msg = f"Distribution has {len(probabilities)} entries, expected {expected_size}"
        raise BadDistribution(msg)
    if not probabilities:
        msg = "Distribution is empty"
        raise BadDistribution(msg)
    if any(p < 0 for p in probabilities):
        msg = f"Distribution has negative entries: {list(probabilities)}"
        raise BadDistribution(msg)
    total = sum(probabilities)
    exact = all(isinstance(p, int | Fraction) for p in probabilities)
    if (exact and total != 1) or (not exact and abs(total - 1) > PROBABILITY_TOLERANCE):
        msg = f"Distribution sums to {total}, not 1"
        raise BadDistribution(msg)


def json_number(value: Number) -> int | float | str:
    """Encode a number for JSON: integers stay integers, other rationals become ``"p/q"``."""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    return value
