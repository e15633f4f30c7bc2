"""Minimal-error oracles and bit-count bound calculators."""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import fields
from fractions import Fraction
from typing import Any

import numpy as np

from restricted_mc.algebra import Number, json_number
from restricted_mc.errors import BadParams, CardinalityOverflow, SizeTooLarge, UnknownBound
from restricted_mc.models import BoundParams, InfoQuery, Problem
from restricted_mc.name_matcher import unknown_name_message
from restricted_mc.problems import LipschitzFunction, distance, linear
from restricted_mc.transforms import DeterministicTree

MAX_ORACLE_INPUTS = 2**16
MAX_CARDINALITY = 2**63 - 1
THRESHOLD_SCAN_LIMIT = 2**20

BOUND_NAMES = ("thm1", "cor2", "cor3", "kappa")


def chebyshev_radius(values: Sequence[Number]) -> Number:
    """Radius (max − min)/2 of a finite set of reals."""
    return (max(values) - min(values)) / 2


def chebyshev_center(values: Sequence[Number]) -> Number:
    """Center (max + min)/2 of a finite set of reals."""
    return (max(values) + min(values)) / 2


def brute_force_det_minimal_error(problem: Problem, n: int) -> Number:
    """Exact n-th minimal error over adaptive deterministic query trees.

    A state is the set of inputs consistent with the answers so far.  Its
    value is the smaller of its Chebyshev radius (stop now) and, for each
    query that splits it, the worst value over the answers with one call
    less.

    Args:
        problem: Finite problem with scalar solutions and a query list
        n: Number of information calls allowed

    Returns:
        e_n^det as an exact rational when the solutions are rational

    Raises:
        SizeTooLarge: If the problem has more than 2^16 inputs
        ValueError: If the problem is not finite or lists no queries
    """
    if problem.inputs is None or problem.queries is None:
        msg = f"Problem '{problem.name}' must list its inputs and queries for the minimax oracle"
        raise ValueError(msg)
    if len(problem.inputs) > MAX_ORACLE_INPUTS:
        msg = f"Problem '{problem.name}' has {len(problem.inputs)} inputs, above the oracle limit {MAX_ORACLE_INPUTS}"
        raise SizeTooLarge(msg)
    if n < 0:
        msg = f"Number of calls must be >= 0, got {n}"
        raise ValueError(msg)

    inputs = list(problem.inputs)
    solutions = [Fraction(s) if isinstance(s, int) else s for s in (problem.solution(f) for f in inputs)]
    answers = [[problem.evaluate(f, query) for f in inputs] for query in problem.queries]

    @functools.cache
    def value(state: frozenset[int], budget: int) -> Number:
        radius = chebyshev_radius([solutions[i] for i in state])
        if budget == 0 or radius == 0:
            return radius
        best = radius
        for column in answers:
            parts: dict[Any, list[int]] = {}
            for i in state:
                parts.setdefault(column[i], []).append(i)
            if len(parts) < 2:
                continue
            worst = max(value(frozenset(part), budget - 1) for part in parts.values())
            best = min(best, worst)
        return best

    return value(frozenset(range(len(inputs))), n)


def det_minimal_error_grid(m: int, n: int) -> Fraction:
    """Closed form max(0, (m − n)/m) of the grid problem's n-th minimal error.

    Raises:
        BadParams: If m < 1 or n < 0
    """
    if m < 1 or n < 0:
        msg = f"Grid minimal error needs m >= 1 and n >= 0, got m={m}, n={n}"
        raise BadParams(msg)
    return Fraction(max(0, m - n), m)


def grid_det_error(m: int) -> Callable[[int], Fraction]:
    """n ↦ e_n^det of the grid problem of size m."""
    return functools.partial(det_minimal_error_grid, m)


def theorem1_inflated_cardinality(n: int, k: int, alphabet_size: int) -> int:
    """Return 3·n·|K'|^{3k}, the information budget after derandomization.

    Raises:
        BadParams: If n or k is negative or |K'| < 2
        CardinalityOverflow: If the result exceeds 2^63 − 1
    """
    if n < 0 or k < 0 or alphabet_size < 2:
        msg = f"Inflated cardinality needs n, k >= 0 and |K'| >= 2, got n={n}, k={k}, |K'|={alphabet_size}"
        raise BadParams(msg)
    if n == 0:
        return 0
    if math.log2(3 * n) + 3 * k * math.log2(alphabet_size) > 64:
        msg = f"Inflated cardinality 3·{n}·{alphabet_size}^{3 * k} exceeds {MAX_CARDINALITY}"
        raise CardinalityOverflow(msg)
    value = 3 * n * alphabet_size ** (3 * k)
    if value > MAX_CARDINALITY:
        msg = f"Inflated cardinality {value} exceeds {MAX_CARDINALITY}"
        raise CardinalityOverflow(msg)
    return value


def theorem1_lower_bound(
    det_error: Callable[[int], Number],
    n: int,
    k: int,
    alphabet_size: int,
) -> Number:
    """Return (1/3)·e^det at cardinality 3n|K'|^{3k}.

    ``det_error`` must be nonincreasing; it is checked on a few points up to
    twice the inflated cardinality.

    Raises:
        BadParams: If a sample point shows ``det_error`` increasing
    """
    cardinality = theorem1_inflated_cardinality(n, k, alphabet_size)
    points = sorted({0, 1, cardinality // 2, max(cardinality - 1, 0), cardinality, cardinality + 1, 2 * cardinality})
    values = [det_error(p) for p in points]
    for (p, v), (q, w) in itertools.pairwise(zip(points, values, strict=True)):
        if w > v:
            msg = f"Deterministic error increases from {v} at n={p} to {w} at n={q}"
            raise BadParams(msg)
    return Fraction(1, 3) * det_error(cardinality)


def _validate_logs(params: BoundParams, n: float) -> None:
    if n < 2:
        msg = f"Bounds need n >= 2, got {n}"
        raise BadParams(msg)
    if params.alphabet_size < 2:
        msg = f"Bounds need |K'| >= 2, got {params.alphabet_size}"
        raise BadParams(msg)
    if params.c0 <= 0 or params.c3 <= 0:
        msg = f"Bounds need c0 > 0 and c3 > 0, got c0={params.c0}, c3={params.c3}"
        raise BadParams(msg)


def cor2_bit_lower_bound(params: BoundParams, n: float) -> float:
    """Bits needed to beat error c₀n^{−r/d−σ}: d/(3r·log₂|K'|)·(σ·log₂n − log₂c₀ + log₂(c₃/3)).

    The value may be negative; callers clamp it for display.

    Raises:
        BadParams: If n < 2, |K'| < 2, a constant is nonpositive or σ ∉ (0, 1 − 1/p̄]
    """
    _validate_logs(params, n)
    if params.d <= 0 or params.r <= 0:
        msg = f"Bounds need d > 0 and r > 0, got d={params.d}, r={params.r}"
        raise BadParams(msg)
    if not 0 < params.sigma <= 1 - 1 / params.p_bar:
        msg = f"sigma must lie in (0, {1 - 1 / params.p_bar}], got {params.sigma}"
        raise BadParams(msg)
    factor = params.d / (3 * params.r * math.log2(params.alphabet_size))
    return factor * (params.sigma * math.log2(n) - math.log2(params.c0) + math.log2(params.c3 / 3))


def cor2_error_threshold(params: BoundParams, n: float) -> float:
    """Error level c₀·n^{−r/d−σ}."""
    return params.c0 * n ** (-params.r / params.d - params.sigma)


def _cor3_leading(params: BoundParams, n: float, divisor: int) -> float:
    return params.c3**2 / (divisor * params.c0**2) * n * math.log2(n) ** (-2 * params.alpha)


def cor3_bit_lower_bound(params: BoundParams, n: float, n0: float | None = None) -> float:
    """(3·log₂|K'|)^{−1}·(c₃²/(9c₀²)·n·(log₂n)^{−2α} − log₂(3n)).

    With ``n0`` the eventual form is used instead, with c₃²/(18c₀²) and
    −log₂(3n₀).

    Raises:
        BadParams: If n < 2, |K'| < 2 or a constant is nonpositive
    """
    _validate_logs(params, n)
    if n0 is None:
        inner = _cor3_leading(params, n, 9) - math.log2(3 * n)
    else:
        if n0 < 1:
            msg = f"n0 must be >= 1, got {n0}"
            raise BadParams(msg)
        inner = _cor3_leading(params, n, 18) - math.log2(3 * n0)
    return inner / (3 * math.log2(params.alphabet_size))


def cor3_threshold_n0(params: BoundParams, limit: int = THRESHOLD_SCAN_LIMIT) -> int | None:
    """Smallest n₀ with c₃²/(18c₀²)·n(log₂n)^{−2α} ≥ log₂(3n) for every n in [n₀, limit].

    Returns None when the condition fails at ``limit``.
    """
    _validate_logs(params, 2)
    ns = np.arange(2, limit + 1, dtype=float)
    holds = params.c3**2 / (18 * params.c0**2) * ns * np.log2(ns) ** (-2 * params.alpha) >= np.log2(3 * ns)
    if not holds[-1]:
        return None
    failing = np.flatnonzero(~holds)
    return 2 if failing.size == 0 else int(ns[failing[-1]]) + 1


def kappa(n: int, c2: int = 1) -> int:
    """κ(n) = c₂·⌈n·(log₂n)^{−1}·log₂(log₂n)⌉.

    Raises:
        BadParams: If n < 3 or c2 < 1
    """
    if n < 3:
        msg = f"kappa needs n >= 3, got {n}"
        raise BadParams(msg)
    if c2 < 1:
        msg = f"kappa needs an integer c2 >= 1, got {c2}"
        raise BadParams(msg)
    log_n = math.log2(n)
    value = n * math.log2(log_n) / log_n
    nearest = round(value)
    ceiling = nearest if abs(value - nearest) < 1e-9 else math.ceil(value)
    return c2 * ceiling


_BOUND_PARAM_FIELDS = {f.name for f in fields(BoundParams)}


def _number(value: Any) -> Any:
    if isinstance(value, str):
        return Fraction(value)
    return value


def bound_params_from(values: Mapping[str, Any]) -> BoundParams:
    """BoundParams from a mapping, ignoring keys that are not constants."""
    kwargs: dict[str, Any] = {}
    for key, value in values.items():
        if key in _BOUND_PARAM_FIELDS:
            kwargs[key] = int(_number(value)) if key == "alphabet_size" else float(_number(value))
    return BoundParams(**kwargs)


def evaluate_bound(name: str, values: Mapping[str, Any]) -> dict[str, Any]:
    """Evaluate a named calculator and echo its inputs.

    ``value`` is clamped at zero for display; ``raw`` keeps the formula's value.

    Raises:
        UnknownBound: If the name is not a calculator
        BadParams: If the parameters are invalid
        KeyError: If a required parameter is missing
    """
    if name not in BOUND_NAMES:
        raise UnknownBound(unknown_name_message("bound", name, BOUND_NAMES))
    result: dict[str, Any] = {"bound": name, "inputs": {key: values[key] for key in sorted(values)}}
    if name == "thm1":
        n = int(values["n"])
        k = int(values["k"])
        q = int(values.get("alphabet_size", 2))
        raw: Number = theorem1_inflated_cardinality(n, k, q)
        if "m" in values:
            lower = theorem1_lower_bound(grid_det_error(int(values["m"])), n, k, q)
            result["lower_bound"] = json_number(lower)
            result["lower_bound_float"] = float(lower)
    elif name == "kappa":
        raw = kappa(int(values["n"]), int(values.get("c2", 1)))
    elif name == "cor2":
        params = bound_params_from(values)
        raw = cor2_bit_lower_bound(params, float(_number(values["n"])))
        result["error_threshold"] = cor2_error_threshold(params, float(_number(values["n"])))
    else:
        params = bound_params_from(values)
        n0 = values.get("n0")
        raw = cor3_bit_lower_bound(params, float(_number(values["n"])), None if n0 is None else float(_number(n0)))
    result["raw"] = json_number(raw)
    result["value"] = json_number(max(raw, 0))
    result["clamped"] = raw < 0
    result["negative"] = raw < 0
    return result


# Adversary inputs


def queried_coordinates(tree: DeterministicTree) -> list[int]:
    """Coordinates the tree asks when every answer is +1."""
    _, calls = tree.run(lambda _query: 1)
    return [query.param for query, _ in calls]


def grid_adversary_inputs(tree: DeterministicTree, m: int) -> list[tuple[int, ...]]:
    """Two grid inputs the tree cannot tell apart, one of which it gets wrong by ≥ (m − |Q|)/m.

    Q is the set of coordinates queried on the all-ones input.  The second
    input is +1 on Q and −1 elsewhere.
    """
    queried = set(queried_coordinates(tree))
    ones = tuple(1 for _ in range(m))
    masked = tuple(1 if i in queried else -1 for i in range(1, m + 1))
    return [ones] if masked == ones else [ones, masked]


def lipschitz_adversary_inputs(tree: DeterministicTree) -> list[LipschitzFunction]:
    """±dist(·, Q) for the point set Q the tree queries on the zero function."""

    def zero_answer(_query: InfoQuery) -> int:
        return 0

    _, calls = tree.run(zero_answer)
    points = [query.param for query, _ in calls]
    if not points:
        return [linear(0, Fraction(1, 2)), linear(0, Fraction(-1, 2))]
    return [distance(points, 1), distance(points, -1)]
