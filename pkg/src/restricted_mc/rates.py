"""Bit-budget versus error sweeps for the stratified integrator."""

from __future__ import annotations

import math
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from restricted_mc.algebra import Number
from restricted_mc.bounds import lipschitz_adversary_inputs
from restricted_mc.engine import empirical_error, run_sampled
from restricted_mc.errors import BadParams, InsufficientSamples
from restricted_mc.models import FiniteRestriction, Problem, Strategy
from restricted_mc.problems import (
    LipschitzFunction,
    bit_stratified_mc,
    bits_for_cells,
    default_rate_family,
    make_bit_restriction,
    make_lipschitz_problem,
    midpoint_rule,
    sawtooth,
)
from restricted_mc.transforms import derandomize

RATE_COLUMNS = ["n_cells", "bits_per_cell", "total_bits", "mean_error", "stderr", "seeds"]
DEFAULT_N_VALUES = (8, 16, 32, 64, 128, 256)


def resolve_bits(n_cells: int, bits: str | int) -> int:
    """Bits per cell for a schedule: ``"log"`` means ⌈log₂ n⌉, an integer is used as is.

    Raises:
        BadParams: If the schedule is neither ``"log"`` nor a positive integer
    """
    if bits == "log":
        return bits_for_cells(n_cells)
    try:
        value = int(bits)
    except ValueError:
        msg = f"Bits schedule must be 'log' or a positive integer, got {bits!r}"
        raise BadParams(msg) from None
    if value < 1:
        msg = f"Bits per cell must be >= 1, got {value}"
        raise BadParams(msg)
    return value


def _run_error(
    strategy: Strategy,
    problem: Problem,
    f: LipschitzFunction,
    restriction: FiniteRestriction,
    seed: int,
    n_cells: int,
) -> float:
    result = run_sampled(strategy, problem, f, restriction, np.random.SeedSequence(seed, spawn_key=(n_cells,)))
    return float(problem.error(f, result.output))


def sweep_point(
    n_cells: int,
    bits_per_cell: int,
    seeds: Sequence[int],
    family: Sequence[LipschitzFunction] | None = None,
) -> dict[str, object]:
    """Mean error and standard error of the worst family member over the seeds.

    Every member sees the same random bits for a given seed.

    Raises:
        InsufficientSamples: If fewer than two seeds are given
    """
    if len(seeds) < 2:
        msg = f"A sweep point needs at least 2 seeds, got {len(seeds)}"
        raise InsufficientSamples(msg)
    members = list(family) if family is not None else default_rate_family(n_cells, bits_per_cell)
    strategy = bit_stratified_mc(n_cells, bits_per_cell)
    problem = make_lipschitz_problem(members)
    restriction = make_bit_restriction()

    worst_mean = -1.0
    worst_stderr = 0.0
    for f in members:
        errors = np.array([_run_error(strategy, problem, f, restriction, seed, n_cells) for seed in seeds])
        mean = float(errors.mean())
        if mean > worst_mean:
            worst_mean = mean
            worst_stderr = float(errors.std(ddof=1) / math.sqrt(len(errors)))
    return {
        "n_cells": n_cells,
        "bits_per_cell": bits_per_cell,
        "total_bits": n_cells * bits_per_cell,
        "mean_error": worst_mean,
        "stderr": worst_stderr,
        "seeds": len(seeds),
    }


def sweep_rates(
    n_values: Sequence[int],
    bits: str | int = "log",
    seeds: Sequence[int] | None = None,
    family: Sequence[LipschitzFunction] | None = None,
) -> pd.DataFrame:
    """Run the stratified integrator over ``n_values`` and collect one row per n.

    Args:
        n_values: Numbers of cells
        bits: Bits-per-cell schedule, ``"log"`` or a fixed integer
        seeds: Seeds of the independent runs; defaults to 0..99
        family: Test functions; defaults to the identity and the matching sawtooth

    Returns:
        DataFrame with columns n_cells, bits_per_cell, total_bits, mean_error, stderr, seeds
    """
    seeds = list(range(100)) if seeds is None else seeds
    rows: list[dict[str, object]] = []
    for n_cells in n_values:
        if n_cells < 1:
            msg = f"Number of cells must be >= 1, got {n_cells}"
            raise BadParams(msg)
        b = resolve_bits(n_cells, bits)
        print(f"  [MODE] n_cells={n_cells}, bits_per_cell={b}, seeds={len(seeds)}")
        rows.append(sweep_point(n_cells, b, seeds, family))
    frame = pd.DataFrame(rows, columns=RATE_COLUMNS)
    return frame.sort_values("n_cells", kind="stable").reset_index(drop=True)


def fit_loglog_slope(frame: pd.DataFrame) -> float | None:
    """Least-squares slope of log mean_error against log n_cells.

    Returns None when fewer than two rows have a positive error.
    """
    positive = frame[frame["mean_error"] > 0]
    if len(positive) < 2:
        return None
    x = np.log(positive["n_cells"].to_numpy(dtype=float))
    y = np.log(positive["mean_error"].to_numpy(dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def write_rates_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Write a sweep table to CSV and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def midpoint_adversary_error(n: int) -> Number:
    """Worst error of the midpoint rule over its distance adversary and the matching sawtooth.

    Equals 1/(4n).
    """
    strategy = midpoint_rule(n)
    restriction = make_bit_restriction()
    tooth_problem = make_lipschitz_problem([sawtooth(n)])
    tree = derandomize(strategy, restriction, tooth_problem)
    family = [*lipschitz_adversary_inputs(tree), sawtooth(n)]
    return empirical_error(strategy, make_lipschitz_problem(family), restriction).supremum


def midpoint_table(n_values: Sequence[int]) -> pd.DataFrame:
    """Midpoint worst-case errors next to 1/(4n)."""
    rows: list[dict[str, object]] = []
    for n in n_values:
        error = midpoint_adversary_error(n)
        rows.append(
            {
                "n": n,
                "worst_error": str(error),
                "expected": str(Fraction(1, 4 * n)),
                "matches": error == Fraction(1, 4 * n),
            }
        )
    return pd.DataFrame(rows)
