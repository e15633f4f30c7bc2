"""CLI entry point: verification suites, derandomization, rate sweeps and bound calculators."""

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import pandas as pd

from restricted_mc.algebra import ArithmeticMode, outputs_equal
from restricted_mc.bounds import evaluate_bound
from restricted_mc.config import create_config
from restricted_mc.engine import empirical_error, enumerate_branches, expected_output, write_branches_csv
from restricted_mc.errors import BadParams
from restricted_mc.excel_generator import generate_rates_workbook, generate_verification_workbook
from restricted_mc.models import (
    BranchOutcome,
    ExperimentConfig,
    FiniteRestriction,
    Problem,
    Strategy,
    as_fraction_or_float,
)
from restricted_mc.problems import make_grid_problem, make_lipschitz_problem, restriction_from_spec
from restricted_mc.rates import DEFAULT_N_VALUES, fit_loglog_slope, sweep_rates, write_rates_csv
from restricted_mc.reporter import checks_to_frame, generate_summary_statistics, print_rates_summary, print_summary
from restricted_mc.strategy import load_tree_strategy, save_tree
from restricted_mc.suites import SUITE_STRATEGIES, resolve_strategy, run_suite, suite_entries
from restricted_mc.transforms import derandomize, trace_log

DEFAULT_TREE_FILE = "derandomized_tree.json"
DEFAULT_RATES_FILE = "rates.csv"


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments.

    Returns:
        Parsed arguments
    """
    parser = argparse.ArgumentParser(description="Restricted Monte Carlo laboratory")
    parser.add_argument("subcommand", choices=["verify", "derandomize", "rates", "bounds"])
    parser.add_argument("--config", type=str, default=None, help="Path to configuration JSON file")
    parser.add_argument("--suite", type=str, default=None, help="Verification suite (default: all)")
    parser.add_argument("--problem", type=str, default=None, choices=["grid", "lipschitz"])
    parser.add_argument("--m", type=int, default=None, help="Grid size")
    parser.add_argument("--strategy", type=str, default=None, help="Built-in strategy name or decision-tree JSON")
    parser.add_argument("--n", type=str, default=None, help="Budget n, a list '8,16' or a range '8:257:2x'")
    parser.add_argument("--k", type=int, default=None, help="Random-call budget k")
    parser.add_argument("--bits", type=str, default=None, help="Bits per cell: 'log' or an integer")
    parser.add_argument("--seeds", type=str, default=None, help="Seeds as 'start:stop' or '1,2,7'")
    parser.add_argument("--samples", type=int, default=None, help="Sample count for sampled checks")
    parser.add_argument("--mode", type=str, default=None, choices=["rational", "float"])
    parser.add_argument("--restriction", type=str, default=None, help="'bit' or a JSON restriction spec")
    parser.add_argument("--family", type=str, default=None, help="Lipschitz family JSON file")
    parser.add_argument("--bound", type=str, default=None, help="Bound calculator: thm1, cor2, cor3, kappa")
    parser.add_argument(
        "--param",
        action="append",
        default=None,
        metavar="KEY=VALUE",
        help="Bound constant or strategy parameter (repeatable)",
    )
    parser.add_argument("--out", type=str, default=None, help="Output file")
    parser.add_argument("--xlsx", type=str, default=None, help="Optional Excel workbook output")
    parser.add_argument("--branches-csv", type=str, default=None, help="Optional per-branch CSV dump")
    return parser.parse_args(argv)


def _parse_value(raw: str) -> Any:
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return as_fraction_or_float(raw)


def _parse_params(pairs: Sequence[str] | None) -> dict[str, Any]:
    """Parse repeated ``KEY=VALUE`` flags.

    Raises:
        ValueError: If a pair has no ``=``
    """
    params: dict[str, Any] = {}
    for pair in pairs or []:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            msg = f"Parameter '{pair}' must look like KEY=VALUE"
            raise ValueError(msg)
        params[key.strip()] = _parse_value(raw.strip())
    return params


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict[str, Any] = {key: value for key, value in vars(args).items() if key not in {"config", "param"}}
    params = _parse_params(args.param)
    if params:
        values["bound_params" if args.subcommand == "bounds" else "strategy_params"] = params
    if isinstance(args.restriction, str) and args.restriction.lstrip().startswith("{"):
        values["restriction"] = json.loads(args.restriction)
    return create_config(values, args.config)


def _dump_json(document: Any, path: str | Path | None) -> None:
    text = json.dumps(document, indent=2, sort_keys=True, default=str)
    if path is None:
        print(text)
        return
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(text + "\n", encoding="utf-8")
    print(f"[SUCCESS] Written: {output_path}")


def _frame_records(frame: pd.DataFrame) -> list[dict[str, Any]]:
    return json.loads(frame.to_json(orient="records"))


def _banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70)


def _branch_groups(
    strategy: Strategy,
    problem: Problem,
    restriction: FiniteRestriction,
    mode: ArithmeticMode,
    prefix: str = "",
) -> dict[str, list[BranchOutcome]]:
    return {
        f"{prefix}{problem.label(f)}": enumerate_branches(strategy, problem, f, restriction, mode=mode)
        for f in problem.test_inputs()
    }


def _add_suite_error_reports(config: ExperimentConfig, report: dict[str, Any]) -> None:
    """Attach each suite member's error report; write their branches when asked."""
    if config.strategy is not None and config.strategy not in SUITE_STRATEGIES:
        return
    entries = suite_entries(config.strategy)
    report["error_reports"] = {
        entry.name: empirical_error(entry.strategy, entry.problem, entry.restriction, arithmetic=config.mode).to_dict()
        for entry in entries
    }
    if config.branches_csv:
        groups: dict[str, list[BranchOutcome]] = {}
        for entry in entries:
            prefix = f"{entry.name}:"
            groups.update(_branch_groups(entry.strategy, entry.problem, entry.restriction, config.mode, prefix))
        write_branches_csv(groups, config.branches_csv)
        print(f"[SUCCESS] Branches written: {config.branches_csv}")


def cmd_verify(config: ExperimentConfig) -> int:
    """Run a verification suite and write its JSON report.

    Returns:
        0 if every check passed, 1 otherwise
    """
    _banner(f"VERIFY: {config.suite}")
    budgets = (config.n[0], config.k if config.k is not None else 0) if config.n else None
    outcome = run_suite(
        config.suite,
        only=config.strategy,
        budgets=budgets,
        m=config.m if config.m is not None else 32,
        samples=config.samples if config.samples is not None else 10_000,
        seed=config.seeds[0],
        mode=config.mode,
    )
    checks_df = checks_to_frame(outcome.checks)
    summary_df = generate_summary_statistics(checks_df)
    report: dict[str, Any] = {
        "suite": config.suite,
        "passed": outcome.passed,
        "checks": [dict(check) for check in outcome.checks],
        "summary": _frame_records(summary_df),
        "tables": {name: _frame_records(table) for name, table in sorted(outcome.tables.items())},
    }
    _add_suite_error_reports(config, report)
    if config.out:
        _dump_json(report, config.out)
    if config.xlsx:
        generate_verification_workbook(config.xlsx, checks_df, summary_df, outcome.tables)
    print_summary(checks_df, config.out)
    return 0 if outcome.passed else 1


def _derandomize_setup(config: ExperimentConfig) -> tuple[Strategy, FiniteRestriction, Problem]:
    """Resolve strategy, restriction and problem for derandomization.

    Suite members run on their own restriction and problem unless a grid
    size or a problem is given.  Decision-tree files are replayed on the
    resolved problem before use.

    Raises:
        ValueError: If no strategy is configured
        BadParams: If ``--restriction`` disagrees with a suite member's own restriction
    """
    if not config.strategy:
        msg = "derandomize needs --strategy"
        raise ValueError(msg)
    restriction = restriction_from_spec(config.restriction)
    if config.strategy in SUITE_STRATEGIES and config.m is None and config.problem in {None, "grid"}:
        entry = SUITE_STRATEGIES[config.strategy]()
        if config.restriction is not None and restriction != entry.restriction:
            msg = (
                f"Suite strategy '{entry.name}' draws from its own restriction over "
                f"{list(entry.restriction.alphabet)}; --restriction {config.restriction!r} cannot replace it"
            )
            raise BadParams(msg)
        return entry.strategy, entry.restriction, entry.problem
    if config.problem == "lipschitz":
        if config.family is None:
            msg = "The lipschitz problem needs --family"
            raise ValueError(msg)
        problem = make_lipschitz_problem(config.family)
    else:
        problem = make_grid_problem(config.m if config.m is not None else 2)
    if config.strategy.endswith(".json"):
        return load_tree_strategy(config.strategy, restriction, problem), restriction, problem
    return resolve_strategy(config.strategy, config.strategy_params), restriction, problem


def cmd_derandomize(config: ExperimentConfig) -> int:
    """Derandomize a hard-capped strategy and write the tree plus a sidecar report.

    Returns:
        0 if the tree matches the expectation on every input and respects its cost bound
    """
    _banner("DERANDOMIZE")
    strategy, restriction, problem = _derandomize_setup(config)
    print(f"[MODE] {strategy.name} on {problem.name}, |K'|={restriction.size}")
    tree = derandomize(strategy, restriction, problem, mode=config.mode)
    bound = tree.cost_bound if tree.cost_bound is not None else 0

    rows: list[dict[str, Any]] = []
    for f in problem.test_inputs():
        result = tree.evaluate(problem, f)
        wanted = expected_output(strategy, problem, f, restriction, config.mode)
        rows.append(
            {
                "input": problem.label(f),
                "tree_output": str(result.output),
                "expected_output": str(wanted),
                "equal": outputs_equal(result.output, wanted),
                "card_info": result.card_info,
            }
        )
    worst = max((row["card_info"] for row in rows), default=0)
    passed = all(row["equal"] for row in rows) and worst <= bound

    out = Path(config.out or DEFAULT_TREE_FILE)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"name": tree.name, "cost_bound": bound, "source": strategy.name}
    if problem.answer_alphabet is not None:
        save_tree(tree.materialize(problem.answer_alphabet), out, metadata)
        print(f"[SUCCESS] Tree written: {out}")
    else:
        _dump_json({**trace_log(tree, problem), **metadata}, out)

    report = {
        "strategy": strategy.name,
        "problem": problem.name,
        "cost_bound": bound,
        "worst_card_info": worst,
        "within_cost_bound": worst <= bound,
        "per_input": rows,
        "passed": passed,
        "error_report": empirical_error(strategy, problem, restriction, arithmetic=config.mode).to_dict(),
    }
    if config.branches_csv:
        write_branches_csv(_branch_groups(strategy, problem, restriction, config.mode), config.branches_csv)
        print(f"[SUCCESS] Branches written: {config.branches_csv}")
    _dump_json(report, out.with_suffix(".report.json"))
    status = "[OK]" if passed else "[FAIL]"
    print(f"\n{status} worst cardInfo {worst} <= {bound}; {sum(row['equal'] for row in rows)}/{len(rows)} inputs equal")
    return 0 if passed else 1


def cmd_rates(config: ExperimentConfig) -> int:
    """Sweep bits per cell against error for the stratified integrator.

    Returns:
        Exit code 0

    Raises:
        BadParams: If the grid problem is requested
    """
    _banner("RATES")
    if config.problem == "grid":
        msg = "rates sweeps the stratified integrator on the lipschitz problem; --problem grid is not supported"
        raise BadParams(msg)
    n_values = config.n or list(DEFAULT_N_VALUES)
    bits: str | int = config.bits if config.bits == "log" else int(config.bits)
    family = None
    if config.family is not None:
        family = list(make_lipschitz_problem(config.family).test_inputs())
    frame = sweep_rates(n_values, bits, config.seeds, family)
    slope = fit_loglog_slope(frame)

    out = Path(config.out or DEFAULT_RATES_FILE)
    write_rates_csv(frame, out)
    _dump_json(
        {"bits": config.bits, "n_values": n_values, "seeds": len(config.seeds), "slope": slope},
        out.with_suffix(".slope.json"),
    )
    if config.xlsx:
        generate_rates_workbook(config.xlsx, frame, slope)
    print_rates_summary(frame, slope, str(out))
    return 0


def cmd_bounds(config: ExperimentConfig) -> int:
    """Evaluate a bound calculator and print its JSON result.

    Returns:
        Exit code 0

    Raises:
        ValueError: If no bound is named
    """
    if not config.bound:
        msg = "bounds needs --bound"
        raise ValueError(msg)
    values: dict[str, Any] = dict(config.bound_params)
    if config.n and "n" not in values:
        values["n"] = config.n[0]
    if config.k is not None and "k" not in values:
        values["k"] = config.k
    if config.m is not None and "m" not in values:
        values["m"] = config.m
    result = evaluate_bound(config.bound, values)
    if result["clamped"]:
        print(f"[WARN] Raw value {result['raw']} is negative; displayed value clamped to 0")
    _dump_json(result, config.out)
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "derandomize": cmd_derandomize,
    "rates": cmd_rates,
    "bounds": cmd_bounds,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the requested subcommand.

    Returns:
        Exit code (0 for success, 1 for failed checks or errors)
    """
    try:
        args = parse_args(argv)
        config = _build_config(args)
        exit_code = COMMANDS[config.subcommand](config)
    except FileNotFoundError as e:
        print(f"\nERROR: {e}")
        return 1
    except (ValueError, OverflowError) as e:
        print(f"\nERROR: {e}")
        return 1
    except (OSError, KeyError) as e:
        print(f"\nERROR: Unexpected error: {e}")
        return 1
    else:
        return exit_code


if __name__ == "__main__":
    sys.exit(main())
