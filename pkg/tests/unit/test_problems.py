"""Unit tests for problems module."""

import json
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

import pytest

from restricted_mc.engine import empirical_error, enumerate_branches, expected_output
from restricted_mc.errors import BadDistribution, BadParams, SizeTooLarge, UnknownFamily
from restricted_mc.models import InfoQuery, RandQuery
from restricted_mc.problems import (
    LipschitzFunction,
    SignVectors,
    bit_stratified_mc,
    bits_for_cells,
    check_lipschitz,
    default_rate_family,
    distance,
    hat,
    linear,
    load_family_spec,
    make_bit_restriction,
    make_family_member,
    make_finite_restriction,
    make_grid_family,
    make_grid_problem,
    make_lipschitz_problem,
    midpoint_rule,
    random_pwl,
    restriction_from_spec,
    sawtooth,
    stratified_point,
)


class TestGridProblem:
    """Tests for the grid problem."""

    def test_inputs_and_solution(self) -> None:
        """Test the problem lists all sign vectors and averages them."""
        problem = make_grid_problem(3)
        assert problem.is_finite
        assert len(problem.test_inputs()) == 8
        assert problem.solution((1, 1, -1)) == Fraction(1, 3)
        assert problem.evaluate((1, -1, 1), InfoQuery(2)) == -1

    def test_valid_queries(self) -> None:
        """Test only coordinates 1..m are valid."""
        problem = make_grid_problem(3)
        assert problem.is_valid_query(InfoQuery(3))
        assert not problem.is_valid_query(InfoQuery(0))
        assert not problem.is_valid_query(InfoQuery(4))
        assert not problem.is_valid_query(InfoQuery(True))

    def test_size_limits(self) -> None:
        """Test sizes outside 1..24 raise."""
        with pytest.raises(SizeTooLarge):
            make_grid_problem(25)
        with pytest.raises(SizeTooLarge):
            make_grid_problem(0)

    def test_sign_vectors_order(self) -> None:
        """Test indexing agrees with iteration order."""
        vectors = SignVectors(2)
        assert list(vectors) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
        assert [vectors[i] for i in range(4)] == list(vectors)
        assert vectors[-1] == (1, 1)
        assert vectors[1:3] == [(-1, 1), (1, -1)]

    def test_family(self) -> None:
        """Test large grids are families with a test set."""
        problem = make_grid_family(30, samples=2)
        assert not problem.is_finite
        assert len(problem.test_inputs()) == 5
        assert problem.test_inputs()[0] == tuple(1 for _ in range(30))
        with pytest.raises(BadParams):
            make_grid_family(0)


class TestLipschitzMembers:
    """Tests for the Lipschitz family generators."""

    def test_sawtooth(self) -> None:
        """Test the tooth vanishes at midpoints and has mean 1/(4n)."""
        member = sawtooth(2)
        assert member(Fraction(1, 4)) == 0
        assert member(Fraction(0)) == Fraction(1, 4)
        assert member(0.0) == pytest.approx(0.25)
        assert member.integral == Fraction(1, 8)

    def test_centered_sawtooth(self) -> None:
        """Test the centered tooth has mean zero."""
        member = sawtooth(2, centered=True)
        assert member.integral == 0
        assert member(Fraction(1, 4)) == Fraction(-1, 8)

    def test_hat_integrals(self) -> None:
        """Test the tent integral including clipping at the boundary."""
        assert hat().integral == Fraction(1, 4)
        assert hat(center=0).integral == Fraction(1, 8)

    def test_linear(self) -> None:
        """Test linear members and their slope limit."""
        member = linear(Fraction(1, 2), Fraction(1, 4))
        assert member(Fraction(1)) == Fraction(3, 4)
        assert member.integral == Fraction(1, 2)
        with pytest.raises(BadParams):
            linear(2)

    def test_distance(self) -> None:
        """Test dist(x, Q) and its integral."""
        member = distance([Fraction(1, 4), Fraction(3, 4)])
        assert member(Fraction(1, 2)) == Fraction(1, 4)
        assert member.integral == Fraction(1, 8)
        with pytest.raises(BadParams):
            distance([])

    def test_all_members_are_lipschitz(self) -> None:
        """Test the grid check accepts every generator."""
        for member in [sawtooth(5), hat(0.3, 0.2), linear(-1), random_pwl(7), distance([0.1, 0.9], -1)]:
            assert check_lipschitz(member)

    def test_default_rate_family(self) -> None:
        """Test the sweep family pairs the identity with the finest tooth."""
        members = default_rate_family(4, 1)
        assert [m.label for m in members] == [linear(1).label, sawtooth(8).label]


class TestFamilySpecs:
    """Tests for family specs."""

    def test_make_member(self) -> None:
        """Test members are built from specs."""
        member = make_family_member({"family": "sawtooth", "n": 3})
        assert member.integral == Fraction(1, 12)

    def test_unknown_family(self) -> None:
        """Test unknown generators raise with suggestions."""
        with pytest.raises(UnknownFamily, match="sawtooth"):
            make_family_member({"family": "sawtoth"})

    def test_bad_parameters(self) -> None:
        """Test unexpected parameters raise BadParams."""
        with pytest.raises(BadParams, match="Invalid parameters"):
            make_family_member({"family": "hat", "width": 1})

    def test_load_from_file(self, tmp_path: Path) -> None:
        """Test a members file loads every spec."""
        spec_file = tmp_path / "family.json"
        spec_file.write_text(
            json.dumps({"members": [{"family": "linear", "slope": 1}, {"family": "hat"}]}),
            encoding="utf-8",
        )
        members = load_family_spec(spec_file)
        assert [m.family for m in members] == ["linear", "hat"]

    def test_steep_member_is_rejected(self) -> None:
        """Test a member failing the 1-Lipschitz grid check raises BadParams."""

        def steep() -> LipschitzFunction:
            return LipschitzFunction("steep", {}, lambda x: 2 * x, Fraction(1))

        with (
            patch.dict("restricted_mc.problems.FAMILY_GENERATORS", {"steep": steep}),
            pytest.raises(BadParams, match="not 1-Lipschitz"),
        ):
            load_family_spec([{"family": "linear"}, {"family": "steep"}])

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test a missing spec file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="Family spec file not found"):
            load_family_spec(tmp_path / "missing.json")

    def test_lipschitz_problem(self) -> None:
        """Test the integration problem over a spec list."""
        problem = make_lipschitz_problem([{"family": "linear"}, {"family": "sawtooth", "n": 2}])
        assert not problem.is_finite
        assert len(problem.test_inputs()) == 2
        assert problem.solution(problem.test_inputs()[1]) == Fraction(1, 8)
        assert problem.is_valid_query(InfoQuery(Fraction(1, 3)))
        assert not problem.is_valid_query(InfoQuery(Fraction(3, 2)))


class TestRestrictions:
    """Tests for restriction builders."""

    def test_bit_restriction(self) -> None:
        """Test fair bits."""
        restriction = restriction_from_spec("bit")
        assert restriction == make_bit_restriction()
        assert restriction.support(RandQuery(1)) == [(0, Fraction(1, 2)), (1, Fraction(1, 2))]

    def test_finite_restriction_from_spec(self) -> None:
        """Test float probabilities are read exactly."""
        restriction = restriction_from_spec({"alphabet": [0, 1], "probabilities": [0.9, 0.1]})
        assert restriction.probabilities == (Fraction(9, 10), Fraction(1, 10))

    def test_uniform_default(self) -> None:
        """Test a missing distribution is uniform."""
        restriction = make_finite_restriction(["a", "b", "c"])
        assert restriction.probabilities == (Fraction(1, 3),) * 3

    def test_invalid_distribution(self) -> None:
        """Test probabilities not summing to one raise."""
        with pytest.raises(BadDistribution):
            make_finite_restriction([0, 1], [0.5, 0.6])

    def test_empty_alphabet(self) -> None:
        """Test an empty alphabet raises BadDistribution."""
        with pytest.raises(BadDistribution, match="must not be empty"):
            make_finite_restriction([])

    def test_unknown_spec(self) -> None:
        """Test unknown restriction forms raise."""
        with pytest.raises(BadParams, match="Unknown restriction"):
            restriction_from_spec("trit")


class TestReferenceAlgorithms:
    """Tests for midpoint_rule and bit_stratified_mc."""

    def test_midpoint_error_on_tooth(self) -> None:
        """Test the midpoint rule misses the tooth with the same cell count by 1/(4n)."""
        for n in (1, 2, 4):
            problem = make_lipschitz_problem([sawtooth(n)])
            report = empirical_error(midpoint_rule(n), problem, make_bit_restriction())
            assert report.supremum == Fraction(1, 4 * n)

    def test_bit_stratified(self) -> None:
        """Test the stratified integrator's caps and exact errors."""
        strategy = bit_stratified_mc(2, 1)
        assert strategy.caps == (2, 2)
        problem = make_lipschitz_problem(default_rate_family(2, 1))
        report = empirical_error(strategy, problem, make_bit_restriction())
        assert report.per_input == (Fraction(1, 16), Fraction(1, 16))

    def test_bit_stratified_is_unbiased_on_linear(self) -> None:
        """Test the exact expectation equals the integral of the identity."""
        problem = make_lipschitz_problem([linear(1)])
        f = problem.test_inputs()[0]
        assert expected_output(bit_stratified_mc(1, 1), problem, f, make_bit_restriction()) == Fraction(1, 2)

    def test_bit_stratified_is_unbiased_on_cellwise_linear(self) -> None:
        """Test the exact expectation equals the integral when f is linear on each cell."""
        tent = hat(Fraction(1, 2), Fraction(1, 2))
        problem = make_lipschitz_problem([tent])
        for bits in (1, 2):
            result = expected_output(bit_stratified_mc(2, bits), problem, tent, make_bit_restriction())
            assert result == tent.integral == Fraction(1, 4)

    def test_bit_stratified_is_unbiased_on_random_pieces(self) -> None:
        """Test unbiasedness on a seeded piecewise-linear member aligned to four cells."""
        member = random_pwl(5, pieces=4)
        problem = make_lipschitz_problem([member])
        result = expected_output(bit_stratified_mc(4, 1), problem, member, make_bit_restriction())
        assert result == pytest.approx(member.integral, abs=1e-12)

    def test_bit_stratified_branch_costs(self) -> None:
        """Test every branch spends exactly n information calls and n·b bits."""
        problem = make_lipschitz_problem([linear(1)])
        f = problem.test_inputs()[0]
        branches = enumerate_branches(bit_stratified_mc(2, 2), problem, f, make_bit_restriction())
        assert len(branches) == 16
        assert {(b.result.card_info, b.result.card_rand) for b in branches} == {(2, 4)}
        assert all(b.probability == Fraction(1, 16) for b in branches)
        assert sum(b.probability for b in branches) == 1

    def test_bad_sizes(self) -> None:
        """Test invalid sizes raise."""
        with pytest.raises(BadParams):
            midpoint_rule(0)
        with pytest.raises(BadParams):
            bit_stratified_mc(2, 0)

    def test_stratified_point(self) -> None:
        """Test the dyadic point inside a cell."""
        assert stratified_point(1, 1, 2, 1) == Fraction(7, 8)
        assert stratified_point(0, 0, 1, 2) == Fraction(1, 8)

    def test_bits_for_cells(self) -> None:
        """Test ⌈log₂ n⌉ with a minimum of one."""
        assert bits_for_cells(1) == 1
        assert bits_for_cells(2) == 1
        assert bits_for_cells(5) == 3
        assert bits_for_cells(8) == 3
