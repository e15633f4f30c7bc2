"""Unit tests for config module."""

import os
from pathlib import Path
from unittest.mock import patch

import pytest

from restricted_mc.config import create_config, load_config_from_file, parse_n_values, parse_seeds


class TestParseSeeds:
    """Tests for parse_seeds function."""

    def test_range(self) -> None:
        """Test half-open seed ranges."""
        assert parse_seeds("0:5") == [0, 1, 2, 3, 4]

    def test_list_and_int(self) -> None:
        """Test comma lists, integers and lists."""
        assert parse_seeds("1,2,7") == [1, 2, 7]
        assert parse_seeds(3) == [3]
        assert parse_seeds([4, 5]) == [4, 5]

    def test_invalid_range(self) -> None:
        """Test malformed ranges raise."""
        with pytest.raises(ValueError, match="Invalid seed range"):
            parse_seeds("a:b")

    def test_invalid_list(self) -> None:
        """Test malformed lists raise."""
        with pytest.raises(ValueError, match="Invalid seed list"):
            parse_seeds("1,x")

    def test_empty(self) -> None:
        """Test empty specifications raise."""
        with pytest.raises(ValueError, match="is empty"):
            parse_seeds("5:5")


class TestParseNValues:
    """Tests for parse_n_values function."""

    def test_geometric_range(self) -> None:
        """Test doubling ranges stop below the limit."""
        assert parse_n_values("8:257:2x") == [8, 16, 32, 64, 128, 256]

    def test_lists(self) -> None:
        """Test comma lists and single values."""
        assert parse_n_values("1,2,4") == [1, 2, 4]
        assert parse_n_values(16) == [16]

    def test_bad_factor(self) -> None:
        """Test factors below two raise."""
        with pytest.raises(ValueError, match="factor >= 2"):
            parse_n_values("8:64:1x")

    def test_invalid(self) -> None:
        """Test malformed lists raise."""
        with pytest.raises(ValueError, match="Invalid value list"):
            parse_n_values("eight")


class TestLoadConfigFromFile:
    """Tests for load_config_from_file function."""

    def test_load_valid_config(self, tmp_path: Path) -> None:
        """Test loading a valid configuration file."""
        config_file = tmp_path / "config.json"
        config_file.write_text('{"suite": "oracle", "m": 8, "seeds": "0:10"}')

        values = load_config_from_file(config_file)

        assert values == {"suite": "oracle", "m": 8, "seeds": "0:10"}

    def test_missing_file(self) -> None:
        """Test loading non-existent config file raises error."""
        with pytest.raises(FileNotFoundError, match="Configuration file not found"):
            load_config_from_file("nonexistent.json")

    def test_invalid_json(self, tmp_path: Path) -> None:
        """Test malformed JSON raises ValueError."""
        config_file = tmp_path / "config.json"
        config_file.write_text("{suite: oracle")
        with pytest.raises(ValueError, match="not valid JSON"):
            load_config_from_file(config_file)

    def test_not_an_object(self, tmp_path: Path) -> None:
        """Test a JSON list is rejected."""
        config_file = tmp_path / "config.json"
        config_file.write_text("[1, 2]")
        with pytest.raises(ValueError, match="must contain a JSON object"):
            load_config_from_file(config_file)


class TestCreateConfig:
    """Tests for create_config function."""

    def test_defaults(self) -> None:
        """Test defaults when nothing is given."""
        with patch.dict(os.environ, {}, clear=True):
            config = create_config({"subcommand": "verify"})

        assert config.suite == "all"
        assert config.mode == "rational"
        assert config.seeds == list(range(100))
        assert config.restriction is None
        assert config.problem is None

    def test_precedence(self, tmp_path: Path) -> None:
        """Test flags override environment, which overrides the file."""
        config_file = tmp_path / "config.json"
        config_file.write_text('{"_comment": "ignored", "seeds": "0:3", "samples": 50, "m": 8}')

        with patch.dict(os.environ, {"RMC_SEEDS": "7,8", "RMC_SAMPLES": "200"}, clear=True):
            config = create_config({"subcommand": "rates", "samples": 400, "m": None}, config_file)

        assert config.seeds == [7, 8]
        assert config.samples == 400
        assert config.m == 8
        assert config.subcommand == "rates"

    def test_env_mode(self) -> None:
        """Test RMC_MODE selects the arithmetic mode."""
        with patch.dict(os.environ, {"RMC_MODE": "float", "RMC_OUTPUT": "out.json"}, clear=True):
            config = create_config({"subcommand": "verify"})

        assert config.mode == "float"
        assert config.out == "out.json"

    def test_unknown_file_key(self, tmp_path: Path) -> None:
        """Test unknown keys in the file are rejected."""
        config_file = tmp_path / "config.json"
        config_file.write_text('{"suit": "all"}')
        with patch.dict(os.environ, {}, clear=True), pytest.raises(ValueError, match="Unknown configuration keys"):
            create_config({}, config_file)

    def test_invalid_mode(self) -> None:
        """Test unknown arithmetic modes are rejected."""
        with patch.dict(os.environ, {}, clear=True), pytest.raises(ValueError, match="Unknown arithmetic mode"):
            create_config({"mode": "double"})

    def test_negative_budget(self) -> None:
        """Test negative budgets are rejected."""
        with patch.dict(os.environ, {}, clear=True), pytest.raises(ValueError, match="nonnegative"):
            create_config({"subcommand": "bounds", "n": "-1"})

    def test_too_few_samples(self) -> None:
        """Test fewer than two samples are rejected."""
        with patch.dict(os.environ, {}, clear=True), pytest.raises(ValueError, match="At least 2 samples"):
            create_config({"samples": 1})

    def test_missing_strategy_file(self, tmp_path: Path) -> None:
        """Test a missing strategy JSON file raises FileNotFoundError."""
        missing = str(tmp_path / "tree.json")
        with patch.dict(os.environ, {}, clear=True), pytest.raises(FileNotFoundError, match="Strategy file not found"):
            create_config({"subcommand": "derandomize", "strategy": missing})
