"""Tests for config module."""

import pytest

from podles_lib.config import DEFAULTS, Config


def test_missing_file_uses_defaults(tmp_path):
    """Test built-in defaults apply without a file."""
    config = Config(tmp_path / "podles.toml")

    assert config.get("params", "q") == "1/2"
    assert config.get("params", "cutoff") == 8
    assert config.get("verify", "tol") == 1e-9
    assert config.validate() == []


def test_file_overrides_defaults(tmp_path):
    """Test values from the file replace the defaults key by key."""
    path = tmp_path / "podles.toml"
    path.write_text('[params]\nq = "1/3"\ncutoff = 5\nh = 2\n')

    config = Config(path)

    assert config.get("params", "q") == "1/3"
    assert config.get("params", "cutoff") == 5
    assert config.get("params", "c") == "1"
    # an int is accepted where a float is expected
    assert config.validate() == []


def test_validate_reports_problems(tmp_path):
    """Test unknown sections, unknown keys and wrong types are all reported."""
    path = tmp_path / "podles.toml"
    path.write_text('[params]\nbogus = 1\ncutoff = "x"\nlmax_offset = true\n\n[extra]\na = 1\n')

    errors = Config(path).validate()

    assert "Unknown key params.bogus" in errors
    assert "params.cutoff must be int, got str" in errors
    assert "params.lmax_offset must be int, got bool" in errors
    assert "Unknown section [extra]" in errors


def test_invalid_toml(tmp_path):
    """Test malformed TOML raises ValueError."""
    path = tmp_path / "podles.toml"
    path.write_text("[params\n")

    with pytest.raises(ValueError, match="Invalid TOML"):
        Config(path)


def test_save_and_reload(tmp_path):
    """Test the defaults survive a save/load cycle."""
    path = tmp_path / "podles.toml"
    Config(path).save()

    assert path.exists()
    assert Config(path).data == DEFAULTS


def test_dumps_contains_sections(tmp_path):
    """Test the TOML rendering lists both sections."""
    text = Config(tmp_path / "podles.toml").dumps()

    assert "[params]" in text
    assert "[verify]" in text
    assert 'sign = "+"' in text
