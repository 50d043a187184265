"""Configuration file handling."""

from copy import deepcopy
from pathlib import Path
import sys
from typing import Any


if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

try:
    import tomli_w
except ImportError:
    tomli_w = None  # ty: ignore[invalid-assignment]

from podles_lib.constants import (
    DEFAULT_MAX_LEN,
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    DEFAULT_TRIALS,
)


DEFAULT_PATH = "podles.toml"

DEFAULTS: dict[str, dict[str, Any]] = {
    "params": {
        "q": "1/2",
        "c": "1",
        "sign": "+",
        "l0": "0",
        "h": 1.0,
        "y0": 1.0,
        "u_phase": 1.0,
        "cutoff": 8,
        "lmax_offset": 6,
    },
    "verify": {
        "tol": DEFAULT_TOLERANCE,
        "seed": DEFAULT_SEED,
        "trials": DEFAULT_TRIALS,
        "max_len": DEFAULT_MAX_LEN,
        "confluence_len": 4,
    },
}


class Config:
    """Defaults for the command line, optionally overridden by a TOML file."""

    def __init__(self, path: str | Path = DEFAULT_PATH) -> None:
        """Initialize configuration.

        Args:
            path: Path to the TOML file; a missing file means built-in defaults
        """
        self.path = Path(path)
        self.data = self._load()

    def _load(self) -> dict[str, dict[str, Any]]:
        """Load the file merged over the defaults."""
        data = deepcopy(DEFAULTS)
        if not self.path.exists():
            return data
        try:
            with open(self.path, "rb") as f:
                loaded = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ValueError(f"Invalid TOML in {self.path}: {e}") from e
        for section, values in loaded.items():
            if isinstance(values, dict):
                data.setdefault(section, {}).update(values)
            else:
                data[section] = values
        return data

    def validate(self) -> list[str]:
        """Return a list of problems (unknown sections or keys, wrong value types)."""
        errors = []
        for section, values in self.data.items():
            if section not in DEFAULTS:
                errors.append(f"Unknown section [{section}]")
                continue
            for key, value in values.items():
                if key not in DEFAULTS[section]:
                    errors.append(f"Unknown key {section}.{key}")
                    continue
                expected = type(DEFAULTS[section][key])
                if expected is float and isinstance(value, int) and not isinstance(value, bool):
                    continue
                if not isinstance(value, expected) or isinstance(value, bool):
                    errors.append(f"{section}.{key} must be {expected.__name__}, got {type(value).__name__}")
        return errors

    def get(self, section: str, key: str) -> Any:
        return self.data.get(section, {}).get(key, DEFAULTS[section][key])

    def dumps(self) -> str:
        """Render the effective configuration as TOML."""
        if not tomli_w:
            raise RuntimeError("tomli-w is required to write configuration")
        return tomli_w.dumps(self.data)

    def save(self) -> None:
        """Write the effective configuration to the config path."""
        if not tomli_w:
            raise RuntimeError("tomli-w is required to write configuration")
        with open(self.path, "wb") as f:
            tomli_w.dump(self.data, f)
