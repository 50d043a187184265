"""ANSI styling for the check summaries printed by the CLI."""

import os
import sys


_CODES = {"bold": "1", "dim": "2", "red": "31", "green": "32", "yellow": "33"}
_enabled = True


def init(*, no_color: bool = False) -> None:
    """Enable styling unless --no-color, NO_COLOR or a non-TTY stdout turns it off."""
    global _enabled
    _enabled = not no_color and "NO_COLOR" not in os.environ and sys.stdout.isatty()


def _style(name: str, text: str) -> str:
    return f"\033[{_CODES[name]}m{text}\033[0m" if _enabled else text


def bold(text: str) -> str:
    return _style("bold", text)


def dim(text: str) -> str:
    return _style("dim", text)


def green(text: str) -> str:
    return _style("green", text)


def yellow(text: str) -> str:
    return _style("yellow", text)


def red(text: str) -> str:
    return _style("red", text)


def verdict(passed: bool) -> str:
    """PASS in green or FAIL in red."""
    return green("PASS") if passed else red("FAIL")
