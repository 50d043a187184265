"""Exact rewriting and truncated representations of Podles sphere cross product algebras."""

__version__ = "1.0.0"
