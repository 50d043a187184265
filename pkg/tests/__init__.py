"""Tests for podles-cross."""
