"""Weighted quasilinear inequalities: operators, characterization constants, oracle."""

__version__ = "0.1.0"
