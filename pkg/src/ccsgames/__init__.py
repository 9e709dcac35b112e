"""Executable game semantics for CCS: positions, plays, innocent strategies,
derived transition systems, bisimulation and fair-testing checks."""

__version__ = "0.1.0"
