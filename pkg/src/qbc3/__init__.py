"""Simulation and analysis of a decoy-state quantum bit commitment protocol."""

__version__ = "0.1.0"
