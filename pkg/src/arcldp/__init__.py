"""Constrained equilibrium measures, large deviations and the arc-restricted
sine-kernel spectrum of the unitary eigenvalue process."""

__version__ = "0.1.0"
