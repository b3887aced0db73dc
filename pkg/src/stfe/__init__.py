"""Numerical laboratory for the stochastic thin-film equation with Stratonovich noise on the torus."""

__version__ = "0.1.0"
