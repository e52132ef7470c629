"""Simulation and inference tools for network statistics with proximity-based dependence."""

from . import blocking, harness, inference, mixingale, models, netstats, proximity, simulate

__version__ = "0.1.0"

__all__ = ["blocking", "harness", "inference", "mixingale", "models", "netstats", "proximity", "simulate"]
