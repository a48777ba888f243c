"""Tent-map inverse limits, their disk embeddings and stability experiments."""

__version__ = "0.1.0"

from .tent_map import DomainError, IntervalSet, TentMap  # noqa: E402
from .acim import Density, ulam_density, wasserstein1  # noqa: E402

__all__ = ["__version__", "TentMap", "IntervalSet", "DomainError", "Density",
           "ulam_density", "wasserstein1"]
