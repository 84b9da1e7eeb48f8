"""commlab: measures, bounds and protocol simulations on small communication matrices."""

__version__ = "0.1.0"
