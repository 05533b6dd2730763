"""Exact wall-crossing arithmetic on a truncated Poisson torus."""

__version__ = "0.1.0"

from .errors import InputError

__all__ = ["InputError", "__version__"]
