"""Subradiant states of 1D emitter arrays and their band-edge scaling laws."""

from .errors import ConfigError, NumericalError

__version__ = "0.1.0"

__all__ = ["ConfigError", "NumericalError", "__version__"]
