"""Sharp instrumental-variable bounds with a K-valued instrument."""

__version__ = "0.1.0"
