"""Model checking strategic logics with imperfect information."""

__version__ = "0.1.0"
