"""Read-only plotting utilities for dgfv CSV outputs."""

__version__ = "0.1.0"
