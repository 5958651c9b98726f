"""Two-way quantum number distribution simulator."""

__version__ = "0.1.0"
