"""Rule-based query answering over CSV-backed relational data."""

__version__ = "0.1.0"
