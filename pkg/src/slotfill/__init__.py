"""Cold-start slot filling toolkit."""

__version__ = "0.1.0"
