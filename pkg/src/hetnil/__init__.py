"""Exact symbolic geometry of heterotic solutions on 6-dimensional nilmanifolds."""

__version__ = "0.1.0"
