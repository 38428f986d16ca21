"""Exact free differential graded algebras over rings of differential operators."""

__version__ = "0.1.0"
