"""Exact computations with coset-correct means and degrees of commutativity."""

__version__ = "0.1.0"
