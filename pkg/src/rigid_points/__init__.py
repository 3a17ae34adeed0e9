"""Rigidity and tolerance experiments for Ginibre eigenvalues and Gaussian analytic function zeros."""

__version__ = "0.1.0"
