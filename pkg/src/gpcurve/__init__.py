"""Numerical construction of ring-concentrated states for the planar cubic Schrödinger problem
with a trap potential: soliton profile, tube geometry, ansatz, reduction and diagnostics."""

__version__ = "0.1.0"
