"""Pseudospectral toolkit for the forced evolution (i d_t - P) u = f on the 2-torus,
P = <D>^{-1} D_{x2} + V(x), with dynamical, resolvent, Lagrangian and
oscillatory-integral diagnostics."""

__version__ = "0.1.0"
