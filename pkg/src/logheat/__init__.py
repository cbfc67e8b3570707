"""Numerics for the heat equation with logarithmic nonlinearity u_t = u_xx + 2 lam u ln u."""

__version__ = "0.1.0"
