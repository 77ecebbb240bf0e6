"""Reversible modular-exponentiation networks, their gate and pulse costs,
and small simulations of order finding."""

__version__ = "0.1.0"
