"""Relative equilibria of symmetric Hamiltonian systems and commuting pairs."""

__version__ = "0.1.0"
