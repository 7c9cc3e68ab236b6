"""Thermodynamic formalism for group-extended Markov shifts."""

__version__ = "0.1.0"
