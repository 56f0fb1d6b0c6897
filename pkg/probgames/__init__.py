"""Probabilistic open games: exact mixed-strategy equilibria, composition and law checking."""

__version__ = "0.1.0"
