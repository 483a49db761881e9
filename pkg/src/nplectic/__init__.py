"""Exact symbolic engine for n-plectic geometry and homotopy Lie algebra checks."""

from .arith import Polynomial, Rational, RationalFunction

__all__ = ["Polynomial", "Rational", "RationalFunction"]
