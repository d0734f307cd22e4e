"""Exact finite-scale experiments on approximate lattices: quadratic
cut-and-project sets in R and p-adic sets in Q_p."""

__version__ = "0.1.0"

from .errors import CapacityError, SchemeError, UsageError
from .exactnum import PadicRat, QuadInt
from .scheme import (Ball, Interval, PadicPointSet, PadicScheme, QuadPointSet, QuadScheme, enumerate_points,
                     in_lambda, in_lambda_q, verify_axioms)

__all__ = [
    "Ball", "CapacityError", "Interval", "PadicPointSet", "PadicRat", "PadicScheme", "QuadInt",
    "QuadPointSet", "QuadScheme", "SchemeError", "UsageError", "enumerate_points", "in_lambda",
    "in_lambda_q", "verify_axioms",
]
