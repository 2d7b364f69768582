"""Exact graded algebra for Fock spaces, jet-space variational calculus and BRST checks."""
from .core import GQ, Check, Grade, GradedScalar

__version__ = "0.1.0"

__all__ = ["GQ", "Check", "Grade", "GradedScalar", "__version__"]
