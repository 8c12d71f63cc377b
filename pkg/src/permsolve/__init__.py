"""Exact permissiveness computation for acyclic timed automata and games."""

from .numerics import AffineExpr, ExtendedRational, NEG_INF, POS_INF
from .model import TimedAutomatonSpec, parse_model
from .engine import compute_permissiveness

__all__ = [
    "AffineExpr",
    "ExtendedRational",
    "NEG_INF",
    "POS_INF",
    "TimedAutomatonSpec",
    "parse_model",
    "compute_permissiveness",
]
