"""Exact verification toolkit for the AH+1 connection calculus and AH+2 relations."""

from .expr import parse_scalar
from .qsqrt17 import QSqrt17
from .scalars import Scalar, beta, certified_sign, reduce_square_class, sqrt

__all__ = ["QSqrt17", "Scalar", "beta", "certified_sign", "parse_scalar", "reduce_square_class", "sqrt"]
