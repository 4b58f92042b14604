"""Numerical and exact verification tools for rank-2 bbGKZ systems."""

from .lattice_fan import Fan, LatticePoint, TwistedSector, all_fans, box_elements
from .poly_roots import DegenerateParameterError, find_roots

__all__ = ["Fan", "LatticePoint", "TwistedSector", "all_fans", "box_elements",
           "DegenerateParameterError", "find_roots"]
