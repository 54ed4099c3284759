"""Local testing and correction of Reed-Muller and lifted codes over F_q."""
from .gf import FieldSpec, GF
from .poly import ReducedPoly, TruthTable
from .flats import AffineFlat, FlatSet

__all__ = ["FieldSpec", "GF", "ReducedPoly", "TruthTable", "AffineFlat", "FlatSet"]
__version__ = "0.1.0"
