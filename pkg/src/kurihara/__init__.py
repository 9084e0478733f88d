"""Exact computation of Kurihara numbers from modular symbols.

Computes the mod-p quantities delta_d attached to a rational elliptic curve,
searches for delta-minimal integers, and reports the dimension of the
p-Selmer group, the parity check against the root number, and the numerical
main-conjecture witness.
"""

__version__ = "0.1.0"

from .curve import CurveData, curve_from_json, load_curve
from .modsym import build_space, eval_plus, extract_eigensymbol
from .search import find_delta_minimal, parity_check, selmer_report

__all__ = [
    "CurveData",
    "curve_from_json",
    "load_curve",
    "build_space",
    "extract_eigensymbol",
    "eval_plus",
    "find_delta_minimal",
    "selmer_report",
    "parity_check",
    "__version__",
]
