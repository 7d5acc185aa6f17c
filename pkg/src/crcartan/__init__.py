"""crcartan: exact Cartan equivalence pipeline for graphed real
hypersurfaces in C^3 with degenerate rank-1 Levi form.

Layers, bottom up:

  scalar_algebra     exact Gaussian-rational polynomials / rational functions
  cr_geometry        adapted frame, class membership, bracket table
  exterior_calculus  named coframes, wedge, exterior derivative
  invariants         base coframe chain and the fundamental invariants
  lifted_structure   group-lifted coframes, torsion, absorption
  prolongation       final coframe closure on the prolonged bundle
  cli                file input, pipeline driver, reports, numeric oracle
"""

__version__ = "0.1.0"

from .scalar_algebra import (
    GaussianRational,
    Polynomial,
    RationalFunction,
    VarRegistry,
    base_registry,
    conjugate,
    eval_point,
    parse_expr,
    partial,
    ratfn_equal,
)

__all__ = [
    "GaussianRational",
    "Polynomial",
    "RationalFunction",
    "VarRegistry",
    "base_registry",
    "conjugate",
    "eval_point",
    "parse_expr",
    "partial",
    "ratfn_equal",
    "__version__",
]
