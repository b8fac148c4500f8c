"""
Exact-arithmetic engine for periods of polarized tropical manifolds.

This package provides:
- lattice_core / polyhedral_complex / affine_structure: integral linear
  algebra, cell complexes with incidence signs, affine charts and monodromy
- sheaf_homology: homology of i_*Λ and the Čech comparison
- tropical_cycles: tropical 1-cycles, balancing and homology classes
- period_engine: closed-form periods and the piecewise integral assembly
- analytic_oracle: numeric quadrature checks of the integral identities
- manifest / config: JSON manifests and run configuration
"""

from .affine_structure import AffineData, ConstructibleSheaf, build_pushforward
from .config import QuadratureConfig, RunConfig, load_config
from .errors import TropicalError
from .manifest import Manifest, load_manifest, parse
from .period_engine import GluingData, PeriodProduct, SlabFunction, assemble_integral, compute_period
from .polyhedral_complex import PolyComplex, barycentric_subdivide
from .sheaf_homology import HomologyResult, homology, poincare_lefschetz_check
from .tropical_cycles import TropicalOneCycle, from_skeleton_weights

__all__ = [
    "AffineData",
    "ConstructibleSheaf",
    "GluingData",
    "HomologyResult",
    "Manifest",
    "PeriodProduct",
    "PolyComplex",
    "QuadratureConfig",
    "RunConfig",
    "SlabFunction",
    "TropicalError",
    "TropicalOneCycle",
    "assemble_integral",
    "barycentric_subdivide",
    "build_pushforward",
    "compute_period",
    "from_skeleton_weights",
    "homology",
    "load_config",
    "load_manifest",
    "parse",
    "poincare_lefschetz_check",
]
