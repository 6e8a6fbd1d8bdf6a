"""Proper colorings of R^n under a symmetric convex norm, built from shrunk
multilattice tilings and greedy covers of the torus."""

from .bounds import butler_bound, finite_run_bound, theorem1_bound
from .color import Coloring, build_coloring, color_of, partition_seven_baseline, verify_coloring
from .config import RunConfig
from .geom import ConvexBody, Polytope
from .lattice import Lattice, Multilattice, Torus
from .tiling import tiling_parameters, voronoi_tiling

__version__ = "0.1.0"

__all__ = [
    "Coloring",
    "ConvexBody",
    "Lattice",
    "Multilattice",
    "Polytope",
    "RunConfig",
    "Torus",
    "build_coloring",
    "butler_bound",
    "color_of",
    "finite_run_bound",
    "partition_seven_baseline",
    "theorem1_bound",
    "tiling_parameters",
    "verify_coloring",
    "voronoi_tiling",
]
