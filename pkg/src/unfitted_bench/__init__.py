"""Stabilised unfitted finite elements on structured triangular meshes.

The package discretises Poisson and linear elasticity problems on a
domain described implicitly by a level set over a structured background
triangulation.  Small cut cells are handled either by ghost-penalty
style stabilisation, by weak penalisation against a discrete extension
from interior cells, or by strong constraint elimination (aggregation).
A benchmark CLI (``unfitted-bench``) runs single cases and parameter
sweeps and emits CSV/JSON records.
"""

from unfitted_bench.mesh import BackgroundMesh
from unfitted_bench.geometry import (
    LevelSet,
    box,
    circle,
    half_plane,
    classify_cells,
    place_sliver,
)
from unfitted_bench.aggregation import build_aggregates, ghost_facets
from unfitted_bench.fe_space import FESpace, classify_dofs, build_extension
from unfitted_bench.forms import MethodConfig, manufactured, nitsche_tau, METHODS
from unfitted_bench.system import Discretization, assemble_system, solve, cond1, error_norms

__all__ = [
    "BackgroundMesh",
    "LevelSet",
    "box",
    "circle",
    "half_plane",
    "classify_cells",
    "place_sliver",
    "build_aggregates",
    "ghost_facets",
    "FESpace",
    "classify_dofs",
    "build_extension",
    "MethodConfig",
    "manufactured",
    "nitsche_tau",
    "METHODS",
    "Discretization",
    "assemble_system",
    "solve",
    "cond1",
    "error_norms",
]
