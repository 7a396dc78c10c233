"""Gradually varied fitting of sparse samples on grids and triangle meshes."""
from .gvf import (
    EnvelopePolicy,
    FeasibilityReport,
    InfeasibleError,
    check_feasible,
    enumerate_extensions_oracle,
    gvf_extend,
)
from .level_graph import (
    DomainGraph,
    GuidingSet,
    LevelScale,
    ScalarField,
    build_grid,
    is_gradually_varied,
    multi_source_distances,
)
from .manifold import (
    MeshField,
    face_display_values,
    harmonic_fit,
    manifold_cell_int_gvf,
    manifold_cell_real_gvf,
    manifold_int_gvf,
    manifold_real_gvf,
)
from .mesh import TriMesh, load_obj, load_off
from .real_fit import ScaleDerivation, derive_scale, fit_real_gvf
from .smoothing import SmoothConfig, multilevel_fit, partial_derivatives, smooth_constrained

__version__ = "0.1.0"
