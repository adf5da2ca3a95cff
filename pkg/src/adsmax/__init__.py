"""Equivariant maximal surfaces in anti-de Sitter 3-space.

Builds maximal surfaces over one puncture end of a surface from the
residue and tail of a regular quadratic differential: solves the vortex
equation for the conformal factor, transports the moving frame to embed
the surface and compute peripheral holonomy, and classifies holonomy
type, boundary saw-teeth and induced hyperbolic metrics against the
closed-form predictions of the residue.
"""

from .adscore import (
    GRAM,
    AchronalReport,
    NullDirection,
    SpacetimePoint,
    TorusPoint,
    hermitian_inner,
    is_achronal_chain,
    minkowski_inner,
    null_to_torus,
    so22_defect,
    torus_point,
    torus_to_null,
)
from .classify import (
    DecorationReport,
    HolonomyKind,
    HolonomyReport,
    Sawtooth,
    VertexRank,
    char_poly_eigen,
    decoration_of,
    holonomy_type,
    length_lambda_consistency,
    peripheral_matrix,
    sawtooth_of,
)
from .frame import (
    ConformalField,
    FrameState,
    connection_matrices,
    eigenvalue_log_moduli,
    embedding_point,
    flatness_defect,
    holonomy_loop,
    integrate_ray,
    quadric_residual,
    unitarity_defect,
)
from .gauss import (
    MetricField,
    SurfaceData,
    boundary_length,
    discrete_curvature,
    gauss_equation_defect,
    induced_metric,
    normal_flow_shape,
    principal_curvature,
    shape_operator,
)
from .horo import compute_diagonalizer, frame0, ray_limit, sigma0
from .qdiff import (
    ChartMode,
    EndChart,
    background_at,
    load_chart,
    make_chart,
    q_at,
    q_norm_sq,
    residue_from_z_chart,
)
from .vortex import (
    BarrierPair,
    BoundarySpec,
    CylinderGrid,
    GridSolution,
    check_barrier,
    make_barriers,
    pde_residual,
    solve_vortex,
)

__version__ = "0.1.0"
