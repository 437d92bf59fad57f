"""Conformal (circumcircle intersection angle) energy of simplicial surfaces:
evaluation, gradient flow, triangulation optimization, refinement, and the
derived thin-shell bending energy."""

from .bending import (
    BendPair,
    BendReport,
    Hinge,
    bending_energy,
    beta_theta_profile,
    circumcenter,
    dihedral_theta,
    flatten_hinge,
    fold_hinge,
    hinge_ratio,
    profile_quadratic_coefficient,
)
from .energy import (
    CircleAngleOracleResult,
    EdgeQuad,
    EnergyReport,
    beta_edge,
    beta_oracle,
    edge_betas,
    edge_quad,
    total_energy,
    vertex_energy,
)
from .fileio import dumps_mesh, load_mesh, save_mesh
from .flow import (
    FlipTrace,
    FlowConfig,
    FlowTrace,
    alternate_flow,
    grad_analytic,
    grad_fd,
    optimize_triangulation,
    run_flow,
    scramble_triangulation,
)
from .generators import (
    bipyramid,
    generate,
    icosahedron,
    octahedron,
    perturb,
    random_inscribed,
    steinitz11,
    steinitz_from,
    subdivided_sphere,
    tetrahedron,
    torus,
)
from .hull import contains_points, convex_hull, convexity_defect, is_convex
from .mesh import (
    BoundaryEdgeError,
    DegenerateFaceError,
    FlipBlockedError,
    MeshError,
    NonManifoldError,
    ParseError,
    TriMesh,
    flip_edge,
    refine,
)
from .moebius import (
    MoebiusMap,
    Similarity,
    SphereInversion,
    apply_moebius,
    random_moebius,
)

__version__ = "0.1.0"
