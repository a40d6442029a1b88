"""Complete hyperbolic metrics on cusped 3-manifolds by curvature flow.

The package splits into four layers: :mod:`cuspflow.triangulation`
(gluing combinatorics and the decoration gauge), :mod:`cuspflow.tetra`
(single-tetrahedron geometry), :mod:`cuspflow.assembly`
(manifold curvature, Laplacian, and energy), and :mod:`cuspflow.flow`
(time integration).  :mod:`cuspflow.cli` ties them into the
``cuspflow`` command.
"""

from pathlib import Path

from .assembly import (
    CurvatureState,
    GradientCheckReport,
    curvature,
    degenerate_tet_indices,
    energy,
    energy_gradient_check,
    laplacian,
    ricci_curvature,
)
from .flow import (
    FlowConfig,
    FlowResult,
    FlowTrace,
    calabi_step,
    detect_equilibrium,
    ricci_step,
    run_flow,
)
from .tetra import (
    BOUNDARY,
    DEGENERATE,
    NONDEGENERATE,
    DegenerateTetrahedronError,
    OppositePairSums,
    RegionClass,
    classify,
    extended_angles,
    lobachevsky,
    pair_sums,
    tet_covolume,
    tet_jacobian,
    tet_volume,
)
from .triangulation import (
    CuspedTriangulation,
    Tet,
    TriangulationError,
    build_cusp_matrix,
    build_incidence,
    edge_degrees,
    edge_end_cusps,
    gauge_project,
    kernel_basis,
    load_triangulation,
    parse_triangulation,
    validate,
)

__version__ = "0.1.0"


def bundled_path(name: str = "figure8.tri") -> Path:
    """Path of a data file shipped with the package."""
    return Path(__file__).parent / "data" / name
