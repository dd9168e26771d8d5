"""Planar anchored-field energy minimization and defect auditing.

Minimizes two-dimensional vector Ginzburg-Landau energies on star-shaped
domains under strong (constrained) or weak (penalized) tangential boundary
anchoring, detects and classifies the resulting interior and boundary
defects, audits the degree bookkeeping, and evaluates renormalized
interaction energies and expansion fits.
"""

from .energy import (
    Assembly,
    EnergyBreakdown,
    EnergyParams,
    el_residual,
    eval_energy,
    eval_gradient,
    local_energy,
    pohozaev_residual,
    radial_profile,
)
from .defects import (
    DefectBall,
    DefectRecord,
    DefectReport,
    EtaReport,
    analyze,
    bad_set,
    boundary_index,
    cluster_bad_balls,
    degree,
    eta_diagnostic,
    orientation,
    super_index,
)
from .errors import *  # noqa: F401,F403
from .geometry import (
    BoundaryData,
    StarDomain,
    TubularBand,
    fourier_data,
    tangential_data,
    unit_disc,
)
from .kernels import backend
from .mesh import (
    Mesh,
    TriLocator,
    annulus,
    load_field,
    load_mesh,
    save_field,
    save_mesh,
    triangulate,
)
from .minimizer import (
    ContinuationRung,
    MinimizeOptions,
    MinimizeResult,
    SeedSpec,
    continuation_minimize,
    init_field,
    minimize,
    project_strong,
)
from .renorm import FitResult, compare_configs, fit_expansion, w_boundary, w_interior

__version__ = "0.1.0"
