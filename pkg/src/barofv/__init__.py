"""Entropy-stable semi-implicit finite volumes for barotropic Euler flow."""

from .analysis import (
    AtomicMeasure,
    Ensemble,
    ErrorRow,
    cesaro_average,
    error_report,
    first_variance,
    full_report,
    inject_to_fine,
    lp_norm,
    relative_entropy_field,
    wasserstein_1d,
)
from .cases import CaseSpec, cylindrical_explosion, delta_shock, get_case, kelvin_helmholtz
from .driver import rebuild_report, run_single, run_study
from .eos import Eos
from .mesh import CellField, CellVectorField, StructuredMesh, project_initial
from .ops import FaceSplits, disc_div, disc_grad, face_average, upwind_div, upwind_mass_flux
from .rusanov import RusanovParams, run_rusanov, rusanov_flux, rusanov_step
from .stab import (
    IdentityReport,
    NegativeDensity,
    NonConvergence,
    StabParams,
    State,
    StepDiagnostics,
    StepFailure,
    admissible_dt,
    cfl_bound,
    check_entropy_conditions,
    discrete_energy,
    mass_residual,
    momentum_update,
    newton_solve_mass,
    run_stabilized,
    split_face_velocity,
    step,
    velocity_shift,
    verify_energy_identities,
)

__version__ = "0.1.0"
