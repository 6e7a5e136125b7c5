"""Fractional powers of sectorial matrices via the Dirichlet-to-Neumann map of the extension problem."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    FracDtnError,
    ParseError,
    QuadratureError,
    SectorialityError,
    SingularOperatorError,
    SpectralError,
)
from .operator import MeasureSpaceModel, SectorialOperator, SpaceTag, certify_sectorial, duality_pairing, weighted_norm
from .quadrature import QuadratureRule, default_rule
from .semigroup import frac_power_balakrishnan, frac_power_spectral, negative_power, resolvent_apply, semigroup_apply
from .extension import (
    ExtensionParams,
    bessel_normalized,
    c_s,
    half_case_identity,
    poisson_apply,
    poisson_decay_bound,
    s_normal_derivative,
    scalar_bessel,
)
from .sobolev import GradedMesh, GridFunction, bs_form, ws_norm
from .dtn import ExtensionSystem, dtn_matrix, solve_dirichlet, solve_neumann, verify_dtn_isomorphism
from .sectorial import frac_power_vertex0, regularize, strong_resolvent_gap
from .io import ingest_operator
from .study import emit_profile, run_convergence_study

__version__ = "0.1.0"
