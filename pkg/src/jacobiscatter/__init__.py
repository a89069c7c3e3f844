"""Spectral toolkit for periodic Jacobi operators with finitely supported
perturbations: band structure, Jost solutions, bound states, antibound
states, resonances, virtual states, the scattering matrix, and the small
perturbation / large energy asymptotics, each backed by independently
checkable identities."""

from .background import (
    BandStructure,
    FundamentalPair,
    PeriodicBackground,
    SheetPoint,
    band_structure,
    bloch_solution,
    floquet_multiplier,
    fundamental_solutions,
    quasimomentum,
    sqrt_branch,
    weyl_m,
)
from .errors import (
    AmbiguousSheetError,
    DirichletPoleError,
    InputError,
    NumericalError,
    StateCountError,
)
from .jost import (
    JostEvaluation,
    PerturbedOperator,
    Perturbation,
    XiData,
    build_xi_data,
    jost_evaluate,
    perturbed_tilde_solutions,
    xi_eval,
)
from .polynomials import Poly, ZeroPolynomialError, from_roots
from .scattering import (
    ScatteringPoint,
    band_sample,
    resolvent_kernel,
    scattering_at,
    truncated_resolvent_entry,
)
from .states import (
    State,
    StateReport,
    expected_state_total,
    locate_states,
    oracle_bound_states,
)
from .asympt import (
    LeadingCoefficients,
    SmallTComparison,
    SmallTPrediction,
    j1_at_edge,
    j1_polynomial,
    j1_shifted_form,
    leading_coefficients,
    predict_and_verify_small_t,
    shifted_sine_solution,
    site_weight_poly,
    small_t_prediction,
)
from .invariants import CheckResult, run_battery

__version__ = "0.1.0"

__all__ = [
    "AmbiguousSheetError",
    "BandStructure",
    "CheckResult",
    "DirichletPoleError",
    "FundamentalPair",
    "InputError",
    "JostEvaluation",
    "LeadingCoefficients",
    "NumericalError",
    "PeriodicBackground",
    "PerturbedOperator",
    "Perturbation",
    "Poly",
    "ScatteringPoint",
    "SheetPoint",
    "SmallTComparison",
    "SmallTPrediction",
    "State",
    "StateCountError",
    "StateReport",
    "XiData",
    "ZeroPolynomialError",
    "band_sample",
    "band_structure",
    "bloch_solution",
    "build_xi_data",
    "expected_state_total",
    "floquet_multiplier",
    "from_roots",
    "fundamental_solutions",
    "j1_at_edge",
    "j1_polynomial",
    "j1_shifted_form",
    "jost_evaluate",
    "leading_coefficients",
    "locate_states",
    "oracle_bound_states",
    "perturbed_tilde_solutions",
    "predict_and_verify_small_t",
    "quasimomentum",
    "resolvent_kernel",
    "run_battery",
    "scattering_at",
    "shifted_sine_solution",
    "site_weight_poly",
    "small_t_prediction",
    "sqrt_branch",
    "truncated_resolvent_entry",
    "weyl_m",
    "xi_eval",
]
