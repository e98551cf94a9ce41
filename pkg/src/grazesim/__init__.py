"""Grazing-impact dynamics: square-root maps, noisy variants, and the
compliant impact oscillator they approximate.

The package has three layers.  ``maps`` and ``noise`` implement the
piecewise map family and its noise inputs, ``oscillator`` and
``integrator`` implement the underlying forced oscillator with event
located switching, and ``analysis`` computes long-orbit statistics that
tie the two together.  The ``grazesim`` console script fronts all of it.
"""

from .errors import (
    ChatteringError,
    ConfigError,
    DegenerateClusteringError,
    DegenerateParametersError,
    GrazesimError,
    InvalidNoiseDrawError,
    InvalidSampleError,
    NumericOverflowError,
    SamplerSetupError,
    StarvationError,
)
from .maps import (
    FixedPoint,
    MapState,
    NordmarkParams,
    StochasticMapCoeffs,
    det_step,
    fixed_point,
    n1_step,
    n2_step,
    n3_step,
    rho_for_state,
)
from .noise import (
    CycleNoise,
    FirstReturnSample,
    OUParams,
    certified_box,
    first_return_cov_gauss,
    first_return_mass,
    first_return_moments,
    first_return_pdf,
    ou_cycle_sample,
    ou_exact_step,
    ou_sequence,
    sample_first_return,
)
from .oscillator import (
    GlobalLinearization,
    LocalCoeffs,
    NormalFormTransform,
    OscillatorParams,
    check_regular_grazing,
    expm2,
    global_linearization,
    grazing_forcing,
    grazing_phase,
    local_coeffs,
    normal_form_params,
    regular_grazing_sign_check,
    sqrt_coefficient,
    steady_state,
    steady_state_velocity,
    stochastic_map_coeffs,
    to_normal_form,
)
from .integrator import (
    NOISE_MODES,
    FlowState,
    IntegratorConfig,
    Trajectory,
    integrate,
    ode_return_points,
    poincare_returns,
)
from .analysis import (
    EPS_TILDE,
    MAP_MODELS,
    CloudComparison,
    ClusterStats,
    DensityGrid,
    MapOrbit,
    ReturnStats,
    ScanResult,
    bifurcation_scan,
    compare_clouds,
    concentration_fraction,
    detect_cycle,
    epsilon_for_alpha,
    invariant_density,
    largest_lyapunov,
    orbit_points,
    return_fractions,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "GrazesimError",
    "ConfigError",
    "DegenerateParametersError",
    "DegenerateClusteringError",
    "NumericOverflowError",
    "InvalidNoiseDrawError",
    "InvalidSampleError",
    "SamplerSetupError",
    "ChatteringError",
    "StarvationError",
    # maps
    "MapState",
    "FixedPoint",
    "NordmarkParams",
    "StochasticMapCoeffs",
    "det_step",
    "fixed_point",
    "n1_step",
    "n2_step",
    "n3_step",
    "rho_for_state",
    # noise
    "OUParams",
    "CycleNoise",
    "FirstReturnSample",
    "ou_exact_step",
    "ou_cycle_sample",
    "ou_sequence",
    "first_return_pdf",
    "first_return_mass",
    "first_return_moments",
    "first_return_cov_gauss",
    "certified_box",
    "sample_first_return",
    # oscillator
    "OscillatorParams",
    "LocalCoeffs",
    "GlobalLinearization",
    "NormalFormTransform",
    "grazing_forcing",
    "grazing_phase",
    "steady_state",
    "steady_state_velocity",
    "local_coeffs",
    "sqrt_coefficient",
    "expm2",
    "global_linearization",
    "normal_form_params",
    "stochastic_map_coeffs",
    "to_normal_form",
    "check_regular_grazing",
    "regular_grazing_sign_check",
    # integrator
    "NOISE_MODES",
    "FlowState",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "poincare_returns",
    "ode_return_points",
    # analysis
    "MAP_MODELS",
    "EPS_TILDE",
    "epsilon_for_alpha",
    "MapOrbit",
    "orbit_points",
    "DensityGrid",
    "invariant_density",
    "ReturnStats",
    "return_fractions",
    "ScanResult",
    "bifurcation_scan",
    "detect_cycle",
    "largest_lyapunov",
    "ClusterStats",
    "CloudComparison",
    "compare_clouds",
    "concentration_fraction",
]
