"""Orbital stability analysis and stochastic trajectory simulation for the
dipole-extended Kepler atom driven by a fluctuating zero-point field.

The package splits into analytic machinery (orbits, greens, quadrature,
rates, phase_space), the stochastic field sampler (field), the trajectory
engine (simulate), and a reproducible command-line surface (cli).
"""

__version__ = "0.1.0"

from .orbits import (
    OrbitParams,
    AnomalyState,
    solve_eccentric_anomaly,
    true_anomaly,
    orbit_state,
    cartesian_state,
)
from .greens import (
    HomogeneousBasis,
    GreensEval,
    homogeneous_solutions,
    greens_matrix,
    trace_g,
    gdot_subtracted,
    regulator_subtraction,
)
from .quadrature import (
    QuadratureSpec,
    gauss_legendre_panels,
    integrate_1d,
    integrate_double_tail,
)
from .rates import (
    RateBreakdown,
    EccentricLimitParams,
    field_gain_f,
    f0_closed_form,
    f0_scaling_integral,
    radiative_loss,
    circular_total_product_form,
    total_rate,
    per_period_delta_d0,
    G_of_mu,
    H_of_mu,
    per_period_delta_dipole,
    critical_dipole_strength,
)
from .field import (
    FieldRealization,
    exact_autocorrelation,
    spectral_density,
    build_realization,
    evaluate,
    evaluate_grid,
    autocorrelation_estimate,
)
from .simulate import (
    SimConfig,
    TrajectoryRecord,
    PositroniumMapping,
    CloseApproachError,
    force,
    orbital_energy,
    integrate,
    detect_self_ionisation,
    map_positronium,
    frozen_orbit_gain,
    measured_total_rate,
    run_ensemble,
    aggregate_histogram,
)
from .phase_space import (
    GroundStateParams,
    PhaseSpacePoint,
    psi0,
    density_Ppr,
    momentum_marginal,
    dist_E_kappa,
    dist_E_Leff,
    conjecture_L_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
