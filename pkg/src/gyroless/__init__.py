"""Rigid-body rotation simulator and gyro-free angular velocity observer.

The observer reconstructs the body rate directly from two measured reference
directions; the gain toolkit evaluates and numerically verifies the
closed-form convergence certificate that justifies the design.
"""

from .gains import (
    FrozenSpectrum,
    GainCertificate,
    SimilarityCertificate,
    basin_test,
    build_A,
    build_P,
    certificate_record,
    certificate_report,
    compute_A_m,
    compute_K,
    compute_certificate,
    compute_k_star,
    frozen_spectrum,
    gamma_threshold,
    lipschitz_check,
    verify_exp_bound,
    verify_ptp_eigenvalues,
)
from .harness import (
    ConfigError,
    RunResult,
    ScenarioConfig,
    SweepRow,
    cubesat_inertia,
    decay_rate,
    load_config,
    parse_config,
    resolve_gains,
    run_scenario,
    sweep,
    write_csv,
)
from .observer import (
    ErrorState,
    ObserverGains,
    ObserverState,
    error_state,
    error_trace,
    init_observer,
    observer_rhs,
    observer_step,
    simulate_coupled,
)
from .presets import preset, preset_names
from .rigidbody import (
    InertiaDiag,
    TorqueProfile,
    TruthState,
    constant_torque,
    euler_rhs,
    integrate_truth,
    invariants_report,
    omega_max_bound,
    sinusoidal_torque,
    truth_step,
    zero_torque,
)
from .sensors import (
    MeasurementPair,
    ReferencePair,
    SensorConfig,
    canonicalize,
    identity_sensors,
    measure,
    measurement_derivative_check,
    reference_pair_from_p,
)

__version__ = "0.1.0"
