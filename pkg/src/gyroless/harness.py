"""Scenario configuration, simulation driver, sweep orchestration and
serialization.

A scenario is a strict JSON document (unknown keys are rejected so sweep
automation cannot silently typo a field). The driver sub-steps the truth,
samples measurements at the sensor period, holds them across each observer
RK4 step estimate-side, and attaches the gain certificate plus a fitted decay
rate to the result.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import gains as gainlib
from .observer import (
    ErrorState,
    ObserverGains,
    ObserverState,
    error_trace,
    init_observer,
    observer_step,
)
from .rigidbody import (
    InertiaDiag,
    TorqueProfile,
    TruthState,
    constant_torque,
    integrate_truth,
    omega_max_bound,
    sinusoidal_torque,
    zero_torque,
)
from .sensors import (
    MeasurementPair,
    ReferencePair,
    SensorConfig,
    canonicalize,
    measure,
    reference_pair_from_p,
)
from .so3 import Array, check_rotation


class ConfigError(ValueError):
    """Raised for malformed or inconsistent scenario configuration."""


CSV_HEADER = "t,w1,w2,w3,wh1,wh2,wh3,werr,a1,a2,a3,b1,b2,b3,ah1,ah2,ah3,bh1,bh2,bh3"

DEFAULT_OMEGA0_DEG = (30.0, 10.0, 50.0)  # not aligned with a principal axis
DEFAULT_DT_SENSOR = 0.1
DEFAULT_TRUTH_SUBSTEPS = 10
DEFAULT_AUTO_GAIN_FACTOR = 1.5  # k = 1.5 k*: safely certified, finite noise gain

_TOP_KEYS = {
    "inertia", "omega0", "attitude0", "refs", "sensor", "gains",
    "dt_sensor", "t_end", "torque", "omega_max", "truth_substeps",
}


def cubesat_inertia() -> InertiaDiag:
    """Inertia of a homogeneous 20 x 10 x 10 cm, 2 kg parallelepiped.

    (m/12) diag(w^2 + h^2, l^2 + h^2, l^2 + w^2) = diag(1/300, 1/120, 1/120).
    """
    length, width, height, mass = 0.2, 0.1, 0.1, 2.0
    return InertiaDiag(
        mass / 12.0 * (width**2 + height**2),
        mass / 12.0 * (length**2 + height**2),
        mass / 12.0 * (length**2 + width**2),
    )


@dataclass(frozen=True)
class AutoGains:
    """Gain rule alpha = sqrt(1 - p), k = factor * k_star."""

    factor: float = DEFAULT_AUTO_GAIN_FACTOR


@dataclass(frozen=True)
class ScenarioConfig:
    inertia: InertiaDiag
    omega0: Array
    attitude0: Array
    refs: ReferencePair
    sensor: SensorConfig
    gains: ObserverGains | AutoGains
    dt_sensor: float
    t_end: float
    torque: TorqueProfile
    omega_max: float | None  # None: derive the free-rotation bound
    truth_substeps: int


def _reject_unknown(doc: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}")


def _as_vec3(value, name: str) -> Array:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigError(f"{name} must be a 3-vector")
    return arr


def _as_rotation(value, name: str) -> Array:
    if value == "identity":
        return np.eye(3)
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3, 3):
        raise ConfigError(f"{name} must be 'identity' or a 3x3 matrix")
    try:
        return check_rotation(arr)
    except ValueError as exc:
        raise ConfigError(f"{name} is not a rotation: {exc}") from None


def _parse_inertia(value) -> InertiaDiag:
    if value == "cubesat":
        return cubesat_inertia()
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigError("inertia must be 'cubesat' or [j1, j2, j3]")
    try:
        return InertiaDiag(*arr)
    except ValueError as exc:
        raise ConfigError(f"invalid inertia: {exc}") from None


def _parse_refs(value) -> ReferencePair:
    if not isinstance(value, dict):
        raise ConfigError("refs must be an object")
    if "p" in value:
        _reject_unknown(value, {"p"}, "refs")
        try:
            return reference_pair_from_p(float(value["p"]))
        except ValueError as exc:
            raise ConfigError(f"invalid refs: {exc}") from None
    _reject_unknown(value, {"a_ref", "b_ref"}, "refs")
    try:
        return canonicalize(_as_vec3(value["a_ref"], "a_ref"), _as_vec3(value["b_ref"], "b_ref"))
    except KeyError as exc:
        raise ConfigError(f"refs missing {exc.args[0]}") from None
    except ValueError as exc:
        raise ConfigError(f"invalid refs: {exc}") from None


def _parse_sensor(value) -> SensorConfig:
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError("sensor must be an object")
    _reject_unknown(value, {"r_sb", "r_mb", "noise_sigma", "seed"}, "sensor")
    try:
        return SensorConfig(
            r_sb=_as_rotation(value.get("r_sb", "identity"), "r_sb"),
            r_mb=_as_rotation(value.get("r_mb", "identity"), "r_mb"),
            noise_sigma=float(value.get("noise_sigma", 0.0)),
            seed=int(value.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid sensor: {exc}") from None


def _parse_gains(value) -> ObserverGains | AutoGains:
    if value is None or value == "auto":
        return AutoGains()
    if not isinstance(value, dict):
        raise ConfigError("gains must be 'auto' or an object")
    if "factor" in value:
        _reject_unknown(value, {"factor"}, "gains")
        factor = float(value["factor"])
        if factor <= 0.0:
            raise ConfigError("gains factor must be positive")
        return AutoGains(factor)
    _reject_unknown(value, {"alpha", "k"}, "gains")
    try:
        return ObserverGains(float(value["alpha"]), float(value["k"]))
    except KeyError as exc:
        raise ConfigError(f"gains missing {exc.args[0]}") from None


def _parse_torque(value) -> TorqueProfile:
    if value is None:
        return zero_torque()
    if not isinstance(value, dict):
        raise ConfigError("torque must be an object")
    kind = value.get("kind")
    if kind == "zero":
        _reject_unknown(value, {"kind"}, "torque")
        return zero_torque()
    if kind == "constant":
        _reject_unknown(value, {"kind", "value"}, "torque")
        return constant_torque(_as_vec3(value.get("value", (0, 0, 0)), "torque value"))
    if kind == "sinusoid":
        _reject_unknown(value, {"kind", "amplitude", "frequency", "phase"}, "torque")
        try:
            return sinusoidal_torque(
                _as_vec3(value["amplitude"], "torque amplitude"),
                float(value["frequency"]),
                float(value.get("phase", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"torque missing {exc.args[0]}") from None
    raise ConfigError("torque kind must be one of: zero, constant, sinusoid")


def parse_config(doc: dict, seed_override: int | None = None) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a JSON-shaped dict."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "configuration")
    if "t_end" not in doc:
        raise ConfigError("t_end is required")
    t_end = float(doc["t_end"])
    dt_sensor = float(doc.get("dt_sensor", DEFAULT_DT_SENSOR))
    if t_end <= 0.0 or dt_sensor <= 0.0:
        raise ConfigError("t_end and dt_sensor must be positive")
    substeps = int(doc.get("truth_substeps", DEFAULT_TRUTH_SUBSTEPS))
    if substeps < 1:
        raise ConfigError("truth_substeps must be >= 1")

    omega_max = doc.get("omega_max", "auto")
    if omega_max == "auto":
        omega_max_val = None
    else:
        omega_max_val = float(omega_max)
        if omega_max_val <= 0.0:
            raise ConfigError("omega_max must be positive")

    omega0 = (
        _as_vec3(doc["omega0"], "omega0")
        if "omega0" in doc
        else np.radians(DEFAULT_OMEGA0_DEG)
    )
    sensor = _parse_sensor(doc.get("sensor"))
    if seed_override is not None:
        sensor = replace(sensor, seed=int(seed_override))

    return ScenarioConfig(
        inertia=_parse_inertia(doc.get("inertia", "cubesat")),
        omega0=omega0,
        attitude0=_as_rotation(doc.get("attitude0", "identity"), "attitude0"),
        refs=_parse_refs(doc.get("refs", {"p": 0.0})),
        sensor=sensor,
        gains=_parse_gains(doc.get("gains")),
        dt_sensor=dt_sensor,
        t_end=t_end,
        torque=_parse_torque(doc.get("torque")),
        omega_max=omega_max_val,
        truth_substeps=substeps,
    )


def load_config(path, seed_override: int | None = None) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(doc, seed_override=seed_override)


@dataclass(frozen=True)
class ResolvedGains:
    alpha: float
    k: float
    omega_max: float
    certificate: gainlib.GainCertificate


def resolve_gains(cfg: ScenarioConfig) -> ResolvedGains:
    """Fix alpha, k and omega_max for a scenario; fails before any simulation.

    omega_max 'auto' uses the conserved-energy bound, which exists only for
    free rotation. The auto gain rule is alpha = sqrt(1-p), k = factor * k_star.
    """
    p = cfg.refs.p
    if cfg.omega_max is not None:
        omega_max = cfg.omega_max
    else:
        try:
            omega_max = omega_max_bound(
                cfg.inertia, TruthState(cfg.attitude0, cfg.omega0), cfg.torque
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if omega_max <= 0.0:
            raise ConfigError("derived omega_max is zero; configure it explicitly")
    try:
        if isinstance(cfg.gains, AutoGains):
            alpha = math.sqrt(1.0 - p)
            k = cfg.gains.factor * gainlib.compute_k_star(alpha, p, omega_max)
        else:
            cfg.gains.validate_for(p)
            alpha, k = cfg.gains.alpha, cfg.gains.k
        cert = gainlib.compute_certificate(alpha, p, omega_max, k)
    except ValueError as exc:
        raise ConfigError(f"invalid gains for p = {p:.6g}: {exc}") from None
    return ResolvedGains(alpha, k, omega_max, cert)


@dataclass
class RunResult:
    """Aligned per-sample histories plus the certificate and decay metrics."""

    times: Array
    truth: list[TruthState]
    measurements: list[MeasurementPair]
    observer: list[ObserverState]
    errors: list[ErrorState]
    certificate: gainlib.GainCertificate
    decay_rate: float
    decay_window: tuple[float, float]

    @cached_property
    def omega(self) -> Array:
        return np.array([s.omega for s in self.truth])

    @cached_property
    def omega_hat(self) -> Array:
        return np.array([s.omega_hat for s in self.observer])

    @cached_property
    def omega_error(self) -> Array:
        return np.array([np.linalg.norm(e.omega_tilde) for e in self.errors])

    @property
    def terminal_error(self) -> float:
        return float(self.omega_error[-1])

    def steady_state_variance(self, tail_fraction: float = 0.25) -> float:
        """Pooled per-component variance of the rate error over the tail."""
        tilde = np.array([e.omega_tilde for e in self.errors])
        start = int(len(tilde) * (1.0 - tail_fraction))
        tail = tilde[start:]
        if len(tail) < 2:
            return 0.0
        return float(np.mean(np.var(tail, axis=0)))


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    """Simulate truth, sample sensors, step the observer, fit the decay rate."""
    resolved = resolve_gains(cfg)
    gains = ObserverGains(resolved.alpha, resolved.k)
    n_steps = int(round(cfg.t_end / cfg.dt_sensor))
    if n_steps < 1:
        raise ConfigError("t_end shorter than one sensor period")

    truth = TruthState(cfg.attitude0.copy(), cfg.omega0.copy())
    truth_series: list[TruthState] = []
    meas_series: list[MeasurementPair] = []
    obs_series: list[ObserverState] = []
    xhat: ObserverState | None = None

    for n in range(n_steps + 1):
        t = n * cfg.dt_sensor
        meas = measure(truth.r, cfg.refs, cfg.sensor, t, sample_index=n)
        if xhat is None:
            xhat = init_observer(meas)
        truth_series.append(truth)
        meas_series.append(meas)
        obs_series.append(xhat)
        if n < n_steps:
            tau_sample = cfg.torque(t)  # held with the measurement across the step
            xhat = observer_step(xhat, meas, tau_sample, cfg.inertia, gains, cfg.dt_sensor)
            truth = integrate_truth(
                truth, cfg.inertia, cfg.torque, t, cfg.dt_sensor, cfg.truth_substeps
            )

    times = np.arange(n_steps + 1) * cfg.dt_sensor
    errors = error_trace(truth_series, obs_series, cfg.refs, resolved.k)
    err_norms = np.array([np.linalg.norm(e.omega_tilde) for e in errors])
    window = default_decay_window(times, err_norms)
    try:
        rate = decay_rate(times, err_norms, window)
    except ValueError:
        rate = float("nan")  # floor-limited: nothing to fit
    return RunResult(
        times=times,
        truth=truth_series,
        measurements=meas_series,
        observer=obs_series,
        errors=errors,
        certificate=resolved.certificate,
        decay_rate=rate,
        decay_window=window,
    )


def decay_rate(times, errors, window: tuple[float, float]) -> float:
    """Least-squares slope of log(errors) over the time window.

    Non-positive samples (already at the rounding floor) are dropped; if
    fewer than two usable samples remain the window is floor-limited and a
    ValueError is raised.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(errors, dtype=float)
    t1, t2 = window
    mask = (t >= t1) & (t <= t2) & (e > 0.0)
    if mask.sum() < 2:
        raise ValueError("decay window is floor-limited (too few positive samples)")
    ts = t[mask]
    design = np.column_stack([ts, np.ones_like(ts)])
    slope, _ = np.linalg.lstsq(design, np.log(e[mask]), rcond=None)[0]
    return float(slope)


def default_decay_window(times, errors) -> tuple[float, float]:
    """Fit window from the initial-transient peak down to the terminal floor.

    The floor estimate is twice the median of the last fifth of the series,
    which tracks either the integration floor (noiseless) or the noise floor.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(errors, dtype=float)
    n = len(t)
    if n < 3:
        return float(t[0]), float(t[-1])
    floor = max(2.0 * float(np.median(e[int(0.8 * n):])), 1e-12)
    i0 = int(np.argmax(e[: max(2, n // 4)]))
    below = np.nonzero(e[i0:] <= max(floor, e[i0] * 1e-8))[0]
    i1 = i0 + int(below[0]) if len(below) else n - 1
    if i1 - i0 < 8:
        i1 = min(n - 1, i0 + 8)
    return float(t[i0]), float(t[i1])


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    decay_rate: float
    terminal_error: float
    steady_state_variance: float


SWEEP_AXES = ("p", "omega-max", "k")


def _sweep_config(base: ScenarioConfig, resolved: ResolvedGains, axis: str, value: float) -> ScenarioConfig:
    if axis == "p":
        if not 0.0 <= value < 1.0:
            raise ConfigError(f"sweep value {value:g}: p must lie in [0, 1)")
        alpha = math.sqrt(1.0 - value) if isinstance(base.gains, AutoGains) else resolved.alpha
        return replace(
            base,
            refs=reference_pair_from_p(value),
            gains=ObserverGains(alpha, resolved.k),  # k held fixed across the sweep
        )
    if axis == "omega-max":
        if value <= 0.0:
            raise ConfigError(f"sweep value {value:g}: rate multiplier must be positive")
        return replace(
            base,
            omega0=base.omega0 * value,
            omega_max=None if base.omega_max is None else base.omega_max * value,
            gains=ObserverGains(resolved.alpha, resolved.k),  # k held fixed
        )
    if axis == "k":
        if value <= 0.0:
            raise ConfigError(f"sweep value {value:g}: k* multiplier must be positive")
        k_star = gainlib.compute_k_star(resolved.alpha, base.refs.p, resolved.omega_max)
        return replace(base, gains=ObserverGains(resolved.alpha, value * k_star))
    raise ConfigError(f"unknown sweep axis {axis!r} (choose from {', '.join(SWEEP_AXES)})")


def sweep(base: ScenarioConfig, axis: str, values) -> list[SweepRow]:
    """One run per value along the axis; rows come back in input order.

    Axis semantics: "p" takes absolute inner products and rebuilds the
    reference pair (alpha follows sqrt(1-p) under auto gains, k stays at the
    base resolution); "omega-max" scales the initial rate (and any explicit
    omega_max) by the value with gains held; "k" sets k to value * k_star of
    the base scenario.
    """
    axis = axis.replace("_", "-")
    resolved = resolve_gains(base)
    configs = [_sweep_config(base, resolved, axis, float(v)) for v in values]
    # validate every derived config before spending time on any run
    for value, cfg in zip(values, configs):
        try:
            resolve_gains(cfg)
        except ConfigError as exc:
            raise ConfigError(f"sweep value {float(value):g}: {exc}") from None
    with ThreadPoolExecutor(max_workers=min(4, len(configs))) as pool:
        results = list(pool.map(run_scenario, configs))
    return [
        SweepRow(
            axis=axis,
            value=float(value),
            decay_rate=result.decay_rate,
            terminal_error=result.terminal_error,
            steady_state_variance=result.steady_state_variance(),
        )
        for value, result in zip(values, results)
    ]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(result: RunResult, fh) -> None:
    """Time series in the fixed 20-column schema, 17 significant digits."""
    fh.write(CSV_HEADER + "\n")
    for i, t in enumerate(result.times):
        truth = result.truth[i]
        meas = result.measurements[i]
        obs = result.observer[i]
        err = result.errors[i]
        row = [
            t,
            *truth.omega,
            *obs.omega_hat,
            float(np.linalg.norm(err.omega_tilde)),
            *meas.a,
            *meas.b,
            *obs.a_hat,
            *obs.b_hat,
        ]
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_sweep_csv(rows: list[SweepRow], fh) -> None:
    fh.write("axis,value,decay_rate,terminal_error,steady_state_variance\n")
    for row in rows:
        fh.write(
            f"{row.axis},{_fmt(row.value)},{_fmt(row.decay_rate)},"
            f"{_fmt(row.terminal_error)},{_fmt(row.steady_state_variance)}\n"
        )


def gnuplot_script(csv_path: str) -> str:
    """Companion plot script for a run CSV; keeps plotting out of the core."""
    return "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'time [s]'",
        "set terminal pngcairo size 1200,800",
        "set output 'omega_error.png'",
        "set logscale y",
        "set ylabel '|omega error| [rad/s]'",
        f"plot '{csv_path}' using 1:8 with lines",
        "unset logscale y",
        "set output 'omega_tracking.png'",
        "set ylabel 'omega [rad/s]'",
        f"plot '{csv_path}' using 1:2 with lines, '' using 1:3 with lines, \\",
        "     '' using 1:4 with lines, '' using 1:5 with lines dt 2, \\",
        "     '' using 1:6 with lines dt 2, '' using 1:7 with lines dt 2",
        "",
    ])
