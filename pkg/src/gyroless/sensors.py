"""Body-frame direction measurements: reference-pair conventions, constant
sensor-frame misalignments and reproducible additive noise.

Noise draws come from a counter-based generator keyed on
(seed, channel, sample index), so any sample can be regenerated in isolation
and full runs replay bitwise regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .so3 import Array, check_rotation, check_unit

SUN_CHANNEL = 0
MAG_CHANNEL = 1

DEPENDENCE_TOL = 1e-6  # |a x b| at or below this means the pair is unusable


@dataclass(frozen=True)
class ReferencePair:
    """Inertial-frame unit directions with their inner product p = a_ref . b_ref."""

    a_ref: Array
    b_ref: Array
    p: float


def canonicalize(a_ref, b_ref) -> ReferencePair:
    """Validate a reference pair and fix the sign convention p >= 0.

    Inputs must be unit vectors; if their inner product is negative the
    first one is flipped, which changes nothing observable. Raises on
    (near-)collinear pairs, for which the direction pair carries too little
    information to reconstruct a rotation rate.
    """
    a = check_unit(a_ref)
    b = check_unit(b_ref)
    if np.linalg.norm(np.cross(a, b)) <= DEPENDENCE_TOL:
        raise ValueError("reference vectors are (nearly) linearly dependent")
    p = float(np.dot(a, b))
    if p < 0.0:
        a = -a
        p = -p
    return ReferencePair(a, b, p)


def reference_pair_from_p(p: float) -> ReferencePair:
    """Canonical pair e1, (p, sqrt(1 - p^2), 0) with the requested inner product."""
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    return canonicalize(
        np.array([1.0, 0.0, 0.0]), np.array([p, np.sqrt(1.0 - p * p), 0.0])
    )


@dataclass(frozen=True)
class SensorConfig:
    """Constant sensor mounting rotations (sensor frame -> body) and noise model.

    `noise_sigma` is the per-axis standard deviation of Gaussian noise added
    to each unit direction before renormalization.
    """

    r_sb: Array  # Sun-sensor frame -> body
    r_mb: Array  # magnetometer frame -> body
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        check_rotation(self.r_sb)
        check_rotation(self.r_mb)
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")


def identity_sensors(noise_sigma: float = 0.0, seed: int = 0) -> SensorConfig:
    return SensorConfig(np.eye(3), np.eye(3), noise_sigma, seed)


@dataclass(frozen=True)
class MeasurementPair:
    """Body-frame unit directions at sample time t."""

    a: Array
    b: Array
    t: float


def channel_noise(seed: int, channel: int, sample_index: int) -> Array:
    """Standard-normal triple for one (seed, channel, sample) cell."""
    key = np.array([seed % 2**64, channel], dtype=np.uint64)
    counter = np.array([0, 0, 0, sample_index % 2**64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
    return gen.standard_normal(3)


def sensor_frame_outputs(a_body, b_body, cfg: SensorConfig) -> tuple[Array, Array]:
    """Raw sensor readings y_a, y_b expressed in their own mounting frames."""
    return cfg.r_sb.T @ np.asarray(a_body, float), cfg.r_mb.T @ np.asarray(b_body, float)


def ingest_sensor_frames(y_a, y_b, cfg: SensorConfig) -> tuple[Array, Array]:
    """Map raw sensor readings back to body coordinates for the observer."""
    return cfg.r_sb @ np.asarray(y_a, float), cfg.r_mb @ np.asarray(y_b, float)


def measure(
    r, refs: ReferencePair, cfg: SensorConfig, t: float, sample_index: int = 0
) -> MeasurementPair:
    """Measured body-frame pair at attitude `r`.

    Ideal values are r.T @ a_ref and r.T @ b_ref. With noise_sigma > 0,
    per-axis Gaussian noise is added and the vectors renormalized, so the
    outputs are always exactly unit norm. The pair is routed out to the
    sensor frames and ingested back, returning precisely what an onboard
    consumer would reconstruct.
    """
    r = np.asarray(r, dtype=float)
    a = r.T @ refs.a_ref
    b = r.T @ refs.b_ref
    if cfg.noise_sigma > 0.0:
        a = a + cfg.noise_sigma * channel_noise(cfg.seed, SUN_CHANNEL, sample_index)
        b = b + cfg.noise_sigma * channel_noise(cfg.seed, MAG_CHANNEL, sample_index)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    y_a, y_b = sensor_frame_outputs(a, b, cfg)
    a_body, b_body = ingest_sensor_frames(y_a, y_b, cfg)
    return MeasurementPair(a_body, b_body, float(t))


def measurement_derivative_check(times, a_series, omega_series) -> float:
    """Max residual of the measurement kinematics a' = a x omega.

    Central differences over a noiseless sampled trajectory; the residual
    is O(dt^2), so this is a consistency check between the attitude history
    and the rate history.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(a_series, dtype=float)
    w = np.asarray(omega_series, dtype=float)
    if len(t) < 3:
        raise ValueError("need at least three samples")
    da = (a[2:] - a[:-2]) / (t[2:] - t[:-2])[:, None]
    resid = da - np.cross(a[1:-1], w[1:-1])
    return float(np.linalg.norm(resid, axis=1).max())
