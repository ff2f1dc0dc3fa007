"""Ground-truth rotation dynamics: attitude kinematics coupled to the Euler
equations, integrated with fixed-step RK4 and per-step reprojection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .so3 import Array, check_rotation, cross_matrix, reorthonormalize


@dataclass(frozen=True)
class InertiaDiag:
    """Principal-axis inertia diag(j1, j2, j3) in kg m^2.

    Physical diagonal inertias satisfy j_i <= j_j + j_k for every
    permutation; this is what bounds the off-diagonal gyroscopic couplings
    by one and it is enforced at construction.
    """

    j1: float
    j2: float
    j3: float

    def __post_init__(self):
        j = (self.j1, self.j2, self.j3)
        if not all(np.isfinite(j)) or min(j) <= 0.0:
            raise ValueError("inertias must be positive and finite")
        for i in range(3):
            if j[i] > j[(i + 1) % 3] + j[(i + 2) % 3] + 1e-15 * max(j):
                raise ValueError("inertia triangle inequality violated")

    @property
    def diag(self) -> Array:
        return np.array([self.j1, self.j2, self.j3])

    @property
    def lambda_min(self) -> float:
        return min(self.j1, self.j2, self.j3)


@dataclass(frozen=True)
class TruthState:
    """Attitude matrix plus body-frame angular velocity (rad/s).

    `r` columns are the body axes in inertial coordinates; body coordinates
    of an inertial vector u are r.T @ u, and the kinematics is r' = r [omega].
    """

    r: Array
    omega: Array


@dataclass(frozen=True)
class TorqueProfile:
    """Known body-frame torque tau(t) in N m.

    Canonical kinds: "zero" (free rotation), "constant", "sinusoid"
    (componentwise value * sin(2 pi frequency t + phase)).
    """

    kind: str
    value: tuple = (0.0, 0.0, 0.0)
    frequency: float = 0.0
    phase: float = 0.0

    def __call__(self, t: float) -> Array:
        if self.kind == "zero":
            return np.zeros(3)
        if self.kind == "constant":
            return np.asarray(self.value, dtype=float)
        if self.kind == "sinusoid":
            return np.asarray(self.value, dtype=float) * np.sin(
                2.0 * np.pi * self.frequency * t + self.phase
            )
        raise ValueError(f"unknown torque kind {self.kind!r}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (
            self.kind == "constant" and not np.any(np.asarray(self.value))
        )


def zero_torque() -> TorqueProfile:
    return TorqueProfile("zero")


def constant_torque(value) -> TorqueProfile:
    return TorqueProfile("constant", tuple(float(v) for v in value))


def sinusoidal_torque(amplitude, frequency: float, phase: float = 0.0) -> TorqueProfile:
    return TorqueProfile(
        "sinusoid", tuple(float(v) for v in amplitude), float(frequency), float(phase)
    )


def euler_rhs(inertia: InertiaDiag, omega, tau) -> Array:
    """omega' = J^-1 (J omega x omega + tau); broadcasts over leading axes."""
    j = inertia.diag
    omega = np.asarray(omega, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return (np.cross(omega * j, omega) + tau) / j


def truth_step(
    state: TruthState, inertia: InertiaDiag, tau_fn: TorqueProfile, t: float, dt: float
) -> TruthState:
    """One RK4 step of the coupled system (r' = r [omega], Euler equations).

    Stages use the raw intermediate attitudes; reprojection onto the
    rotation group happens once per full step, which preserves order 4.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    r, w = state.r, state.omega

    def rhs(ri, wi, ti):
        return ri @ cross_matrix(wi), euler_rhs(inertia, wi, tau_fn(ti))

    k1r, k1w = rhs(r, w, t)
    k2r, k2w = rhs(r + 0.5 * dt * k1r, w + 0.5 * dt * k1w, t + 0.5 * dt)
    k3r, k3w = rhs(r + 0.5 * dt * k2r, w + 0.5 * dt * k2w, t + 0.5 * dt)
    k4r, k4w = rhs(r + dt * k3r, w + dt * k3w, t + dt)
    r_next = r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    w_next = w + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    return TruthState(reorthonormalize(r_next), w_next)


def integrate_truth(
    state: TruthState,
    inertia: InertiaDiag,
    tau_fn: TorqueProfile,
    t: float,
    dt: float,
    substeps: int,
) -> TruthState:
    """Advance one sensor period with `substeps` equal RK4 sub-steps."""
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    h = dt / substeps
    for i in range(substeps):
        state = truth_step(state, inertia, tau_fn, t + i * h, h)
    return state


def invariants_report(state: TruthState, inertia: InertiaDiag) -> tuple[float, float]:
    """Kinetic energy 0.5 omega^T J omega and momentum norm |J omega|.

    Both are first integrals of free rotation, so their drift measures
    integration error.
    """
    jw = inertia.diag * state.omega
    return float(0.5 * np.dot(jw, state.omega)), float(np.linalg.norm(jw))


def omega_max_bound(inertia: InertiaDiag, state0: TruthState, tau: TorqueProfile) -> float:
    """A priori bound on |omega(t)| for free rotation: sqrt(2 T / min_i J_i).

    Valid because kinetic energy is conserved and
    |omega|^2 <= omega^T J omega / min_i J_i. With a non-zero torque no such
    bound exists from the initial state alone, so that case is rejected and
    the caller must supply the bound explicitly.
    """
    if not tau.is_zero:
        raise ValueError("omega_max_bound supports free rotation only; "
                         "supply omega_max explicitly for torqued scenarios")
    energy, _ = invariants_report(state0, inertia)
    return float(np.sqrt(2.0 * energy / inertia.lambda_min))


def identity_state(omega) -> TruthState:
    """Truth state at identity attitude with the given body rate."""
    return TruthState(np.eye(3), np.asarray(omega, dtype=float))


def make_state(r, omega) -> TruthState:
    """Validated truth state from raw arrays."""
    return TruthState(check_rotation(r), np.asarray(omega, dtype=float))
