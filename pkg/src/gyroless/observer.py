"""Nine-state angular velocity observer driven by two measured directions.

The extended state estimate (a_hat, b_hat, omega_hat) is integrated with
measurement injection; the measured directions (never the estimates) appear
in every cross product, and a_hat/b_hat are deliberately not renormalized:
the convergence analysis applies to the unmodified dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rigidbody import InertiaDiag, TorqueProfile, TruthState, euler_rhs, reorthonormalize
from .sensors import MeasurementPair, ReferencePair
from .so3 import Array, cross_matrix


@dataclass(frozen=True)
class ObserverGains:
    """Injection gains: alpha is dimensionless, k has units 1/s.

    alpha must stay inside (0, 2 sqrt(1 - p)) for the configured reference
    inner product p; validate_for enforces that once p is known.
    """

    alpha: float
    k: float

    def validate_for(self, p: float) -> None:
        limit = 2.0 * np.sqrt(1.0 - p)
        if not 0.0 < self.alpha < limit:
            raise ValueError(
                f"alpha must lie in (0, 2 sqrt(1-p)) = (0, {limit:.6g}), got {self.alpha}"
            )
        if self.k <= 0.0:
            raise ValueError("k must be positive")


@dataclass(frozen=True)
class ObserverState:
    """Extended estimate (a_hat, b_hat, omega_hat); direction estimates are
    not unit-norm in general."""

    a_hat: Array
    b_hat: Array
    omega_hat: Array


@dataclass(frozen=True)
class ErrorState:
    """Componentwise truth-minus-estimate errors and the scaled norm
    z = sqrt(|a_err|^2 + |b_err|^2 + |omega_err|^2 / k^2) used by the basin test."""

    a_tilde: Array
    b_tilde: Array
    omega_tilde: Array
    z_norm: float


def init_observer(meas0: MeasurementPair) -> ObserverState:
    """Start from the first measurement with zero rate estimate.

    The measured directions are known, so their initial errors can always be
    zeroed; the rate is the unknown being estimated and zero is the
    uninformed choice.
    """
    return ObserverState(meas0.a.copy(), meas0.b.copy(), np.zeros(3))


def observer_rhs(
    xhat: ObserverState,
    a: Array,
    b: Array,
    tau: Array,
    inertia: InertiaDiag,
    gains: ObserverGains,
) -> tuple[Array, Array, Array]:
    """Time derivative of the extended estimate given measured a, b."""
    ak = gains.alpha * gains.k
    k2 = gains.k * gains.k
    da = np.cross(a, xhat.omega_hat) - ak * (xhat.a_hat - a)
    db = np.cross(b, xhat.omega_hat) - ak * (xhat.b_hat - b)
    dw = euler_rhs(inertia, xhat.omega_hat, tau) + k2 * (
        np.cross(a, xhat.a_hat - a) + np.cross(b, xhat.b_hat - b)
    )
    return da, db, dw


def observer_step(
    xhat: ObserverState,
    meas: MeasurementPair,
    tau: Array,
    inertia: InertiaDiag,
    gains: ObserverGains,
    dt: float,
) -> ObserverState:
    """One RK4 step holding the measurement and torque at their sample values."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    a, b = meas.a, meas.b

    def rhs(state):
        return observer_rhs(state, a, b, tau, inertia, gains)

    def shift(state, h, d):
        return ObserverState(
            state.a_hat + h * d[0], state.b_hat + h * d[1], state.omega_hat + h * d[2]
        )

    k1 = rhs(xhat)
    k2 = rhs(shift(xhat, 0.5 * dt, k1))
    k3 = rhs(shift(xhat, 0.5 * dt, k2))
    k4 = rhs(shift(xhat, dt, k3))
    sixth = dt / 6.0
    return ObserverState(
        xhat.a_hat + sixth * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        xhat.b_hat + sixth * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        xhat.omega_hat + sixth * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
    )


def error_state(a_true, b_true, omega_true, xhat: ObserverState, k: float) -> ErrorState:
    at = np.asarray(a_true, float) - xhat.a_hat
    bt = np.asarray(b_true, float) - xhat.b_hat
    wt = np.asarray(omega_true, float) - xhat.omega_hat
    z = np.sqrt(at @ at + bt @ bt + (wt @ wt) / (k * k))
    return ErrorState(at, bt, wt, float(z))


def error_trace(
    truth_states: list[TruthState],
    observer_states: list[ObserverState],
    refs: ReferencePair,
    k: float,
) -> list[ErrorState]:
    """Per-sample errors against the noiseless true directions r.T @ ref."""
    if len(truth_states) != len(observer_states):
        raise ValueError("trajectory lengths differ")
    out = []
    for ts, xs in zip(truth_states, observer_states):
        a_true = ts.r.T @ refs.a_ref
        b_true = ts.r.T @ refs.b_ref
        out.append(error_state(a_true, b_true, ts.omega, xs, k))
    return out


def simulate_coupled(
    truth0: TruthState,
    xhat0: ObserverState,
    inertia: InertiaDiag,
    refs: ReferencePair,
    tau_fn: TorqueProfile,
    gains: ObserverGains,
    t0: float,
    dt: float,
    n_steps: int,
) -> tuple[list[TruthState], list[ObserverState]]:
    """Integrate truth and observer as one system with stage-exact measurements.

    Every RK4 stage re-evaluates a = r.T @ a_ref from the stage attitude, so
    the result is free of sample-and-hold effects. This isolates the
    continuous-time error dynamics, which is what the invariant tests probe;
    production runs sample and hold instead (see the harness).
    """
    truth_out = [truth0]
    xhat_out = [xhat0]
    truth, xhat = truth0, xhat0
    for n in range(n_steps):
        t = t0 + n * dt

        def rhs(r, w, state, ti):
            a = r.T @ refs.a_ref
            b = r.T @ refs.b_ref
            dr = r @ cross_matrix(w)
            dw = euler_rhs(inertia, w, tau_fn(ti))
            dhat = observer_rhs(state, a, b, tau_fn(ti), inertia, gains)
            return dr, dw, dhat

        r, w = truth.r, truth.omega
        k1 = rhs(r, w, xhat, t)
        k2 = rhs(
            r + 0.5 * dt * k1[0],
            w + 0.5 * dt * k1[1],
            _shifted(xhat, 0.5 * dt, k1[2]),
            t + 0.5 * dt,
        )
        k3 = rhs(
            r + 0.5 * dt * k2[0],
            w + 0.5 * dt * k2[1],
            _shifted(xhat, 0.5 * dt, k2[2]),
            t + 0.5 * dt,
        )
        k4 = rhs(r + dt * k3[0], w + dt * k3[1], _shifted(xhat, dt, k3[2]), t + dt)
        sixth = dt / 6.0
        r_next = r + sixth * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w_next = w + sixth * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        truth = TruthState(reorthonormalize(r_next), w_next)
        xhat = ObserverState(
            xhat.a_hat + sixth * (k1[2][0] + 2 * k2[2][0] + 2 * k3[2][0] + k4[2][0]),
            xhat.b_hat + sixth * (k1[2][1] + 2 * k2[2][1] + 2 * k3[2][1] + k4[2][1]),
            xhat.omega_hat + sixth * (k1[2][2] + 2 * k2[2][2] + 2 * k3[2][2] + k4[2][2]),
        )
        truth_out.append(truth)
        xhat_out.append(xhat)
    return truth_out, xhat_out


def _shifted(state: ObserverState, h: float, d) -> ObserverState:
    return ObserverState(
        state.a_hat + h * d[0], state.b_hat + h * d[1], state.omega_hat + h * d[2]
    )
