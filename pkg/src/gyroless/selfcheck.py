"""Invariant suite behind the `verify` CLI subcommand.

Each check is a fast, deterministic pass/fail probe of one contract the
package is supposed to uphold: conservation of the free-rotation integrals,
measurement consistency, the closed-form certificate thresholds, the decay
envelope, the disturbance bound, the frozen spectra and run determinism.
"""

from __future__ import annotations

import io
import math

import numpy as np

from . import gains as gainlib
from .harness import parse_config, run_scenario, write_csv
from .observer import error_state, init_observer
from .presets import preset
from .rigidbody import InertiaDiag, TruthState, euler_rhs, invariants_report, truth_step, zero_torque
from .sensors import identity_sensors, measure, reference_pair_from_p
from .so3 import rotation_about, spectral_norm


def _random_rotation(rng) -> np.ndarray:
    axis = rng.standard_normal(3)
    return rotation_about(axis, rng.uniform(0.0, np.pi))


def check_conservation() -> tuple[bool, str]:
    """Free-rotation energy/momentum drift and attitude orthogonality."""
    inertia = parse_config(preset("conservation")).inertia
    state = TruthState(np.eye(3), np.radians([30.0, 10.0, 50.0]))
    e0, m0 = invariants_report(state, inertia)
    worst_drift = worst_orth = 0.0
    tau = zero_torque()
    for i in range(2000):  # 20 s at 0.01 s
        state = truth_step(state, inertia, tau, i * 0.01, 0.01)
        e, m = invariants_report(state, inertia)
        worst_drift = max(worst_drift, abs(e - e0) / e0, abs(m - m0) / m0)
        if i % 50 == 0:
            worst_orth = max(worst_orth, spectral_norm(state.r.T @ state.r - np.eye(3)))
    ok = worst_drift <= 1e-6 and worst_orth <= 1e-8
    return ok, f"drift {worst_drift:.2e}, orthogonality {worst_orth:.2e}"


def check_measurement_consistency() -> tuple[bool, str]:
    """Noiseless measurements stay unit norm with constant inner product."""
    refs = reference_pair_from_p(0.4)
    cfg = identity_sensors()
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(200):
        meas = measure(_random_rotation(rng), refs, cfg, 0.1 * i, i)
        worst = max(
            worst,
            abs(np.linalg.norm(meas.a) - 1.0),
            abs(np.linalg.norm(meas.b) - 1.0),
            abs(float(meas.a @ meas.b) - refs.p),
        )
    return worst <= 1e-9, f"max deviation {worst:.2e}"


def check_certificate_thresholds() -> tuple[bool, str]:
    """r_k > 0 iff k > k_star; gamma_k > 0 iff k above its own threshold."""
    for alpha, p, omega_max in [(1.0, 0.0, 1.0), (0.5, 0.3, 2.0), (0.3, 0.9, 0.7)]:
        k_star = gainlib.compute_k_star(alpha, p, omega_max)
        g_thr = gainlib.gamma_threshold(alpha, p, omega_max)
        for k in np.linspace(0.5 * k_star, 2.0 * k_star, 41):
            cert = gainlib.compute_certificate(alpha, p, omega_max, k)
            if (cert.r_k > 0.0) != (k > k_star):
                return False, f"r(k) sign wrong at alpha={alpha} p={p} k={k:.6g}"
            if (cert.gamma_k > 0.0) != (k > g_thr):
                return False, f"gamma(k) sign wrong at alpha={alpha} p={p} k={k:.6g}"
        # linear scaling of the threshold in omega_max
        scaled = gainlib.compute_k_star(alpha, p, 3.7 * omega_max)
        if abs(scaled - 3.7 * k_star) > 1e-12 * scaled:
            return False, "k_star does not scale linearly in omega_max"
    return True, "thresholds characterized on 3 parameter sets"


def check_basin_limit() -> tuple[bool, str]:
    """r_k grows monotonically to r_limit on a log-spaced gain grid."""
    cert0 = gainlib.compute_certificate(1.0, 0.0, 1.0, 40.0)
    prev = 0.0
    for k in np.geomspace(cert0.k_star * 1.01, 1e6, 60):
        cert = gainlib.compute_certificate(1.0, 0.0, 1.0, float(k))
        if cert.r_k < prev - 1e-15 or cert.r_k > cert.r_limit + 1e-15:
            return False, f"r(k) not monotone toward the limit at k={k:.6g}"
        prev = cert.r_k
    gap = cert0.r_limit - prev
    return gap < 1e-4 * cert0.r_limit, f"terminal gap to limit {gap:.2e}"


def check_matrix_bound() -> tuple[bool, str]:
    """||A(t)|| never exceeds the closed-form A_m."""
    rng = np.random.default_rng(11)
    worst = -np.inf
    for alpha in (0.1, 1.0, 1.9):
        a_m = gainlib.compute_A_m(alpha)
        for _ in range(100):
            a = rng.standard_normal(3)
            a /= np.linalg.norm(a)
            b = rng.standard_normal(3)
            b /= np.linalg.norm(b)
            worst = max(worst, spectral_norm(gainlib.build_A(a, b, alpha)) - a_m)
    return worst <= 1e-9, f"max ||A|| - A_m = {worst:.2e}"


def check_exp_bound() -> tuple[bool, str]:
    """Decay envelope ||e^{A s}|| <= K e^{-alpha s/2} on sampled s."""
    rng = np.random.default_rng(5)
    refs = reference_pair_from_p(0.0)
    worst = -np.inf
    for alpha in (0.5, 1.0):
        bigk = gainlib.compute_K(alpha, 0.0)
        for _ in range(5):
            r = _random_rotation(rng)
            a, b = r.T @ refs.a_ref, r.T @ refs.b_ref
            worst = max(
                worst,
                gainlib.verify_exp_bound(a, b, alpha, bigk, gainlib.default_s_samples(20)),
            )
    return worst <= 1e-8, f"max envelope violation {worst:.2e}"


def check_disturbance_bound() -> tuple[bool, str]:
    """|E(omega) - E(omega_hat)| <= sqrt(2) omega_max |err| + |err|^2."""
    inertia = parse_config(preset("conservation")).inertia
    rng = np.random.default_rng(17)
    omega_max = 2.0
    n = 10_000
    w = rng.standard_normal((n, 3))
    w *= (omega_max * rng.uniform(0, 1, n) ** (1 / 3) / np.linalg.norm(w, axis=1))[:, None]
    wh = w + rng.standard_normal((n, 3)) * rng.uniform(0, 3, n)[:, None]
    tau = np.zeros(3)
    lhs = np.linalg.norm(euler_rhs(inertia, w, tau) - euler_rhs(inertia, wh, tau), axis=1)
    err = np.linalg.norm(w - wh, axis=1)
    slack = math.sqrt(2.0) * omega_max * err + err**2 - lhs
    return slack.min() >= -1e-12, f"min slack {slack.min():.2e}"


def check_spectral_certificate() -> tuple[bool, str]:
    """Frozen spectrum of A and of P^T P against closed forms at alpha=1, p=0."""
    report = gainlib.verify_ptp_eigenvalues(1.0, 0.0)
    ok = (
        report.eigenvalue_error <= 1e-6
        and abs(report.cond_p - report.K) <= 1e-8
        and report.similarity_residual <= 1e-9
    )
    return ok, (
        f"eig err {report.eigenvalue_error:.2e}, cond-K {abs(report.cond_p - report.K):.2e}, "
        f"similarity {report.similarity_residual:.2e}"
    )


def check_determinism() -> tuple[bool, str]:
    """Same config and seed replays to byte-identical CSV."""
    doc = preset("noisy")
    doc["t_end"] = 2.0
    outputs = []
    for _ in range(2):
        result = run_scenario(parse_config(doc))
        buf = io.StringIO()
        write_csv(result, buf)
        outputs.append(buf.getvalue())
    ok = outputs[0] == outputs[1]
    return ok, f"{len(outputs[0])} bytes compared"


def check_convergence_smoke() -> tuple[bool, str]:
    """Certified-gain run converges with a negative fitted decay rate."""
    doc = preset("convergence")
    doc["t_end"] = 30.0
    result = run_scenario(parse_config(doc))
    err0 = error_state(
        result.truth[0].r.T @ np.array([1.0, 0, 0]),
        result.truth[0].r.T @ np.array([0, 1.0, 0]),
        result.truth[0].omega,
        result.observer[0],
        result.certificate.k,
    )
    inside = gainlib.basin_test(err0, result.certificate)
    ok = inside and result.decay_rate < 0.0 and result.terminal_error < 1e-3
    return ok, (
        f"basin {inside}, rate {result.decay_rate:+.3f} 1/s, "
        f"terminal {result.terminal_error:.2e} rad/s"
    )


CHECKS = [
    ("conservation", check_conservation),
    ("measurement-consistency", check_measurement_consistency),
    ("certificate-thresholds", check_certificate_thresholds),
    ("basin-limit", check_basin_limit),
    ("matrix-bound", check_matrix_bound),
    ("exp-bound", check_exp_bound),
    ("disturbance-bound", check_disturbance_bound),
    ("spectral-certificate", check_spectral_certificate),
    ("determinism", check_determinism),
    ("convergence", check_convergence_smoke),
]


def run_all(out=None) -> bool:
    """Run every check, print one line each; True when all pass."""
    import sys

    out = out or sys.stdout
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn()
        all_ok &= ok
        out.write(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}\n")
    return all_ok
