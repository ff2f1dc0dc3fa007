"""Closed-form convergence certificate for the observer error dynamics, plus
numerical verification of every quantity it rests on.

For gains (alpha, k), reference inner product p and rate bound omega_max, the
certificate bundles:

  A_m      upper bound on the 9x9 error-system matrix A(t),
  K        overshoot constant (condition number of the diagonalizing P),
  L        Lipschitz factor of A along trajectories, sqrt(2) omega_max,
  gamma_k  certified decay rate of the scaled linear part,
  k_star   gain threshold above which a basin radius exists,
  r_k      certified basin radius in scaled error coordinates,
  r_limit  the k -> infinity limit of r_k.

The verification helpers rebuild A(t) and its diagonalizing transform from a
concrete measurement pair and check the frozen spectrum, the exponential decay
envelope ||e^{A s}|| <= K e^{-alpha s / 2} and the Lipschitz bound by direct
evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .observer import ErrorState
from .so3 import Array, check_unit, cross_matrix, eigenvalues, matrix_exp, spectral_norm

DEPENDENCE_FLOOR = 1e-12  # |a x b|^2 below this makes P unusable


@dataclass(frozen=True)
class GainCertificate:
    alpha: float
    p: float
    omega_max: float
    k: float
    A_m: float
    L: float
    K: float
    gamma_k: float
    k_star: float
    r_k: float
    r_limit: float


@dataclass(frozen=True)
class FrozenSpectrum:
    """Eigenvalues of A(t), constant along trajectories.

    The oscillator frequencies come from a2 = 2 sqrt(2),
    a3 = 2 sqrt(1+p), a4 = 2 sqrt(1-p), all above alpha for admissible gains.
    """

    a2: float
    a3: float
    a4: float
    eigenvalues: tuple


@dataclass(frozen=True)
class SimilarityCertificate:
    """Outcome of rebuilding the diagonalizing transform P from a measurement pair."""

    eigenvalues: Array  # of P^T P, ascending
    expected_eigenvalues: Array  # closed form, ascending
    eigenvalue_error: float
    cond_p: float
    K: float
    similarity_residual: float  # max |P^-1 A P - block diagonal|
    printed_q_mismatch: float  # distance of P^T P blocks from the printed Q_i form


def _check_ranges(alpha: float, p: float) -> float:
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    limit = 2.0 * math.sqrt(1.0 - p)
    if not 0.0 < alpha < limit:
        raise ValueError(
            f"alpha must lie in (0, 2 sqrt(1-p)) = (0, {limit:.6g}), got {alpha}"
        )
    return limit


def compute_A_m(alpha: float) -> float:
    """Upper bound on ||A(t)||: max(sqrt(2 + 2 alpha^2), sqrt(3 + alpha^2))."""
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    return math.sqrt(max(2.0 + 2.0 * alpha * alpha, 3.0 + alpha * alpha))


def compute_K(alpha: float, p: float) -> float:
    """Overshoot constant sqrt((1 + q)/(1 - q)) with q = alpha / (2 sqrt(1-p))."""
    limit = _check_ranges(alpha, p)
    q = alpha / limit
    return math.sqrt((1.0 + q) / (1.0 - q))


def compute_k_star(alpha: float, p: float, omega_max: float) -> float:
    """Gain threshold: the basin radius is positive exactly for k above this."""
    if omega_max <= 0.0:
        raise ValueError("omega_max must be positive")
    bigk = compute_K(alpha, p)
    lnk = math.log(bigk)
    return (
        (math.sqrt(lnk) + math.sqrt(lnk + 2.0 * alpha * bigk)) ** 2
        / alpha**2
        * math.sqrt(2.0)
        * bigk
        * omega_max
    )


def gamma_threshold(alpha: float, p: float, omega_max: float) -> float:
    """gamma_k is positive exactly for k above 4 K ln(K) L / alpha^2."""
    bigk = compute_K(alpha, p)
    ell = math.sqrt(2.0) * omega_max
    return 4.0 * bigk * math.log(bigk) * ell / alpha**2


def compute_certificate(alpha: float, p: float, omega_max: float, k: float) -> GainCertificate:
    """Evaluate every closed-form certificate quantity.

    r_k is reported as 0.0 when gamma_k <= 0 (no decay certificate, hence no
    certified radius) and comes out negative for gains between the decay
    threshold and k_star, so r_k > 0 is exactly the certified-basin condition.
    """
    _check_ranges(alpha, p)
    if omega_max <= 0.0 or k <= 0.0:
        raise ValueError("omega_max and k must be positive")
    a_m = compute_A_m(alpha)
    bigk = compute_K(alpha, p)
    ell = math.sqrt(2.0) * omega_max
    lnk = math.log(bigk)
    gamma_k = k * alpha / 2.0 - math.sqrt(bigk * k * ell * lnk)
    k_star = compute_k_star(alpha, p, omega_max)
    r_limit = (alpha / 2.0) ** 1.5 / (math.sqrt(a_m) * bigk**3)
    if gamma_k > 0.0:
        r_k = (
            (1.0 - bigk**2 * ell / gamma_k)
            * (gamma_k / k) ** 1.5
            / (math.sqrt(a_m) * bigk**3)
        )
    else:
        r_k = 0.0
    return GainCertificate(
        alpha=float(alpha),
        p=float(p),
        omega_max=float(omega_max),
        k=float(k),
        A_m=a_m,
        L=ell,
        K=bigk,
        gamma_k=gamma_k,
        k_star=k_star,
        r_k=r_k,
        r_limit=r_limit,
    )


def build_A(a, b, alpha: float) -> Array:
    """The 9x9 error-system matrix for measured directions a, b:

        [ -alpha I   0        [a] ]
        [  0        -alpha I  [b] ]
        [ [a]        [b]      0   ]
    """
    a = check_unit(a)
    b = check_unit(b)
    out = np.zeros((9, 9))
    out[0:3, 0:3] = -alpha * np.eye(3)
    out[3:6, 3:6] = -alpha * np.eye(3)
    ca, cb = cross_matrix(a), cross_matrix(b)
    out[0:3, 6:9] = ca
    out[3:6, 6:9] = cb
    out[6:9, 0:3] = ca
    out[6:9, 3:6] = cb
    return out


def pair_difference_matrix(da, db) -> Array:
    """A(s) - A(t) depends only on the direction increments; the -alpha I
    blocks cancel."""
    out = np.zeros((9, 9))
    ca, cb = cross_matrix(da), cross_matrix(db)
    out[0:3, 6:9] = ca
    out[3:6, 6:9] = cb
    out[6:9, 0:3] = ca
    out[6:9, 3:6] = cb
    return out


def frozen_spectrum(alpha: float, p: float) -> FrozenSpectrum:
    """Closed-form eigenvalues of A(t): -alpha (x3) plus the conjugate pairs
    (-alpha +/- i sqrt(a_i^2 - alpha^2)) / 2 for a2, a3, a4."""
    _check_ranges(alpha, p)
    a2 = 2.0 * math.sqrt(2.0)
    a3 = 2.0 * math.sqrt(1.0 + p)
    a4 = 2.0 * math.sqrt(1.0 - p)
    eigs = [-alpha, -alpha, -alpha]
    for ai in (a2, a3, a4):
        im = math.sqrt(ai * ai - alpha * alpha) / 2.0
        eigs.append(complex(-alpha / 2.0, im))
        eigs.append(complex(-alpha / 2.0, -im))
    return FrozenSpectrum(a2, a3, a4, tuple(eigs))


def default_s_samples(n: int = 50, s_max: float = 20.0) -> Array:
    """Log-spaced decay-envelope sample times in (0, s_max]."""
    return np.geomspace(1e-2, s_max, n)


def verify_exp_bound(a, b, alpha: float, bigk: float, s_values=None, k: float = 1.0) -> float:
    """Worst violation of ||e^{k A(t) s}|| <= K e^{-k alpha s / 2} over sampled s.

    Non-positive (within rounding) whenever the certificate holds; callers
    assert the returned maximum is below their tolerance.
    """
    if s_values is None:
        s_values = default_s_samples()
    mat = k * build_A(a, b, alpha)
    worst = -math.inf
    for s in np.asarray(s_values, dtype=float):
        if s < 0.0:
            raise ValueError("s samples must be >= 0")
        norm = spectral_norm(matrix_exp(mat, float(s)))
        worst = max(worst, norm - bigk * math.exp(-k * alpha * s / 2.0))
    return worst


def build_P(a, b, alpha: float) -> Array:
    """Column-block transform P with P^-1 A P block diagonal.

    Built from the measured pair at one instant; the spectrum of P^T P (and
    hence cond(P) = K) depends only on (alpha, p).
    """
    a = check_unit(a)
    b = check_unit(b)
    p = float(np.dot(a, b))
    if 1.0 - p * p <= DEPENDENCE_FLOOR:
        raise ValueError("measurement pair is numerically dependent")
    mu = math.sqrt(8.0 * (1.0 - p * p))
    axb = np.cross(a, b)
    s2 = math.sqrt(2.0 * (1.0 - p * p))

    cols = np.zeros((9, 9))
    # invariant-plane block (three columns)
    cols[0:3, 0] = a
    cols[3:6, 1] = b
    cols[0:3, 2] = (b - p * a) / s2
    cols[3:6, 2] = (a - p * b) / s2
    # oscillator pair at a2 = 2 sqrt(2)
    cols[0:3, 3] = 2.0 * (p * a - b) / mu
    cols[3:6, 3] = 2.0 * (a - p * b) / mu
    cols[6:9, 3] = alpha * axb / mu
    cols[6:9, 4] = -math.sqrt(8.0 - alpha * alpha) * axb / mu
    # oscillator pair at a3 = 2 sqrt(1 + p)
    cols[0:3, 5] = 2.0 * axb / mu
    cols[3:6, 5] = 2.0 * axb / mu
    cols[6:9, 5] = alpha * (b - a) / mu
    cols[6:9, 6] = math.sqrt(4.0 * (1.0 + p) - alpha * alpha) * (a - b) / mu
    # oscillator pair at a4 = 2 sqrt(1 - p)
    cols[0:3, 7] = 2.0 * axb / mu
    cols[3:6, 7] = -2.0 * axb / mu
    cols[6:9, 7] = alpha * (a + b) / mu
    cols[6:9, 8] = -math.sqrt(4.0 * (1.0 - p) - alpha * alpha) * (a + b) / mu
    return cols


def _printed_q_block(alpha: float, ai: float) -> Array:
    """The Q_i block in its printed form, kept verbatim as a cross-check
    oracle; see SimilarityCertificate.printed_q_mismatch."""
    off = (alpha / ai) * math.sqrt(1.0 - alpha / ai)
    return np.array([
        [1.0 + alpha**2 / ai**2, off],
        [off, 1.0 - alpha**2 / ai**2],
    ])


def verify_ptp_eigenvalues(alpha: float, p: float, a=None, b=None) -> SimilarityCertificate:
    """Rebuild P for a concrete pair and certify its algebra numerically.

    Checks, against closed forms: the spectrum of P^T P
    ({1 (x3), 1 +/- alpha/a_i}), cond(P) = K, and that P^-1 A P is block
    diagonal with blocks -alpha I and the three 2x2 oscillators. The printed
    Q_i form of the P^T P blocks disagrees with the constructed transform
    (off-diagonal sign and the radicand); the mismatch is reported rather
    than hidden, and the eigenvalue assertions rest on the constructed P.
    """
    if a is None or b is None:
        if not 0.0 <= p < 1.0:
            raise ValueError("p must lie in [0, 1)")
        a = np.array([1.0, 0.0, 0.0])
        b = np.array([p, math.sqrt(1.0 - p * p), 0.0])
    a = check_unit(a)
    b = check_unit(b)
    if abs(float(np.dot(a, b)) - p) > 1e-9:
        raise ValueError("measurement pair does not realize the requested p")
    spec = frozen_spectrum(alpha, p)
    amat = build_A(a, b, alpha)
    pmat = build_P(a, b, alpha)
    det = np.linalg.det(pmat)
    if not np.isfinite(det) or abs(det) < 1e-12:
        raise ValueError("constructed P is numerically singular")

    gram = pmat.T @ pmat
    eigs = np.sort(eigenvalues(gram).real)
    expected = np.sort(
        [1.0, 1.0, 1.0]
        + [1.0 + s * alpha / ai for ai in (spec.a2, spec.a3, spec.a4) for s in (+1.0, -1.0)]
    )
    eig_err = float(np.abs(eigs - expected).max())
    cond_p = float(math.sqrt(eigs[-1] / eigs[0]))

    # expected block-diagonal image of A under P
    blocks = np.zeros((9, 9))
    blocks[0:3, 0:3] = -alpha * np.eye(3)
    idx = 3
    for ai in (spec.a2, spec.a3, spec.a4):
        d = math.sqrt(ai * ai - alpha * alpha)
        blocks[idx : idx + 2, idx : idx + 2] = 0.5 * np.array([[-alpha, -d], [d, -alpha]])
        idx += 2
    image = np.linalg.solve(pmat, amat @ pmat)
    similarity_residual = float(np.abs(image - blocks).max())

    q_mismatch = 0.0
    idx = 3
    for ai in (spec.a2, spec.a3, spec.a4):
        got = gram[idx : idx + 2, idx : idx + 2]
        q_mismatch = max(q_mismatch, float(np.abs(got - _printed_q_block(alpha, ai)).max()))
        idx += 2

    return SimilarityCertificate(
        eigenvalues=eigs,
        expected_eigenvalues=expected,
        eigenvalue_error=eig_err,
        cond_p=cond_p,
        K=compute_K(alpha, p),
        similarity_residual=similarity_residual,
        printed_q_mismatch=q_mismatch,
    )


def lipschitz_check(times, a_series, b_series, k: float, max_pairs: int = 20_000) -> float:
    """Empirical Lipschitz constant of k A(.) along a sampled trajectory.

    Returns max ||k A(s) - k A(t)|| / |s - t| over a deterministic pair
    subset (all adjacent pairs plus geometrically growing lags, capped at
    max_pairs). Must stay at or below k L = k sqrt(2) omega_max.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(a_series, dtype=float)
    b = np.asarray(b_series, dtype=float)
    n = len(t)
    if n < 2:
        raise ValueError("need at least two samples")
    lags = []
    lag = 1
    while lag < n:
        lags.append(lag)
        lag *= 2
    pairs = [(i, i + lag) for lag in lags for i in range(0, n - lag)]
    if len(pairs) > max_pairs:
        stride = len(pairs) // max_pairs + 1
        pairs = pairs[::stride]
    worst = 0.0
    for i, j in pairs:
        dt = abs(t[j] - t[i])
        if dt == 0.0:
            continue
        norm = spectral_norm(pair_difference_matrix(a[j] - a[i], b[j] - b[i]))
        worst = max(worst, k * norm / dt)
    return worst


def basin_test(error0: ErrorState, cert: GainCertificate) -> bool:
    """Whether an initial error lies in the certified basin ellipsoid

        |a_err|^2 + |b_err|^2 + |omega_err|^2 / k^2 < r_k^2.

    Raises when r_k <= 0 (k below k_star): no basin is certified there.
    """
    if cert.r_k <= 0.0:
        raise ValueError("no certified basin: k does not exceed k_star")
    z2 = (
        float(error0.a_tilde @ error0.a_tilde)
        + float(error0.b_tilde @ error0.b_tilde)
        + float(error0.omega_tilde @ error0.omega_tilde) / cert.k**2
    )
    return z2 < cert.r_k**2


_REPORT_FIELDS = (
    "alpha", "p", "omega_max", "k", "A_m", "L", "K", "gamma_k", "k_star", "r_k", "r_limit",
)


def certificate_record(cert: GainCertificate) -> dict:
    """Machine-readable certificate snapshot."""
    return {name: float(getattr(cert, name)) for name in _REPORT_FIELDS}


def certificate_report(cert: GainCertificate) -> str:
    """Key: value lines, one per certificate quantity."""
    lines = [f"{name}: {getattr(cert, name):.17g}" for name in _REPORT_FIELDS]
    lines.append(f"certified_basin: {'yes' if cert.r_k > 0.0 else 'no'}")
    return "\n".join(lines)
