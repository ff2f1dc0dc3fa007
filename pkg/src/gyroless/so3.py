"""Small fixed-size linear algebra: cross-product matrices, rotation hygiene,
spectral norms, matrix exponentials and eigenvalues of small dense matrices.

Everything operates on plain float64 numpy arrays and is pure, so all
functions are safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray

SERIES_CUTOFF = 1e-16  # truncate the exponential Taylor series below this term norm
SCALING_NORM = 0.5  # bring ||M s|| under this before squaring


def cross_matrix(x) -> Array:
    """Skew-symmetric matrix [x] with [x] @ y == cross(x, y)."""
    x1, x2, x3 = np.asarray(x, dtype=float)
    return np.array([
        [0.0, -x3, x2],
        [x3, 0.0, -x1],
        [-x2, x1, 0.0],
    ])


def normalize(v) -> Array:
    """v / |v|; rejects near-zero input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize a near-zero vector")
    return v / n


def check_unit(v, tol: float = 1e-9) -> Array:
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"vector is not unit norm (|v| = {np.linalg.norm(v):.12g})")
    return v


def rotation_defect(r) -> float:
    """||r^T r - I||, the induced-norm distance from orthogonality."""
    r = np.asarray(r, dtype=float)
    return spectral_norm(r.T @ r - np.eye(r.shape[0]))


def check_rotation(r, tol: float = 1e-8) -> Array:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError("rotation must be 3x3")
    if rotation_defect(r) > tol:
        raise ValueError("matrix is not orthogonal within tolerance")
    if np.linalg.det(r) <= 0.0:
        raise ValueError("matrix is a reflection (det <= 0)")
    return r


def rotation_about(axis, angle: float) -> Array:
    """Rotation by `angle` (rad) about `axis` (Rodrigues form)."""
    u = normalize(axis)
    ux = cross_matrix(u)
    return np.eye(3) + np.sin(angle) * ux + (1.0 - np.cos(angle)) * (ux @ ux)


def spectral_norm(m) -> float:
    """Largest singular value of a square matrix.

    Full symmetric eigensolve of the scaled Gram matrix m^T m; the scaling
    keeps the top eigenvalue O(1) so the result is accurate for matrices of
    any magnitude, including rounding-noise ones.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("spectral_norm: non-finite entries")
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return 0.0
    scaled = m / scale
    try:
        top = float(np.linalg.eigvalsh(scaled.T @ scaled)[-1])
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"spectral_norm: eigensolve did not converge: {exc}") from None
    return scale * float(np.sqrt(max(top, 0.0)))


def matrix_exp(m, s: float = 1.0) -> Array:
    """e^{m s} by scaling and squaring with a truncated Taylor series."""
    if s < 0:
        raise ValueError("matrix_exp: s must be >= 0")
    a = np.asarray(m, dtype=float) * s
    n = a.shape[0]
    # Frobenius norm over-estimates the induced norm, so the scaled matrix
    # is guaranteed under SCALING_NORM.
    norm = float(np.linalg.norm(a))
    squarings = 0
    if norm > SCALING_NORM:
        squarings = int(np.ceil(np.log2(norm / SCALING_NORM)))
        a = a / (2.0 ** squarings)
    result = np.eye(n)
    term = np.eye(n)
    j = 1
    while True:
        term = term @ a / j
        result = result + term
        if float(np.linalg.norm(term)) < SERIES_CUTOFF or j > 60:
            break
        j += 1
    for _ in range(squarings):
        result = result @ result
    return result


def eigenvalues(m) -> Array:
    """All eigenvalues (with multiplicity) of a real square matrix.

    Backed by the LAPACK Hessenberg + shifted-QR path; output is sorted by
    (real, imag) purely for determinism, callers should compare as multisets.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("eigenvalues: non-finite entries")
    try:
        w = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigenvalue iteration did not converge: {exc}") from None
    return np.sort_complex(w)


def eigenvalue_match_distance(got, expected) -> float:
    """Worst pairing distance between two eigenvalue multisets.

    Greedy nearest pairing: repeatedly match the globally closest pair.
    Both inputs must have the same length.
    """
    got = [complex(z) for z in np.asarray(got).ravel()]
    want = [complex(z) for z in np.asarray(expected).ravel()]
    if len(got) != len(want):
        raise ValueError("eigenvalue multisets differ in size")
    worst = 0.0
    while want:
        best = (np.inf, 0, 0)
        for i, wv in enumerate(want):
            for j, gv in enumerate(got):
                d = abs(wv - gv)
                if d < best[0]:
                    best = (d, i, j)
        d, i, j = best
        worst = max(worst, d)
        want.pop(i)
        got.pop(j)
    return worst


def reorthonormalize(r) -> Array:
    """Project a drifted attitude matrix back onto the rotation group.

    Newton iteration for the orthogonal polar factor, x <- (x + x^-T)/2,
    which converges quadratically and leaves exact rotations untouched.
    Input must satisfy ||r^T r - I|| <= 0.1 and det r > 0.
    """
    r = np.asarray(r, dtype=float)
    gap = r.T @ r - np.eye(r.shape[0])
    # Frobenius over-estimates the induced norm, so it can admit quickly on
    # the hot path (per-integration-step drift control); the exact check
    # only runs for genuinely suspect input.
    if float(np.linalg.norm(gap)) > 0.1 and spectral_norm(gap) > 0.1:
        raise ValueError(f"input too far from orthogonal (defect {spectral_norm(gap):.3g})")
    if np.linalg.det(r) <= 0.0:
        raise ValueError("input has non-positive determinant")
    x = r
    for _ in range(25):
        x_next = 0.5 * (x + np.linalg.inv(x).T)
        if np.abs(x_next - x).max() <= 1e-13:
            return x_next
        x = x_next
    raise RuntimeError("polar iteration did not converge")
