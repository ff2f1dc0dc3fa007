"""Built-in scenario documents.

These are plain JSON-shaped dicts fed through the regular config parser, so
they double as working examples of the configuration schema. Rates are given
in rad/s.
"""

from __future__ import annotations

import math


def _deg(*components: float) -> list[float]:
    return [math.radians(c) for c in components]


def preset(name: str) -> dict:
    try:
        return {key: _copy(value) for key, value in _PRESETS[name]().items()}
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def _copy(value):
    if isinstance(value, dict):
        return {k: _copy(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_copy(v) for v in value]
    return value


def _convergence() -> dict:
    # Slow tumble with a deliberately conservative rate bound: k = 1.5 k*
    # then admits the whole |omega(0)| into the certified basin, and the
    # sample-and-hold floor sits orders of magnitude under 1e-3 rad/s.
    return {
        "inertia": "cubesat",
        "omega0": _deg(0.3, 0.1, 0.5),
        "refs": {"p": 0.0},
        "sensor": {"noise_sigma": 0.0, "seed": 0},
        "gains": "auto",
        "omega_max": 0.05,
        "dt_sensor": 0.02,
        "truth_substeps": 2,
        "t_end": 80.0,
    }


def _conservation() -> dict:
    # Free rotation with the default fast tumble; the sensor period times
    # substeps pins the truth integrator at 0.01 s.
    return {
        "inertia": "cubesat",
        "omega0": _deg(30.0, 10.0, 50.0),
        "refs": {"p": 0.0},
        "gains": {"alpha": 1.0, "k": 5.0},
        "omega_max": 2.0,
        "dt_sensor": 0.1,
        "truth_substeps": 10,
        "t_end": 100.0,
    }


def _noisy() -> dict:
    # Medium tumble with the default noise level; good for noise-response
    # and determinism checks.
    return {
        "inertia": "cubesat",
        "omega0": _deg(3.0, 1.0, 5.0),
        "refs": {"p": 0.0},
        "sensor": {"noise_sigma": 0.01, "seed": 42},
        "gains": {"factor": 2.0},
        "dt_sensor": 0.01,
        "truth_substeps": 2,
        "t_end": 20.0,
    }


def _sweep_base() -> dict:
    # Medium tumble used by the trend sweeps; omega_max resolves to the
    # free-rotation bound (about 0.15 rad/s).
    return {
        "inertia": "cubesat",
        "omega0": _deg(3.0, 1.0, 5.0),
        "refs": {"p": 0.0},
        "sensor": {"noise_sigma": 0.0, "seed": 7},
        "gains": "auto",
        "dt_sensor": 0.01,
        "truth_substeps": 2,
        "t_end": 30.0,
    }


_PRESETS = {
    "convergence": _convergence,
    "conservation": _conservation,
    "noisy": _noisy,
    "sweep-base": _sweep_base,
}
