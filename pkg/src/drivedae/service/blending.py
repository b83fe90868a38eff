"""Control mixing for the assistance loop.

The denoised control is combined with the driver's current control at
fixed 80/20 weights, and the applied control moves linearly from the
previous tick's value across the 100 ms tick, so the command the vehicle
sees is continuous.
"""

import numpy as np

ASSIST_WEIGHT = 0.8
RAW_WEIGHT = 0.2


def _check_unit(name: str, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (2,):
        raise ValueError(f"{name} must have 2 entries, got {v.shape}")
    if not ((v >= 0.0).all() and (v <= 1.0).all()):
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


def blend(assisted, raw) -> np.ndarray:
    """0.8 * assisted + 0.2 * raw, entrywise, in normalized units."""
    assisted = _check_unit("assisted", assisted)
    raw = _check_unit("raw", raw)
    return ASSIST_WEIGHT * assisted + RAW_WEIGHT * raw


def interpolate(prev_applied, next_applied, alpha: float) -> np.ndarray:
    """Linear ramp between consecutive applied controls; alpha in [0, 1]."""
    prev_applied = np.asarray(prev_applied, dtype=np.float64)
    next_applied = np.asarray(next_applied, dtype=np.float64)
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return prev_applied.copy()
    if alpha == 1.0:
        return next_applied.copy()
    return (1.0 - alpha) * prev_applied + alpha * next_applied
