"""Degree-based circular arithmetic.

Angles are degrees everywhere; radians only appear inside trig calls.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError, UndefinedMeanError

# mean resultant length below which the mean direction is noise
RESULTANT_CUTOFF = 1e-9


def _as_finite_array(x, name="angles"):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def wrap_deg(x):
    """Normalize degrees into [0, 360).

    Accepts a scalar (returns ``float``) or an array (returns ``ndarray``).
    """
    if np.ndim(x) == 0:
        v = float(x)
        if not math.isfinite(v):
            raise InvalidInputError(f"cannot wrap non-finite angle {v!r}")
        r = v % 360.0
        # tiny negatives round up to exactly 360.0
        return 0.0 if r >= 360.0 else r
    arr = _as_finite_array(x)
    r = np.mod(arr, 360.0)
    r[r >= 360.0] = 0.0
    return r


def ang_diff(a, b):
    """Signed minimal difference ``a - b`` in (-180, 180]."""
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        d = wrap_deg(float(a) - float(b))
        return d - 360.0 if d > 180.0 else d
    d = wrap_deg(np.subtract(a, b))
    return np.where(d > 180.0, d - 360.0, d)


def circular_mean(angles) -> float:
    """Mean direction of ``angles`` from the sum of unit vectors.

    A constant series returns its value exactly.
    """
    arr = _as_finite_array(angles)
    if arr.size == 0:
        raise InvalidInputError("circular mean of an empty list")
    first = arr.flat[0]
    if np.all(arr == first):
        return wrap_deg(first)
    rad = np.radians(arr)
    c = float(np.mean(np.cos(rad)))
    s = float(np.mean(np.sin(rad)))
    if math.hypot(c, s) <= RESULTANT_CUTOFF:
        raise UndefinedMeanError("resultant vector vanishes; mean direction undefined")
    return wrap_deg(math.degrees(math.atan2(s, c)))


def circular_gaps(angles) -> np.ndarray:
    """Arcs between circularly consecutive angles, in sorted order.

    The last entry is the arc wrapping from the largest angle back to the smallest.
    """
    arr = wrap_deg(np.atleast_1d(_as_finite_array(angles)))
    if arr.size == 0:
        raise InvalidInputError("circular gaps of an empty list")
    srt = np.sort(arr)
    gaps = np.empty_like(srt)
    gaps[:-1] = np.diff(srt)
    gaps[-1] = 360.0 - (srt[-1] - srt[0])
    return gaps


def max_circular_gap(angles) -> float:
    """Largest arc of the circle that contains none of ``angles``."""
    return float(circular_gaps(angles).max())
