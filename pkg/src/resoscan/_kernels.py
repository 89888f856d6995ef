"""Compiled inner loop of the libration screen.

The screen marks a tuple "circulating" when some window of its resonance
angle touches every one of ``nbins`` equal bins. The bin width w is strictly
below half the gap threshold T, leaving a slack d = T - 2w. For any empty arc
(a, b) with b - a >= T, the first bin starting at or after a + d/2 ends by
b - d/2, so that whole bin is empty and sits at least d/2 from both samples
bounding the arc; rounding in the angle cannot move a sample across that
slack. Hence "all bins occupied" implies "max gap < T" exactly.
"""
import math

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def screen_block(table, coeffs, starts, stops, nbins, out):
    """For each row of ``coeffs`` write True to ``out`` if it may librate.

    table  -- (T, 6) angles: lambda, lambda_N, varpi, Omega, varpi_N, Omega_N
    coeffs -- (k, 6) int64 rows (p, q, m, n, r, s)
    """
    scale = nbins / 360.0
    occ = np.zeros(nbins, dtype=np.bool_)
    for i in range(coeffs.shape[0]):
        p = float(coeffs[i, 0])
        q = float(coeffs[i, 1])
        m = float(coeffs[i, 2])
        n = float(coeffs[i, 3])
        r = float(coeffs[i, 4])
        s = float(coeffs[i, 5])
        may = True
        for w in range(starts.shape[0]):
            occ[:] = False
            filled = 0
            for t in range(starts[w], stops[w]):
                phi = (p * table[t, 0] - q * table[t, 1] - m * table[t, 2]
                       - n * table[t, 3] - r * table[t, 4] - s * table[t, 5])
                phi -= 360.0 * math.floor(phi / 360.0)
                b = int(phi * scale)
                if b >= nbins:
                    b = nbins - 1
                elif b < 0:
                    b = 0
                if not occ[b]:
                    occ[b] = True
                    filled += 1
                    if filled == nbins:
                        break
            if filled == nbins:
                may = False
                break
        out[i] = may
