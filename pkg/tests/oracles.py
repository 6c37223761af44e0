"""Independent reference computations shared by the test modules."""

import math

import mpmath
import numpy as np


def lattice_gaussian_sum(sigma, qs, xmax):
    """
    ``sum_{|x| <= xmax} cos(q x) exp(-x^2 / (2 sigma^2))`` summed term by term.

    The sum falls to about exp(-sigma^2 pi^2 / 2) at q = pi while its terms
    stay O(1), so the working precision grows with sigma^2.
    """
    dps = 30 + int(sigma**2 * math.pi**2 / (2 * math.log(10)))
    with mpmath.workdps(dps):
        s2 = 2 * mpmath.mpf(sigma) ** 2
        w = [mpmath.exp(-mpmath.mpf(n * n) / s2) for n in range(xmax + 1)]
        out = []
        for q in np.atleast_1d(qs):
            c1 = mpmath.cos(mpmath.mpf(float(q)))
            prev, cur = mpmath.mpf(1), c1
            acc = w[0] + 2 * w[1] * c1
            for n in range(2, xmax + 1):
                prev, cur = cur, 2 * c1 * cur - prev
                acc += 2 * w[n] * cur
            out.append(float(acc))
    return np.array(out)


def lattice_gaussian_profile(sigma, k0, k, window=None):
    """Unnormalized N-dimensional direct sum at rows of ``k``; window defaults to 20 sigma."""
    k = np.atleast_2d(k)
    xmax = window if window is not None else int(20 * sigma)
    return np.prod([lattice_gaussian_sum(sigma, k[:, a] - k0[a], xmax) for a in range(k.shape[1])], axis=0)
