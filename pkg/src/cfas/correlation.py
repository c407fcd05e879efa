"""Isotropic spatial correlation models for the fading channel.

Distances are measured in wavelengths.  The Jakes model rho(tau) = J0(2 pi tau)
is the one used for simulation; the quadratic local model only describes the
small-separation behaviour 1 - a tau^2 and exists so the analytic formulas can
be exercised with an arbitrary second spectral moment.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

# Region boundaries for bessel_j0.  The power series loses accuracy to
# cancellation past |x| ~ 8 and the Hankel expansion only reaches 1e-12 once its
# smallest term (~exp(-2|x|)) is that small, so the gap is covered by Miller's
# backward recurrence.
_SERIES_LIMIT = 8.0
_ASYMPTOTIC_LIMIT = 25.0
_SERIES_TERMS = 40
_MILLER_START = 120
_HANKEL_TERMS = 30


def _j0_series(x):
    y = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * y / (k * k)
        total = total + term
    return total


def _j0_miller(x):
    # Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised by
    # J_0 + 2 * sum_k J_{2k} = 1.
    j_next = np.zeros_like(x)
    j_curr = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(_MILLER_START, 0, -1):
        j_prev = (2.0 * k / x) * j_curr - j_next
        j_next, j_curr = j_curr, j_prev
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm = norm + 2.0 * j_curr
        big = np.abs(j_curr) > 1e200
        if big.any():
            scale = np.where(big, 1e-200, 1.0)
            j_curr, j_next, norm = j_curr * scale, j_next * scale, norm * scale
    return j_curr / (norm + j_curr)


def _j0_hankel(x):
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    eight_x = 8.0 * x
    for k in range(_HANKEL_TERMS):
        if k > 0:
            term = term * (2 * k - 1) ** 2 / (k * eight_x)
        sign = -1.0 if (k // 2 + k % 2) % 2 else 1.0
        if k % 2 == 0:
            p = p + sign * term
        else:
            q = q + sign * term
    c, s = np.cos(x), np.sin(x)
    # cos(x - pi/4) and sin(x - pi/4) without forming the shifted argument
    cos_chi = (c + s) / math.sqrt(2.0)
    sin_chi = (s - c) / math.sqrt(2.0)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Accepts a scalar or an array; returns the same shape.  Absolute error is
    below 1e-12 for |x| <= 1000.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel_j0 requires finite input")
    ax = np.abs(arr)
    out = np.empty_like(ax)
    small = ax < _SERIES_LIMIT
    large = ax >= _ASYMPTOTIC_LIMIT
    mid = ~(small | large)
    if small.any():
        out[small] = _j0_series(ax[small])
    if mid.any():
        out[mid] = _j0_miller(ax[mid])
    if large.any():
        out[large] = _j0_hankel(ax[large])
    if out.ndim == 0:
        return float(out)
    return out


class CorrelationKind(enum.Enum):
    JAKES_J0 = "jakes_j0"
    QUADRATIC_LOCAL = "quadratic_local"


@dataclass(frozen=True)
class CorrelationModel:
    """Isotropic correlation rho(tau) with small-tau curvature ``a``.

    Use :meth:`jakes` or :meth:`quadratic` rather than the constructor.
    """

    kind: CorrelationKind
    a: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"curvature a must be positive and finite, got {self.a}")
        if self.kind is CorrelationKind.JAKES_J0 and self.a != math.pi**2:
            raise ValueError("the Jakes model has a fixed curvature a = pi^2")

    @classmethod
    def jakes(cls):
        return cls(CorrelationKind.JAKES_J0, math.pi**2)

    @classmethod
    def quadratic(cls, a):
        return cls(CorrelationKind.QUADRATIC_LOCAL, float(a))

    @property
    def lambda2(self):
        return second_spectral_moment(self)


JAKES = CorrelationModel.jakes()


def eval_correlation(model, tau):
    """Evaluate rho(tau) for a scalar or array of separations tau >= 0."""
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("separation tau must be finite and non-negative")
    if model.kind is CorrelationKind.JAKES_J0:
        return bessel_j0(2.0 * math.pi * t)
    if np.any(model.a * t * t > 1.0):
        raise ValueError(
            "quadratic local model is not valid where a * tau^2 > 1"
        )
    out = 1.0 - model.a * t * t
    return float(out) if out.ndim == 0 else out


def second_spectral_moment(model):
    """lambda2 = Var[h'(t)] = 2a, per squared wavelength."""
    if model.kind is CorrelationKind.JAKES_J0:
        return 2.0 * math.pi**2
    return 2.0 * model.a
