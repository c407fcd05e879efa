"""High-SNR probability (HSP) of a continuous fluid antenna.

All HSP entry points work with the normalised threshold u0 applied to the
chi-squared(2) field X(t) = |h(t)|^2, where the channel is scaled so each of the
real and imaginary parts has unit power.  Three analytic routes are provided:

* ``hsp_closed_form``: explicit per-dimension polynomials in the sides,
* ``eec``: the expected Euler characteristic, sum_j L_j(A) rho_j(u0),
* ``scaled_hsp``: the product-form scaling law, one factor per side.

The first two are algebraically identical; the third is an approximation
whose error is given by ``scaling_remainders``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .geometry import DomainBox, lk_curvatures

JAKES_LAMBDA2 = 2.0 * math.pi**2
FIELD_DOF = 2


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    GENERAL_EEC = "general_eec"
    SCALING_LAW = "scaling_law"
    SIMULATION = "simulation"


@dataclass(frozen=True)
class ChannelConfig:
    """Channel gain, symbol energy and noise power (all linear)."""

    beta: float
    es: float
    sigma2: float

    def __post_init__(self):
        for name in ("beta", "es", "sigma2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class HspEstimate:
    """An HSP value and how it was obtained.

    Analytic approximations can leave [0, 1] (above 1 for large regions, and
    below 0 at low thresholds where the Euler characteristic is no longer a
    count of excursions).  Such values are kept raw and flagged through
    ``clamped`` instead of being truncated.
    """

    value: float
    method: Method
    clamped: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"HSP must be finite, got {self.value}")
        if self.method is Method.SIMULATION and not 0 <= self.value <= 1:
            raise ValueError("a simulated HSP must lie in [0, 1]")

    def __float__(self):
        return self.value


def _estimate(value, method):
    value = float(value)
    return HspEstimate(value, method, clamped=not 0.0 <= value <= 1.0)


def _check_positive(**kwargs):
    for name, v in kwargs.items():
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v}")


def threshold_u0(config, u):
    """Convert an SNR threshold u (linear) to the normalised field threshold."""
    _check_positive(u=u)
    return 2.0 * config.sigma2 * u / (config.beta * config.es)


def chi2_tail(k, u0):
    """P(chi2_k >= u0)."""
    if k < 1 or int(k) != k:
        raise ValueError(f"degrees of freedom must be a positive integer, got {k}")
    if u0 < 0:
        raise ValueError(f"u0 must be >= 0, got {u0}")
    if k == 2:
        return math.exp(-u0 / 2.0)
    return float(gammaincc(k / 2.0, u0 / 2.0))


def ec_density(j, k, u0):
    """Euler characteristic density rho_j(u0) of a chi2_k random field."""
    if not 0 <= j <= 3:
        raise ValueError(f"EC densities are only provided for j in 0..3, got {j}")
    if j == 0:
        return chi2_tail(k, u0)
    _check_positive(u0=u0)
    if k < 1 or int(k) != k:
        raise ValueError(f"degrees of freedom must be a positive integer, got {k}")
    total = 0.0
    for l in range((j - 1) // 2 + 1):
        for m in range(j - 1 - 2 * l + 1):
            if k < j - m - 2 * l:
                continue
            total += (
                math.comb(k - 1, j - 1 - m - 2 * l)
                * (-1) ** (j - 1 + m + l)
                * math.factorial(j - 1)
                * u0 ** (m + l)
                / (math.factorial(m) * math.factorial(l) * 2**l)
            )
    # Denominator uses (2 pi)^(j/2); this is the reading that reproduces the
    # level-crossing result in one dimension.
    denom = (2.0 * math.pi) ** (j / 2) * math.gamma(k / 2) * 2 ** ((k - 2) / 2)
    return u0 ** ((k - j) / 2) * math.exp(-u0 / 2) / denom * total


def lcr(u0, lambda2):
    """Level crossing rate of the chi2_2 process at u0, per wavelength."""
    return math.sqrt(lambda2 * u0 / (2.0 * math.pi)) * math.exp(-u0 / 2.0)


def eec(box, lambda2, u0):
    """HSP through the expected Euler characteristic of the excursion set."""
    _check_positive(lambda2=lambda2, u0=u0)
    curv = lk_curvatures(box, lambda2)
    value = math.fsum(L * ec_density(j, FIELD_DOF, u0) for j, L in enumerate(curv))
    return _estimate(value, Method.GENERAL_EEC)


def closed_form_value(sides, lambda2, u0):
    """Closed-form HSP as a plain float or array (broadcasts over the sides).

    ``sides`` is a sequence of 0 to 3 side lengths, each a scalar or an array.
    Used directly by the shape-optimisation grid search.
    """
    c1 = np.sqrt(lambda2 * u0 / (2.0 * np.pi))
    c2 = lambda2 * (u0 - 1.0) / (2.0 * np.pi)
    c3 = (lambda2 / (2.0 * np.pi)) ** 1.5 * (u0**1.5 - 3.0 * np.sqrt(u0))
    n = len(sides)
    if n == 0:
        poly = 1.0
    elif n == 1:
        (t1,) = sides
        poly = 1.0 + t1 * c1
    elif n == 2:
        t1, t2 = sides
        poly = 1.0 + c1 * (t1 + t2) + c2 * t1 * t2
    elif n == 3:
        t1, t2, t3 = sides
        poly = (
            1.0
            + c1 * (t1 + t2 + t3)
            + c2 * (t1 * t2 + t1 * t3 + t2 * t3)
            + c3 * t1 * t2 * t3
        )
    else:
        raise ValueError("at most 3 dimensions are supported")
    return np.exp(-u0 / 2.0) * poly


def hsp_closed_form(box, lambda2, u0):
    """HSP from the explicit 0D-3D polynomials."""
    _check_positive(lambda2=lambda2, u0=u0)
    return _estimate(closed_form_value(box.sides, lambda2, u0), Method.CLOSED_FORM)


def scaling_factor(T, lambda2, u0):
    """Multiplicative HSP gain from adding a dimension of length T."""
    if T < 0:
        raise ValueError(f"side length must be >= 0, got {T}")
    _check_positive(lambda2=lambda2, u0=u0)
    return 1.0 + T * math.sqrt(lambda2 * u0 / (2.0 * math.pi))


def scaling_remainders(box, u0, lambda2=JAKES_LAMBDA2):
    """Remainders (R2, R3) of the scaling law.

    ``P2 = P1 * factor(T2) + R2`` and ``P3 = P2 * factor(T3) + R3``.  With the
    Jakes value of lambda2 these reduce to R2 = -pi T1 T2 exp(-u0/2) and
    R3 = -pi T3 exp(-u0/2) (T1 + T2 + 2 T1 T2 sqrt(pi u0)).  R3 is None for a
    rectangle.
    """
    if box.dim < 2:
        raise ValueError("remainders need at least a 2D box")
    _check_positive(lambda2=lambda2, u0=u0)
    q = lambda2 / (2.0 * math.pi)
    e = math.exp(-u0 / 2.0)
    t1, t2 = box.sides[:2]
    r2 = -q * t1 * t2 * e
    r3 = None
    if box.dim == 3:
        t3 = box.sides[2]
        r3 = -q * t3 * e * (t1 + t2 + 2.0 * t1 * t2 * math.sqrt(q * u0))
    return r2, r3


def scaled_hsp(box, lambda2, u0):
    """Scaling-law HSP: exp(-u0/2) times one factor per side."""
    _check_positive(lambda2=lambda2, u0=u0)
    value = math.exp(-u0 / 2.0)
    for t in box.sides:
        value *= scaling_factor(t, lambda2, u0)
    return _estimate(value, Method.SCALING_LAW)


def hsp_all(sides, lambda2, u0):
    """Closed form, EEC and scaling-law estimates for one box and threshold."""
    box = DomainBox(tuple(sides))
    return (
        hsp_closed_form(box, lambda2, u0),
        eec(box, lambda2, u0),
        scaled_hsp(box, lambda2, u0),
    )
