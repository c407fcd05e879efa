"""Monte Carlo estimate of the HSP on a lattice over the movement region.

The normalised channel is a complex Gaussian field whose real and imaginary
parts are independent, unit-variance and spatially correlated by rho(tau).
Each replicate draws the field on every lattice point and records the maximum
of X = |h|^2; the lattice maximum approximates the continuous supremum from
below.

Replicate ``r`` always draws from its own Philox stream keyed by the master
seed with ``r`` in the high word of the counter.  Replicates are processed in
fixed-size chunks, so the result does not depend on how many workers run the
chunks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import norm

from .correlation import CorrelationKind, eval_correlation
from .geometry import DomainBox

DEFAULT_SPACING = 0.01
DEFAULT_MAX_POINTS = 20000
DEFAULT_CLAMP_TOL = 0.01
RECONSTRUCTION_TOL = 1e-6
CHUNK_SIZE = 2048


class CapacityError(ValueError):
    """The lattice has more points than the configured cap."""


class ConditioningError(ValueError):
    """The correlation matrix is too far from positive semidefinite."""


class ModelValidityError(ValueError):
    """The correlation model is not a valid covariance at all separations."""


@dataclass(frozen=True)
class GridSpec:
    box: DomainBox
    spacing: float = DEFAULT_SPACING
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def points_per_axis(self):
        # small slack so that e.g. 0.25 / 0.01 counts 26 points, not 25
        return [int(math.floor(t / self.spacing + 1e-9)) + 1 for t in self.box.sides]

    @property
    def num_points(self):
        return math.prod(self.points_per_axis)


@dataclass(frozen=True)
class FieldSampler:
    """Square-root factor B of the lattice correlation matrix (B B^T ~ C)."""

    factor: np.ndarray
    clamped_mass: float
    reconstruction_error: float = 0.0

    @property
    def num_points(self):
        return self.factor.shape[0]


@dataclass(frozen=True)
class EmpiricalCcdf:
    """Exceedance counts of the lattice supremum at ascending thresholds."""

    thresholds: tuple
    exceed_counts: tuple
    replicates: int
    seed: int
    sups: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.thresholds) != len(self.exceed_counts):
            raise ValueError("one count per threshold is required")
        if any(b > a for a, b in zip(self.exceed_counts, self.exceed_counts[1:])):
            raise ValueError("exceedance counts must be non-increasing")
        if any(not 0 <= n <= self.replicates for n in self.exceed_counts):
            raise ValueError("counts must lie in [0, replicates]")

    @property
    def probabilities(self):
        return [n / self.replicates for n in self.exceed_counts]

    def wilson_intervals(self, confidence=0.95):
        return [wilson_interval(n, self.replicates, confidence) for n in self.exceed_counts]


def wilson_interval(successes, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    z = norm.ppf(0.5 + confidence / 2.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def build_grid(spec):
    """Lattice points (i1 d, ..., in d) covering the box, row-major.

    Returns an array of shape (num_points, dim); a 0D box gives one point with
    no coordinates.
    """
    n = spec.num_points
    if n > spec.max_points:
        raise CapacityError(
            f"grid has {n} points, above the cap of {spec.max_points}"
        )
    if spec.box.dim == 0:
        return np.zeros((1, 0))
    axes = [np.arange(k) * spec.spacing for k in spec.points_per_axis]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def covariance_matrix(points, model):
    """C[i, j] = rho(|p_i - p_j|) for a globally valid correlation model."""
    if model.kind is not CorrelationKind.JAKES_J0:
        raise ModelValidityError(
            "only the Jakes model is a valid covariance at every separation"
        )
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be an (N, dim) array")
    if points.shape[1] == 0:
        dist = np.zeros((points.shape[0], points.shape[0]))
    else:
        dist = cdist(points, points)
    cov = np.asarray(eval_correlation(model, dist), dtype=float)
    np.fill_diagonal(cov, 1.0)
    return 0.5 * (cov + cov.T)


def covariance_factor(cov, clamp_tol=DEFAULT_CLAMP_TOL):
    """Eigenvalue-clamped square root of a correlation matrix.

    Fine Jakes lattices are numerically rank deficient, so tiny negative
    eigenvalues are set to zero.  The removed mass, relative to the trace, must
    stay below ``clamp_tol``.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    eigval, eigvec = np.linalg.eigh(cov)
    negative = eigval < 0
    clamped_mass = float(-eigval[negative].sum() / np.trace(cov))
    if clamped_mass > clamp_tol:
        raise ConditioningError(
            f"clamped eigenvalue mass {clamped_mass:.3g} exceeds {clamp_tol:.3g}"
        )
    eigval = np.where(negative, 0.0, eigval)
    factor = eigvec * np.sqrt(eigval)
    err = float(np.max(np.abs(factor @ factor.T - cov)))
    if err > RECONSTRUCTION_TOL:
        raise ConditioningError(
            f"factor reproduces the covariance only to {err:.3g}"
        )
    return FieldSampler(factor, clamped_mass, err)


def replicate_rng(seed, replicate):
    """Independent generator for one replicate of a run with master ``seed``."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed, counter=replicate << 192))


def sample_field(sampler, rng):
    """One draw of X(t) = g_r^2 + g_i^2 on every lattice point."""
    g = rng.standard_normal((2, sampler.num_points)) @ sampler.factor.T
    return (g * g).sum(axis=0)


def sample_sup_chi2(sampler, rng):
    """Maximum of X over the lattice for one replicate."""
    return float(sample_field(sampler, rng).max())


def _chunk_sups(sampler, seed, start, stop):
    n = sampler.num_points
    z = np.stack([replicate_rng(seed, r).standard_normal((2, n)) for r in range(start, stop)])
    g = z @ sampler.factor.T
    return (g * g).sum(axis=1).max(axis=1)


def simulate_sups(sampler, replicates, seed, workers=1):
    """Lattice suprema for replicates 0..replicates-1, in replicate order."""
    if replicates < 1:
        raise ValueError("need at least one replicate")
    bounds = [
        (s, min(s + CHUNK_SIZE, replicates)) for s in range(0, replicates, CHUNK_SIZE)
    ]
    if workers <= 1:
        parts = [_chunk_sups(sampler, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _chunk_sups(sampler, seed, *ab), bounds))
    return np.concatenate(parts)


def sampler_for(spec, model, clamp_tol=DEFAULT_CLAMP_TOL):
    points = build_grid(spec)
    return covariance_factor(covariance_matrix(points, model), clamp_tol)


def estimate_hsp(spec, model, thresholds, replicates, seed, workers=1,
                 clamp_tol=DEFAULT_CLAMP_TOL, keep_sups=False):
    """Empirical P(sup X >= u0) on the lattice for each threshold."""
    thresholds = tuple(float(u) for u in thresholds)
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be ascending")
    sampler = sampler_for(spec, model, clamp_tol)
    sups = simulate_sups(sampler, replicates, seed, workers)
    counts = tuple(int(np.count_nonzero(sups >= u)) for u in thresholds)
    return EmpiricalCcdf(
        thresholds, counts, replicates, seed, sups if keep_sups else None
    )
