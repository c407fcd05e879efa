"""High-SNR probability of continuous fluid antenna systems over Rayleigh fading."""

from .analytic import (
    JAKES_LAMBDA2,
    ChannelConfig,
    HspEstimate,
    Method,
    chi2_tail,
    ec_density,
    eec,
    hsp_closed_form,
    lcr,
    scaled_hsp,
    scaling_factor,
    scaling_remainders,
    threshold_u0,
)
from .correlation import (
    JAKES,
    CorrelationKind,
    CorrelationModel,
    bessel_j0,
    eval_correlation,
    second_spectral_moment,
)
from .geometry import DomainBox, intrinsic_volumes, lk_curvatures
from .montecarlo import EmpiricalCcdf, FieldSampler, GridSpec, estimate_hsp
from .shapeopt import (
    ShapeConstraints2D,
    ShapeConstraints3D,
    brute_force_cuboid,
    brute_force_rectangle,
    optimal_cuboid,
    optimal_rectangle,
)

__version__ = "0.1.0"
