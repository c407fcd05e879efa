"""Axis-aligned movement regions and their intrinsic volumes."""

import math
from dataclasses import dataclass
from itertools import combinations


@dataclass(frozen=True)
class DomainBox:
    """A point, segment, rectangle or cuboid [0, T1] x ... with sides in wavelengths.

    The dimension is the number of sides.  A zero-length side is kept as is:
    the box is then degenerate but every formula below still applies.
    """

    sides: tuple = ()

    def __post_init__(self):
        sides = tuple(float(t) for t in self.sides)
        if len(sides) > 3:
            raise ValueError(f"at most 3 sides are supported, got {len(sides)}")
        for t in sides:
            if not math.isfinite(t) or t < 0:
                raise ValueError(f"side lengths must be finite and >= 0, got {t}")
        object.__setattr__(self, "sides", sides)

    @property
    def dim(self):
        return len(self.sides)

    @property
    def measure(self):
        return math.prod(self.sides)


def intrinsic_volumes(box):
    """Euclidean intrinsic volumes [L_0^E, ..., L_n^E] of the box.

    For a box these are the elementary symmetric polynomials of the sides.
    """
    return [
        float(sum(math.prod(c) for c in combinations(box.sides, j)))
        for j in range(box.dim + 1)
    ]


def lk_curvatures(box, lambda2):
    """Lipschitz-Killing curvatures L_j = lambda2^(j/2) L_j^E."""
    if not (lambda2 > 0 and math.isfinite(lambda2)):
        raise ValueError(f"lambda2 must be positive, got {lambda2}")
    return [lambda2 ** (j / 2) * v for j, v in enumerate(intrinsic_volumes(box))]
