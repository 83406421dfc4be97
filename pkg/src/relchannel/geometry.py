"""Minkowski events, intervals and causal classification of detector supports.

Signature is (-, +, +, +) and c = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_CAUSAL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Event:
    t: float
    x: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        x = tuple(float(c) for c in self.x)
        if len(x) != 3:
            raise ValueError("spatial part of an event must have 3 components")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", x)
        if not all(math.isfinite(c) for c in (self.t, *x)):
            raise ValueError(f"event components must be finite, got {self}")

    def __add__(self, other: "Event") -> "Event":
        return Event(self.t + other.t, tuple(a + b for a, b in zip(self.x, other.x)))


@dataclass(frozen=True)
class SupportRegion:
    """Bounding cylinder of a detector support: a time window times a ball."""

    center: Event
    temporal_halfwidth: float
    spatial_radius: float

    def __post_init__(self):
        if not self.temporal_halfwidth > 0:
            raise ValueError("temporal_halfwidth must be > 0")
        if not self.spatial_radius > 0:
            raise ValueError("spatial_radius must be > 0")


class CausalClass(str, Enum):
    STRICTLY_SPACELIKE = "strictly-spacelike"
    CAUSALLY_CONNECTED = "causally-connected"
    INDETERMINATE = "indeterminate-margin"


def interval(a: Event, b: Event) -> float:
    """Squared Minkowski interval; negative is timelike, positive spacelike."""
    dt = a.t - b.t
    dx = sum((p - q) ** 2 for p, q in zip(a.x, b.x))
    return -dt * dt + dx


def spatial_distance(a: Event, b: Event) -> float:
    return float(np.linalg.norm(np.subtract(a.x, b.x)))


def causal_margin(ra: SupportRegion, rb: SupportRegion) -> float:
    """Smallest spatial separation minus largest time separation of two regions.

    Both extremes are computed by interval arithmetic on the bounding
    cylinders and are attained simultaneously, so the sign of the margin
    decides whether every pair of points is spacelike separated.
    """
    d = spatial_distance(ra.center, rb.center)
    min_dist = max(0.0, d - ra.spatial_radius - rb.spatial_radius)
    max_dt = abs(ra.center.t - rb.center.t) + ra.temporal_halfwidth + rb.temporal_halfwidth
    return min_dist - max_dt


def classify_supports(
    ra: SupportRegion, rb: SupportRegion, tolerance: float = DEFAULT_CAUSAL_TOLERANCE
) -> CausalClass:
    margin = causal_margin(ra, rb)
    if margin > tolerance:
        return CausalClass.STRICTLY_SPACELIKE
    if margin < -tolerance:
        return CausalClass.CAUSALLY_CONNECTED
    return CausalClass.INDETERMINATE


def contact_time_offset(ra: SupportRegion, rb: SupportRegion) -> float:
    """Centre time separation at which the two regions first touch the light cone.

    For ``|t_b - t_a|`` below this value (and the same spatial centres) the
    regions are strictly spacelike separated.
    """
    d = spatial_distance(ra.center, rb.center)
    min_dist = max(0.0, d - ra.spatial_radius - rb.spatial_radius)
    return min_dist - ra.temporal_halfwidth - rb.temporal_halfwidth
