"""Binary entropy and the classical capacity of the detector channel."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import CausalClass

# Capacity counted as vanishing below this many bits.
VANISHING_CAPACITY = 1e-8


@dataclass(frozen=True)
class ChannelReport:
    delta_AB: float
    nu_B: float
    capacity_bits: float
    causal_class: CausalClass

    def __post_init__(self):
        if not 0.0 <= self.capacity_bits <= 1.0:
            raise ValueError(f"capacity must lie in [0, 1] bits, got {self.capacity_bits}")


def binary_entropy(p: float) -> float:
    """Shannon entropy of a biased bit, in bits (``0 log 0 = 0``)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    out = 0.0
    for x in (p, 1.0 - p):
        if x > 0.0:
            out -= x * math.log2(x)
    return out


def capacity(delta_AB: float, nu_B: float) -> float:
    """Classical capacity in bits per channel use.

    ``S(1/2 + nu/2 |cos 2 delta|) - S(1/2 + nu/2)``: zero when
    ``|cos 2 delta| = 1``, one bit at ``delta = pi/4`` and ``nu = 1``.

    Evaluated as ``S(p0 - g) - S(p0)`` with ``p0 = (1 + nu)/2`` and the gap
    ``g = nu * min(sin^2, cos^2)(delta)``, expanded with ``log1p`` so that
    tiny pairings keep their (quadratically small) capacity instead of
    rounding ``cos 2 delta`` to one.
    """
    if not 0.0 < nu_B <= 1.0:
        raise ValueError(f"nu_B must lie in (0, 1], got {nu_B}")
    gap = nu_B * min(math.sin(delta_AB) ** 2, math.cos(delta_AB) ** 2)
    if gap == 0.0:
        return 0.0
    p0 = 0.5 + 0.5 * nu_B
    q0 = 0.5 - 0.5 * nu_B
    p, q = p0 - gap, q0 + gap
    nats = gap * (math.log(p) - math.log(q)) - p0 * math.log1p(-gap / p0)
    if q0 > 0.0:
        nats -= q0 * math.log1p(gap / q0)
    return min(max(nats / math.log(2.0), 0.0), 1.0)


def channel_report(delta_AB: float, nu_B: float, causal_class: CausalClass) -> ChannelReport:
    return ChannelReport(delta_AB, nu_B, capacity(delta_AB, nu_B), CausalClass(causal_class))
