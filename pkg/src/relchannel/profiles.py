"""Detector test functions ``f(t, x) = lambda * chi((t - t0)/tau) * F(|x - p|/sigma)``.

Two unit-peak shape families are provided:

* ``truncated-gaussian``: ``exp(-u**2/2)`` cut off at ``|u| = 8``.  Transforms
  and antiderivatives use the closed forms of the untruncated Gaussian; the
  mass beyond the cut is about 1e-15 of the total.
* ``smooth-bump``: ``exp(1 + 1/(u**2 - 1))`` for ``|u| < 1``, exactly zero
  outside.  Transforms are evaluated with a fixed high-order Gauss-Legendre
  rule whose nodes and profile samples are built once and shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import erf, exp1

from .geometry import Event, SupportRegion

GAUSSIAN_WINDOW = 8.0


class ProfileKind(str, Enum):
    TRUNCATED_GAUSSIAN = "truncated-gaussian"
    SMOOTH_BUMP = "smooth-bump"


class GaussianShape:
    window = GAUSSIAN_WINDOW
    kind = ProfileKind.TRUNCATED_GAUSSIAN

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= self.window, np.exp(-0.5 * u * u), 0.0)

    def temporal_transform(self, w):
        """``int chi(u) exp(i w u) du`` (real by symmetry)."""
        w = np.asarray(w, dtype=float)
        return math.sqrt(2 * math.pi) * np.exp(-0.5 * w * w)

    def radial_transform(self, q):
        """``int F(|y|) exp(-i q.y) d^3y`` as a function of ``|q|``."""
        q = np.asarray(q, dtype=float)
        return (2 * math.pi) ** 1.5 * np.exp(-0.5 * q * q)

    def first_moment(self, a):
        """``int_0^a u F(u) du``."""
        a = np.asarray(a, dtype=float)
        return -np.expm1(-0.5 * a * a)

    def second_antiderivative(self, a):
        """``int_0^a first_moment``, for ``a >= 0``."""
        a = np.asarray(a, dtype=float)
        return a - math.sqrt(math.pi / 2) * erf(a / math.sqrt(2))


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(1.0 + 1.0 / (ui * ui - 1.0))
    return out


def _h(w):
    # Antiderivative of exp(-w)/w**2 in w.
    return exp1(w) - np.exp(-w) / w


@lru_cache(maxsize=None)
def _legendre_on_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    w = 0.5 * w
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


@lru_cache(maxsize=None)
def _bump_transform_rule(n: int):
    u, w = _legendre_on_unit(n)
    w_chi = 2.0 * w * _bump(u)
    w_rad = 4.0 * math.pi * w * u * u * _bump(u)
    w_chi.setflags(write=False)
    w_rad.setflags(write=False)
    return u, w_chi, w_rad


class BumpShape:
    """Smooth compactly supported bump with unit peak and unit radius."""

    window = 1.0
    kind = ProfileKind.SMOOTH_BUMP
    moment_nodes = 96
    base_nodes = 512

    def __init__(self):
        # Built eagerly so later reads never touch shared mutable state.
        _bump_transform_rule(self.base_nodes)
        self._phi_one = float(-0.5 * math.e * _h(1.0))
        self._psi_one = float(self._phi_one - self._second_moment(np.array(1.0)))

    @staticmethod
    def nodes_for(max_frequency: float) -> int:
        """Rule size resolving ``cos(w u)`` on [0, 1] to rounding for ``w <= max_frequency``."""
        need = int(1.2 * max_frequency) + 128
        return max(BumpShape.base_nodes, 256 * -(-need // 256))

    def value(self, u):
        return _bump(u)

    def _transform(self, which, kernel, w):
        w = np.abs(np.asarray(w, dtype=float))
        flat = w.reshape(-1)
        n = self.nodes_for(flat.max()) if flat.size else self.base_nodes
        u, w_chi, w_rad = _bump_transform_rule(n)
        weights = w_chi if which == "chi" else w_rad
        out = np.empty(flat.size)
        step = max(1, 2**21 // n)
        for start in range(0, flat.size, step):
            chunk = flat[start:start + step]
            out[start:start + step] = kernel(np.outer(chunk, u)) @ weights
        return out.reshape(w.shape)

    def temporal_transform(self, w):
        return self._transform("chi", np.cos, w)

    def radial_transform(self, q):
        return self._transform("rad", lambda z: np.sinc(z / math.pi), q)

    def first_moment(self, a):
        a = np.minimum(np.asarray(a, dtype=float), 1.0)
        out = np.full(a.shape, self._phi_one)
        inner = a < 1.0
        ai = a[inner]
        out[inner] = 0.5 * math.e * (_h(1.0 / (1.0 - ai * ai)) - _h(1.0))
        return out

    def _second_moment(self, a):
        # int_0^a u^2 F(u) du on a fixed Gauss-Legendre rule scaled to [0, a].
        u, w = _legendre_on_unit(self.moment_nodes)
        nodes = a[..., None] * u
        return a * ((nodes * nodes * _bump(nodes)) @ w)

    def second_antiderivative(self, a):
        a = np.asarray(a, dtype=float)
        clipped = np.minimum(a, 1.0)
        inside = clipped * self.first_moment(clipped) - self._second_moment(clipped)
        return np.where(a > 1.0, self._psi_one + self._phi_one * (a - 1.0), inside)


@lru_cache(maxsize=None)
def shape_for(kind: ProfileKind):
    if ProfileKind(kind) is ProfileKind.TRUNCATED_GAUSSIAN:
        return GaussianShape()
    return BumpShape()


@dataclass(frozen=True)
class DetectorSpec:
    """A detector at rest: where, when, how long, how strongly, how wide."""

    label: str
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    switch_center: float = 0.0
    switch_timescale: float = 1.0
    coupling: float = 1.0
    spatial_width: float = 1.0
    profile_kind: ProfileKind = ProfileKind.TRUNCATED_GAUSSIAN

    def __post_init__(self):
        if self.label not in ("A", "B"):
            raise ValueError(f"label must be 'A' or 'B', got {self.label!r}")
        position = tuple(float(c) for c in self.position)
        if len(position) != 3:
            raise ValueError("position must have 3 components")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "profile_kind", ProfileKind(self.profile_kind))
        for name in ("switch_center", "switch_timescale", "coupling", "spatial_width"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not all(math.isfinite(c) for c in position):
            raise ValueError("position must be finite")
        if self.switch_timescale <= 0:
            raise ValueError(f"switch_timescale must be > 0, got {self.switch_timescale}")
        if self.spatial_width <= 0:
            raise ValueError(f"spatial_width must be > 0, got {self.spatial_width}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling}")

    def with_coupling(self, coupling: float) -> "DetectorSpec":
        return replace(self, coupling=coupling)


@dataclass(frozen=True)
class TestFunction:
    """Smearing function of one detector; immutable once built."""

    __test__ = False  # keep pytest from collecting this class

    spec: DetectorSpec
    support: SupportRegion
    normalization: str = "unit-peak"
    shape: GaussianShape | BumpShape = field(default=None, repr=False, compare=False)

    @property
    def coupling(self) -> float:
        return self.spec.coupling

    @property
    def tau(self) -> float:
        return self.spec.switch_timescale

    @property
    def sigma(self) -> float:
        return self.spec.spatial_width

    @property
    def t0(self) -> float:
        return self.spec.switch_center

    @property
    def position(self) -> np.ndarray:
        return np.array(self.spec.position)

    @property
    def temporal_halfwidth(self) -> float:
        return self.support.temporal_halfwidth

    @property
    def radius(self) -> float:
        return self.support.spatial_radius

    def temporal(self, t):
        """``chi((t - t0)/tau)`` without the coupling."""
        return self.shape.value((np.asarray(t, dtype=float) - self.t0) / self.tau)

    def radial(self, rho):
        """``F(rho/sigma)`` where rho is the distance from the detector."""
        return self.shape.value(np.asarray(rho, dtype=float) / self.sigma)

    def shell_moment(self, s):
        """``int_0^s r F(r/sigma) dr`` for ``s >= 0``."""
        s = np.asarray(s, dtype=float)
        return self.sigma ** 2 * self.shape.first_moment(s / self.sigma)

    def shell_moment_antiderivative(self, s):
        """Odd extension of ``int_0^s shell_moment``."""
        s = np.asarray(s, dtype=float)
        return np.sign(s) * self.sigma ** 3 * self.shape.second_antiderivative(np.abs(s) / self.sigma)

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        rho = np.linalg.norm(x - self.position, axis=-1)
        return self.coupling * self.temporal(t) * self.radial(rho)


def build_test_function(spec: DetectorSpec) -> TestFunction:
    if spec.switch_timescale <= 0 or spec.spatial_width <= 0:
        raise ValueError("switch_timescale and spatial_width must be positive")
    shape = shape_for(spec.profile_kind)
    support = SupportRegion(
        center=Event(spec.switch_center, spec.position),
        temporal_halfwidth=shape.window * spec.switch_timescale,
        spatial_radius=shape.window * spec.spatial_width,
    )
    return TestFunction(spec=spec, support=support, shape=shape)


def evaluate(f: TestFunction, e: Event) -> float:
    return float(f(e.t, e.x))


def fourier_transform(f: TestFunction, k0, k) -> complex | np.ndarray:
    """``int f(t, x) exp(i(k0 t - k.x)) dt d^3x``.

    ``k0`` may be an array of shape ``(n,)`` with ``k`` of shape ``(n, 3)``.
    """
    k0 = np.asarray(k0, dtype=float)
    k = np.asarray(k, dtype=float)
    kmag = np.linalg.norm(k, axis=-1)
    phase = np.exp(1j * (k0 * f.t0 - k @ f.position))
    amplitude = (f.coupling * f.tau * f.sigma ** 3
                 * f.shape.temporal_transform(k0 * f.tau)
                 * f.shape.radial_transform(kmag * f.sigma))
    out = amplitude * phase
    return complex(out) if out.ndim == 0 else out
