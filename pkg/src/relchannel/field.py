"""Smeared Pauli-Jordan pairing, vacuum Wightman norm and nu_B.

Two independent routes compute the pairing ``Delta(f_a, f_b)``:

* momentum space, from the vacuum two-point function,
  ``Delta = -2 Im int d^3k / ((2 pi)^3 2|k|) conj(fa^(|k|, k)) fb^(|k|, k)``;
* position space, ``Delta = int fa(x) (E fb)(x) d^4x`` with the causal
  propagator applied by direct convolution.

Both are reduced analytically using that detectors are at rest and
spherically symmetric.  The convention is fixed by
``[phi(f1), phi(f2)] = -i Delta(f1, f2)``; ``E = A - R`` with ``A`` and ``R``
the advanced and retarded solutions of ``(-d_t^2 + lap) phi = f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Event
from .profiles import ProfileKind, TestFunction
from .quadrature import (
    DEFAULT_ABS_TOL,
    DEFAULT_MAX_EVALUATIONS,
    DEFAULT_REL_TOL,
    QuadratureBudgetError,
    QuadratureResult,
    _Budget,
    adaptive_integrate,
)

# Momentum cut-off in units of the narrowest profile scale.
K_MAX_FACTOR = 40.0
# Below this fraction of the profile width the detectors count as co-located.
_COLOCATED = 1e-6


class Route(str, Enum):
    MOMENTUM = "momentum"
    POSITION = "position"
    BOTH = "both"


@dataclass(frozen=True)
class FieldPairing:
    delta_AB: float
    delta_error: float
    wightman_BB: float
    wightman_error: float
    nu_B: float
    nu_error: float
    route: Route
    delta_momentum: float | None = None
    delta_position: float | None = None
    delta_momentum_error: float | None = None
    delta_position_error: float | None = None

    def __post_init__(self):
        if self.wightman_BB < 0:
            raise ValueError("wightman_BB must be non-negative")
        if not 0 < self.nu_B <= 1:
            raise ValueError("nu_B must lie in (0, 1]")

    @property
    def route_discrepancy(self) -> float | None:
        if self.delta_momentum is None or self.delta_position is None:
            return None
        return abs(self.delta_momentum - self.delta_position)


def k_max(*fs: TestFunction) -> float:
    """Momentum cut-off ``40 / min(tau, sigma)`` over the given profiles.

    Beyond it each Gaussian factor is below ``exp(-800)``; each bump factor
    is below about 1e-4 of its peak, and every integrand carries four such
    factors.
    """
    return K_MAX_FACTOR / min(min(f.tau, f.sigma) for f in fs)


def _spectrum(f: TestFunction, k):
    """``|fhat(|k|, k)|`` for an at-rest profile, without the phase."""
    return (f.coupling * f.tau * f.sigma ** 3
            * f.shape.temporal_transform(k * f.tau)
            * f.shape.radial_transform(k * f.sigma))


def _oscillation_panels(kmax: float, frequency: float) -> list[float]:
    n = int(min(4000, math.ceil(kmax * frequency / (2 * math.pi)) + 1))
    return list(np.linspace(0.0, kmax, n + 1)[1:-1])


def pairing_momentum(
    fa: TestFunction,
    fb: TestFunction,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> QuadratureResult:
    """Pairing from the vacuum two-point function as a 1-D radial integral.

    After the angular integral,
    ``Delta = -1/(2 pi^2) int k |fa^||fb^| sinc(k d) sin(k (t_b - t_a)) dk``.
    """
    d = float(np.linalg.norm(fb.position - fa.position))
    dt = fb.t0 - fa.t0
    kmax = k_max(fa, fb)

    def integrand(k):
        return (-1.0 / (2 * math.pi ** 2)) * k * _spectrum(fa, k) * _spectrum(fb, k) \
            * np.sinc(k * d / math.pi) * np.sin(k * dt)

    return adaptive_integrate(integrand, 0.0, kmax, rel_tol, abs_tol, max_evaluations,
                              breakpoints=_oscillation_panels(kmax, abs(dt) + d))


def wightman_norm(
    fb: TestFunction,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> QuadratureResult:
    """Vacuum two-point norm ``int d^3k / ((2 pi)^3 2|k|) |fb^(|k|, k)|^2``."""
    kmax = k_max(fb)

    def integrand(k):
        return k * _spectrum(fb, k) ** 2 / (4 * math.pi ** 2)

    res = adaptive_integrate(integrand, 0.0, kmax, rel_tol, abs_tol, max_evaluations,
                             breakpoints=_oscillation_panels(kmax, 4.0))
    return QuadratureResult(max(res.value, 0.0), res.error_estimate, res.evaluations)


def nu_from_norm(W: float) -> float:
    """``nu_B = exp(-2 W)``: the quasi-free expectation of the Weyl operator for ``2 f_B``."""
    if W < 0:
        raise ValueError(f"Wightman norm must be non-negative, got {W}")
    return math.exp(-2.0 * W)


# -- position space --------------------------------------------------------

def _shell_kernel(f: TestFunction, r, rho):
    """``int_{|r-rho|}^{r+rho} s F(s) ds``: spatial profile averaged over a sphere."""
    return f.shell_moment(r + rho) - f.shell_moment(np.abs(r - rho))


def _propagate(f: TestFunction, t: float, rho: float, rel_tol, abs_tol, max_evaluations):
    R = f.radius
    H = f.temporal_halfwidth
    colocated = rho < _COLOCATED * f.sigma
    budget = _Budget(max_evaluations)

    if colocated:
        def kernel(r):
            return r * f.radial(r)
        r_min, r_max = 0.0, R
    else:
        def kernel(r):
            return _shell_kernel(f, r, rho) / (2.0 * rho)
        r_min, r_max = max(0.0, rho - R), rho + R

    total = 0.0
    error = 0.0
    # Retarded source time t - r, advanced source time t + r.
    for sign, centre in ((+1.0, t - f.t0), (-1.0, f.t0 - t)):
        lo = max(r_min, centre - H)
        hi = min(r_max, centre + H)
        if not lo < hi:
            continue

        def integrand(r, sign=sign):
            return sign * f.temporal(t - sign * r) * kernel(r)

        res = adaptive_integrate(integrand, lo, hi, rel_tol, abs_tol / max(f.coupling, 1e-300),
                                 budget=budget)
        total += res.value
        error += res.error_estimate
    return QuadratureResult(f.coupling * total, f.coupling * error, max(budget.used, 1))


def propagate_E_result(
    f: TestFunction,
    e: Event,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> QuadratureResult:
    """``(E f)(e)`` with its quadrature error."""
    rho = float(np.linalg.norm(np.asarray(e.x) - f.position))
    return _propagate(f, e.t, rho, rel_tol, abs_tol, max_evaluations)


def propagate_E(f: TestFunction, e: Event, rel_tol: float = DEFAULT_REL_TOL,
                abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """Advanced-minus-retarded solution sourced by ``f``, evaluated at ``e``.

    ``(E f)(t, x) = 1/(4 pi) int d^3y [f(t - |x-y|, y) - f(t + |x-y|, y)] / |x-y|``.
    The angular part of the spherical integral around ``x`` is done
    analytically, leaving one radial integral per light-cone branch.
    """
    return propagate_E_result(f, e, rel_tol, abs_tol).value


def _both_gaussian(fa, fb):
    return (fa.spec.profile_kind is ProfileKind.TRUNCATED_GAUSSIAN
            and fb.spec.profile_kind is ProfileKind.TRUNCATED_GAUSSIAN)


def _temporal_overlap(fa, fb, s, rel_tol, abs_tol, budget):
    """``C(s) = int chi_a(t) chi_b(t - s) dt`` for an array of shifts ``s``."""
    if _both_gaussian(fa, fb):
        var = fa.tau ** 2 + fb.tau ** 2
        value = (math.sqrt(2 * math.pi) * fa.tau * fb.tau / math.sqrt(var)
                 * np.exp(-((fa.t0 - fb.t0 - s) ** 2) / (2 * var)))
        return value, np.zeros_like(value)

    Ha, Hb = fa.temporal_halfwidth, fb.temporal_halfwidth
    lo = np.maximum(fa.t0 - Ha, fb.t0 + s - Hb)
    width = np.maximum(np.minimum(fa.t0 + Ha, fb.t0 + s + Hb) - lo, 0.0)

    def integrand(u):
        t = lo[None, :] + width[None, :] * u[:, None]
        return width[None, :] * fa.temporal(t) * fb.temporal(t - s[None, :])

    res = adaptive_integrate(integrand, 0.0, 1.0, rel_tol, abs_tol, budget=budget)
    return np.atleast_1d(res.value), np.atleast_1d(res.error_estimate)


def _spatial_overlap(fa, fb, r, d, rel_tol, abs_tol, budget):
    """Spatial part of the pairing as a function of the light-cone radius ``r``.

    For separated centres this is ``int q F_a(q) J(r; q, d) dq`` with
    ``J = int_{|q-d|}^{q+d} [Phi_b(r+rho) - Phi_b(|r-rho|)] drho`` in closed
    form through the antiderivative of ``Phi_b``.  Co-located centres use the
    ``d -> 0`` limit ``int q F_a(q) [Phi_b(r+q) - Phi_b(|r-q|)] dq``.
    """
    Ra, Rb = fa.radius, fb.radius
    psi = fb.shell_moment_antiderivative
    if d is None:
        lo = np.maximum(0.0, r - Rb)
        hi = np.minimum(Ra, r + Rb)

        def kernel(q, rr):
            return _shell_kernel(fb, rr, q)
    else:
        lo = np.maximum(0.0, np.abs(r - d) - Rb)
        hi = np.minimum(Ra, d + r + Rb)

        def kernel(q, rr):
            alpha = np.abs(q - d)
            beta = q + d
            return (psi(rr + beta) - psi(rr + alpha)) - (psi(beta - rr) - psi(alpha - rr))

    width = np.maximum(hi - lo, 0.0)

    def integrand(u):
        q = lo[None, :] + width[None, :] * u[:, None]
        return width[None, :] * q * fa.radial(q) * kernel(q, r[None, :])

    res = adaptive_integrate(integrand, 0.0, 1.0, rel_tol, abs_tol, budget=budget)
    return np.atleast_1d(res.value), np.atleast_1d(res.error_estimate)


def pairing_position(
    fa: TestFunction,
    fb: TestFunction,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> QuadratureResult:
    """Pairing ``int fa(x) (E fb)(x) d^4x`` by direct space-time quadrature.

    The 7-dimensional integral (4 over Alice's support, 3 inside ``E``) is
    reduced with the spherical symmetry of both profiles to
    ``lambda_a lambda_b (pi/d) int_0^inf T(r) S(r) dr``, where ``r`` is the
    light-cone radius, ``T`` is the retarded-minus-advanced overlap of the
    switching functions and ``S`` the overlap of the spatial profiles on
    spheres of radius ``r``.  Outside the causal overlap of the supports the
    integrand vanishes identically, so strictly spacelike bump supports give
    exactly zero.
    """
    budget = _Budget(max_evaluations)
    d = float(np.linalg.norm(fb.position - fa.position))
    if d < _COLOCATED * min(fa.sigma, fb.sigma):
        d_arg = None
        prefactor = 2 * math.pi * fa.coupling * fb.coupling
        r_lo_s, r_hi_s = 0.0, fa.radius + fb.radius
    else:
        d_arg = d
        prefactor = math.pi * fa.coupling * fb.coupling / d
        r_lo_s, r_hi_s = max(0.0, d - fa.radius - fb.radius), d + fa.radius + fb.radius

    dt = abs(fb.t0 - fa.t0)
    H = fa.temporal_halfwidth + fb.temporal_halfwidth
    r_lo = max(r_lo_s, dt - H, 0.0)
    r_hi = min(r_hi_s, dt + H)
    if prefactor == 0.0 or not r_lo < r_hi:
        return QuadratureResult(0.0, 0.0, 1)

    atol = abs_tol / abs(prefactor)
    length = r_hi - r_lo
    t_scale = min(fa.tau * fa.shape.temporal_transform(0.0), fb.tau * fb.shape.temporal_transform(0.0))
    inner_rel = 0.1 * rel_tol

    def integrand(r):
        s_val, s_err = _spatial_overlap(fa, fb, r, d_arg, inner_rel,
                                        atol / (10 * length * t_scale), budget)
        with np.errstate(divide="ignore"):
            t_atol = np.where(s_val != 0, atol / (10 * length * np.abs(s_val)), np.inf)
        c_val, c_err = _temporal_overlap(fa, fb, np.concatenate([r, -r]), inner_rel,
                                         np.concatenate([t_atol, t_atol]), budget)
        n = r.size
        t_val = c_val[:n] - c_val[n:]
        t_err = c_err[:n] + c_err[n:]
        return np.stack([t_val * s_val, np.abs(t_val) * s_err + t_err * np.abs(s_val)], axis=-1)

    inner = [p for p in (dt, d) if r_lo < p < r_hi]
    res = adaptive_integrate(integrand, r_lo, r_hi, rel_tol, np.array([atol, np.inf]),
                             budget=budget, breakpoints=inner)
    value, propagated = res.value
    error = res.error_estimate[0] + abs(propagated)
    return QuadratureResult(prefactor * value, abs(prefactor) * error, max(budget.used, 1))


def _staged(stage, fn, *args):
    try:
        return fn(*args)
    except QuadratureBudgetError as exc:
        exc.stage = exc.stage or stage
        raise


def compute_pairing(
    fa: TestFunction,
    fb: TestFunction,
    route: Route | str = Route.MOMENTUM,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> FieldPairing:
    """Everything the capacity formula needs from the field.

    With ``route="both"`` the momentum value is reported as ``delta_AB`` and
    the position value alongside it.
    """
    route = Route(route)
    mom = pos = None
    if route in (Route.MOMENTUM, Route.BOTH):
        mom = _staged("momentum pairing", pairing_momentum, fa, fb, rel_tol, abs_tol, max_evaluations)
    if route in (Route.POSITION, Route.BOTH):
        pos = _staged("position pairing", pairing_position, fa, fb, rel_tol, abs_tol, max_evaluations)
    primary = mom if mom is not None else pos

    w = _staged("wightman norm", wightman_norm, fb, rel_tol, abs_tol, max_evaluations)
    nu = nu_from_norm(w.value)
    return FieldPairing(
        delta_AB=float(primary.value),
        delta_error=float(primary.error_estimate),
        wightman_BB=float(w.value),
        wightman_error=float(w.error_estimate),
        nu_B=nu,
        nu_error=2.0 * nu * float(w.error_estimate),
        route=route,
        delta_momentum=None if mom is None else float(mom.value),
        delta_position=None if pos is None else float(pos.value),
        delta_momentum_error=None if mom is None else float(mom.error_estimate),
        delta_position_error=None if pos is None else float(pos.error_estimate),
    )
