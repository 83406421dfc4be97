"""Adaptive quadrature with error estimates.

The workhorse is a globally adaptive Gauss-Kronrod (10/21 point) rule that
accepts vectorised integrands, including vector-valued ones.  Vector-valued
integration shares one panel subdivision across all components, which is what
makes the iterated multi-dimensional integrator and the nested integrals in
:mod:`relchannel.field` cheap in pure numpy.

Integrands are called with a 1-D array of abscissae and must return an array
whose leading axis matches it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_REL_TOL = 1e-6
DEFAULT_ABS_TOL = 1e-10
DEFAULT_MAX_EVALUATIONS = 10**7

# Kronrod 21-point abscissae on [0, 1] (symmetric) and weights, with the
# embedded 10-point Gauss weights for the odd-indexed abscissae.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067547067,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full 21-point node set on [-1, 1] and matching weight vectors.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[1:10:2] = _WG
GAUSS_WEIGHTS[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps
_SPLIT_CAP = 64


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value with its estimated absolute error.

    ``value`` and ``error_estimate`` are arrays for vector-valued integrands.
    """

    value: float | complex | np.ndarray
    error_estimate: float | np.ndarray
    evaluations: int

    def __post_init__(self):
        if np.any(np.asarray(self.error_estimate) < 0):
            raise ValueError("error_estimate must be non-negative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be >= 1")


class QuadratureBudgetError(RuntimeError):
    """Raised when the evaluation budget runs out before convergence.

    The best available result is attached as ``result``.  ``stage`` is filled
    in by callers that want to report which computation failed.
    """

    def __init__(self, message: str, result: QuadratureResult | None = None, stage: str | None = None):
        super().__init__(message)
        self.result = result
        self.stage = stage


class _Budget:
    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0

    def charge(self, n: int) -> bool:
        if self.used + n > self.limit:
            return False
        self.used += n
        return True


def _scalarise(x):
    x = np.asarray(x)
    if x.ndim == 0:
        return x.item()
    return x


def _panel_rules(f, a, b, budget, charge):
    """Apply the K21/G10 pair to panels [a_i, b_i]; return (K, |K-G|, K|f|)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    if charge and budget.used + x.size > budget.limit:
        return None
    fx = np.asarray(f(x))
    if fx.shape[0] != x.size:
        raise ValueError("integrand must return one value per abscissa")
    if charge and not budget.charge(fx.size):
        return None
    fx = fx.reshape((a.size, 21) + fx.shape[1:])
    scale = half.reshape((-1,) + (1,) * (fx.ndim - 2))
    kron = scale * np.tensordot(KRONROD_WEIGHTS, fx, axes=(0, 1))
    gauss = scale * np.tensordot(GAUSS_WEIGHTS, fx, axes=(0, 1))
    resabs = np.abs(scale) * np.tensordot(KRONROD_WEIGHTS, np.abs(fx), axes=(0, 1))
    return kron, np.abs(kron - gauss), resabs


def adaptive_integrate(
    integrand: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol=DEFAULT_REL_TOL,
    abs_tol=DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
    breakpoints: Sequence[float] = (),
    budget: _Budget | None = None,
    charge: bool = True,
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod integration of a vectorised integrand.

    ``rel_tol`` and ``abs_tol`` may be arrays broadcasting against the
    integrand's trailing shape, giving per-component targets; an ``abs_tol``
    of ``inf`` excludes a component from the convergence test.  Panels are
    bisected worst-first in a fixed order, so results are bit-reproducible.
    A shared ``budget`` lets nested integrations draw on one evaluation
    allowance; ``charge=False`` skips counting for levels whose integrand
    only wraps further integrations.
    """
    if budget is None:
        budget = _Budget(max_evaluations)
    a, b = float(a), float(b)
    edges = [a] + sorted(p for p in set(map(float, breakpoints)) if a < p < b) + [b]
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])

    rules = _panel_rules(integrand, lo, hi, budget, charge)
    if rules is None:
        raise QuadratureBudgetError(
            f"evaluation budget {budget.limit} too small for initial panels")
    val, err, resabs = rules
    if not np.all(np.isfinite(val)):
        raise ValueError("integrand returned non-finite values")
    rel_tol = np.asarray(rel_tol, dtype=float)
    abs_tol = np.asarray(abs_tol, dtype=float)

    while True:
        total = val.sum(axis=0)
        total_err = err.sum(axis=0)
        roundoff = 50.0 * _EPS * resabs.sum(axis=0)
        target = np.maximum(np.maximum(rel_tol * np.abs(total), abs_tol), roundoff)
        if np.all(total_err <= target):
            break

        # Normalised per-panel error, worst component first.
        norm = err / np.where(np.isfinite(target), target, np.inf)
        norm = norm.reshape(norm.shape[0], -1).max(axis=1) if norm.ndim > 1 else norm
        order = np.argsort(-norm, kind="stable")
        worst = norm[order[0]]
        pick = order[norm[order] >= 0.25 * worst][:_SPLIT_CAP]
        width = hi[pick] - lo[pick]
        pick = pick[np.abs(width) > 4 * _EPS * np.maximum(np.abs(lo[pick]), np.abs(hi[pick]))]
        result = QuadratureResult(_scalarise(total), _scalarise(total_err), max(budget.used, 1))
        if pick.size == 0:
            raise QuadratureBudgetError("panels cannot be subdivided further", result)

        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        rules = _panel_rules(integrand, new_lo, new_hi, budget, charge)
        if rules is None:
            raise QuadratureBudgetError(
                f"evaluation budget of {budget.limit} exhausted", result)
        keep = np.ones(lo.size, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], rules[0]])
        err = np.concatenate([err[keep], rules[1]])
        resabs = np.concatenate([resabs[keep], rules[2]])

    return QuadratureResult(_scalarise(total), _scalarise(total_err), max(budget.used, 1))


def integrate_1d(
    integrand: Callable,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
    breakpoints: Sequence[float] = (),
) -> QuadratureResult:
    """Integrate ``integrand`` over ``[a, b]``.

    Stops once the estimated error is at most ``max(rel_tol*|value|, abs_tol)``.

    >>> integrate_1d(lambda u: u**2, 0.0, 1.0).value  # doctest: +ELLIPSIS
    0.33333333333333...
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    return adaptive_integrate(integrand, a, b, rel_tol, abs_tol, max_evaluations, breakpoints)


def integrate_nd(
    integrand: Callable[[np.ndarray], np.ndarray],
    box: Sequence[tuple[float, float]],
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> QuadratureResult:
    """Iterated adaptive integration over a box of up to 7 dimensions.

    ``integrand`` maps an ``(n, dim)`` array of points to ``n`` values.  Each
    inner integral is done for a whole batch of outer abscissae at once, and
    its error estimate is integrated alongside its value so the reported
    error covers every level.
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    dim = len(box)
    if not 1 <= dim <= 7:
        raise ValueError(f"dimension must be between 1 and 7, got {dim}")
    for lo, hi in box:
        if not lo < hi:
            raise ValueError(f"degenerate box side ({lo}, {hi})")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")

    budget = _Budget(max_evaluations)
    widths = [hi - lo for lo, hi in box]

    def level(k: int, prefix: np.ndarray):
        lo, hi = box[k]
        m = prefix.shape[0]
        outer = float(np.prod(widths[:k])) if k else 1.0
        atol = abs_tol / outer

        if k == dim - 1:
            def inner(x):
                if not budget.charge(x.size * m):
                    raise QuadratureBudgetError(
                        f"evaluation budget of {budget.limit} exhausted in dimension {k}")
                pts = np.concatenate(
                    [np.repeat(prefix[None, :, :], x.size, axis=0),
                     np.broadcast_to(x[:, None, None], (x.size, m, 1))], axis=2)
                return np.asarray(integrand(pts.reshape(-1, dim))).reshape(x.size, m)

            res = adaptive_integrate(inner, lo, hi, rel_tol, atol, budget=budget, charge=False)
            return np.atleast_1d(res.value), np.atleast_1d(res.error_estimate)

        def inner(x):
            pts = np.concatenate(
                [np.repeat(prefix[None, :, :], x.size, axis=0),
                 np.broadcast_to(x[:, None, None], (x.size, m, 1))], axis=2)
            v, e = level(k + 1, pts.reshape(-1, k + 1))
            return np.stack([v.reshape(x.size, m), e.reshape(x.size, m)], axis=-1)

        atols = np.broadcast_to(np.array([atol, np.inf]), (m, 2))
        res = adaptive_integrate(inner, lo, hi, rel_tol, atols, budget=budget, charge=False)
        v = np.atleast_2d(res.value)
        e = np.atleast_2d(res.error_estimate)
        return v[:, 0], e[:, 0] + np.abs(v[:, 1])

    value, error = level(0, np.empty((1, 0)))
    return QuadratureResult(_scalarise(value[0]), float(error[0]), max(budget.used, 1))


def monte_carlo(
    integrand: Callable[[np.ndarray], np.ndarray],
    box: Sequence[tuple[float, float]],
    samples: int = 100_000,
    seed: int = 0,
    batch: int = 200_000,
) -> QuadratureResult:
    """Plain Monte-Carlo estimate of a box integral with its standard error."""
    if samples < 1000:
        raise ValueError("monte_carlo needs at least 1000 samples")
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    volume = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)

    # Shifted sums keep a constant integrand exact with zero variance.
    shift = None
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        pts = lo + (hi - lo) * rng.random((n, lo.size))
        fx = np.asarray(integrand(pts))
        if shift is None:
            shift = fx[0]
        dev = fx - shift
        total = total + dev.sum()
        total_sq = total_sq + (np.abs(dev) ** 2).sum()
        done += n

    mean_dev = total / samples
    mean = shift + mean_dev
    var = max(total_sq / samples - abs(mean_dev) ** 2, 0.0)
    return QuadratureResult(volume * mean, volume * np.sqrt(var / samples), samples)
