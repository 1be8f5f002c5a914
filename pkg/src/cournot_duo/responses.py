"""Per-firm behavioural primitives under isoelastic demand p = 1/Q.

Each primitive exists as a scalar kernel (``*_k``; compiled by numba unless
disabled) taking ``lin`` (0 quadratic cost c*q**2, 1 linear cost c*q) and the
coefficient ``c``, plus a thin public wrapper taking a :class:`CostSide`.
``*_vec`` variants are the numpy fallbacks operating on arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .types import ConvergenceError, CostSide, DomainError

CBRT2 = 2.0 ** (1.0 / 3.0)
CBRT4 = 4.0 ** (1.0 / 3.0)
SQRT3 = math.sqrt(3.0)

# status codes shared with the dynamics kernels
OK = 0
ESCAPED = 1
NO_CONVERGENCE = 2


@dataclass(frozen=True)
class ResponseOptions:
    newton_tol: float = 1e-12
    max_iter: int = 200
    bracket_growth: float = 2.0

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must exceed 1")


DEFAULT_OPTIONS = ResponseOptions()


# ---------------------------------------------------------------------------
# scalar kernels


@njit
def profit_k(lin, c, q, r):
    Q = q + r
    if lin:
        return q / Q - c * q
    return q / Q - c * q * q


@njit
def foc_k(lin, c, q, r):
    Q = q + r
    if lin:
        return r / (Q * Q) - c
    return r - 2.0 * c * q * Q * Q


@njit
def marginal_profit_k(lin, c, q, r):
    Q = q + r
    if lin:
        return r / (Q * Q) - c
    return r / (Q * Q) - 2.0 * c * q


@njit
def gradient_k(lin, c, q, r):
    return q * marginal_profit_k(lin, c, q, r)


@njit
def real_cbrt(x):
    if x < 0.0:
        return -((-x) ** (1.0 / 3.0))
    return x ** (1.0 / 3.0)


@njit
def br_quad_closed_k(c, r):
    """Unique positive root of r - 2 c q (q + r)**2 = 0 via Cardano."""
    cr2 = c * r * r
    M = real_cbrt(c * c * r * (4.0 * cr2 + 3.0 * SQRT3 * math.sqrt(8.0 * cr2 + 27.0) + 27.0))
    return CBRT2 * M / (6.0 * c) + CBRT4 * cr2 / (3.0 * M) - 2.0 * r / 3.0


@njit
def br_quad_newton_k(c, r, x0, tol, max_iter, growth):
    """Bracketed Newton on the quadratic-cost FOC, bisecting whenever a
    Newton step leaves the bracket.  Returns ``(root, status)``."""
    target = tol * (1.0 + r)
    lo = 0.0
    hi = max(r, 1.0 / math.sqrt(2.0 * c))
    n_grow = 0
    while r - 2.0 * c * hi * (hi + r) * (hi + r) >= 0.0:
        hi *= growth
        n_grow += 1
        if n_grow > 2000:
            return hi, NO_CONVERGENCE
    x = x0
    if not (x > lo and x < hi):
        x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        Q = x + r
        f = r - 2.0 * c * x * Q * Q
        df = -2.0 * c * Q * (3.0 * x + r)
        if abs(f) <= target:
            # one more Newton step takes the root to working precision
            xn = x - f / df
            if xn > lo and xn < hi:
                return xn, OK
            return x, OK
        if f > 0.0:
            lo = x
        else:
            hi = x
        xn = x - f / df
        if not (xn > lo and xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x:
            return x, OK
        x = xn
    return x, NO_CONVERGENCE


@njit
def best_response_k(lin, c, r, tol, max_iter, growth):
    if lin:
        return max(0.0, math.sqrt(r / c) - r), OK
    x0 = br_quad_closed_k(c, r)
    return br_quad_newton_k(c, r, x0, tol, max_iter, growth)


@njit
def best_response_slope_k(lin, c, q_self, r):
    """dR/dr at the point (q_self = R(r), r).

    Quadratic: implicit differentiation of r - 2c q Q**2 = 0.
    """
    if lin:
        if q_self <= 0.0:
            return 0.0
        return 1.0 / (2.0 * math.sqrt(c * r)) - 1.0
    Q = q_self + r
    return (1.0 - 4.0 * c * q_self * Q) / (2.0 * c * Q * (Q + 2.0 * q_self))


@njit
def lma_k(lin, c, q, r):
    Q = q + r
    if lin:
        return max(0.0, 0.5 * (2.0 * q + r - c * Q * Q))
    return (2.0 * q + r) / (2.0 * (1.0 + c * Q * Q))


@njit
def lma_partials_k(lin, c, q, r):
    """(dS/dq_self, dS/dq_rival) of the LMA response."""
    Q = q + r
    if lin:
        if 2.0 * q + r - c * Q * Q <= 0.0:
            return 0.0, 0.0
        return 1.0 - c * Q, 0.5 - c * Q
    D = 1.0 + c * Q * Q
    common = (2.0 * q + r) * c * Q / (D * D)
    return 1.0 / D - common, 0.5 / D - common


@njit
def gradient_partials_k(lin, c, q, r):
    """(dG/dq_self, dG/dq_rival) of q * marginal profit."""
    Q = q + r
    Q3 = Q * Q * Q
    if lin:
        d_self = r * (r - q) / Q3 - c
    else:
        d_self = r * (r - q) / Q3 - 4.0 * c * q
    return d_self, q * (q - r) / Q3


# ---------------------------------------------------------------------------
# numpy fallbacks (array arguments, broadcasting)


def best_response_vec(lin, c, r, tol=1e-12, max_iter=200, growth=2.0):
    """Vectorised best response; returns ``(root, converged_mask)``."""
    c = np.asarray(c, dtype=float)
    r = np.asarray(r, dtype=float)
    c, r = np.broadcast_arrays(c, r)
    if lin:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.maximum(0.0, np.sqrt(r / c) - r), np.ones(r.shape, bool)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        cr2 = c * r * r
        M = np.cbrt(c * c * r * (4.0 * cr2 + 3.0 * SQRT3 * np.sqrt(8.0 * cr2 + 27.0) + 27.0))
        x = CBRT2 * M / (6.0 * c) + CBRT4 * cr2 / (3.0 * M) - 2.0 * r / 3.0
        target = tol * (1.0 + r)
        lo = np.zeros_like(r)
        hi = np.maximum(r, 1.0 / np.sqrt(2.0 * c))
        for _ in range(2000):
            grow = r - 2.0 * c * hi * (hi + r) ** 2 >= 0.0
            if not grow.any():
                break
            hi = np.where(grow, hi * growth, hi)
        x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))
        done = np.zeros(r.shape, bool)
        for _ in range(max_iter):
            Q = x + r
            f = r - 2.0 * c * x * Q * Q
            xn = x - f / (-2.0 * c * Q * (3.0 * x + r))
            inside = (xn > lo) & (xn < hi)
            newly = ~done & (np.abs(f) <= target)
            x = np.where(newly & inside, xn, x)
            done |= newly
            if done.all():
                break
            lo = np.where(~done & (f > 0.0), x, lo)
            hi = np.where(~done & (f <= 0.0), x, hi)
            xn = np.where(inside, xn, 0.5 * (lo + hi))
            done |= ~done & (xn == x)
            x = np.where(done, x, xn)
    return x, done


def gradient_vec(lin, c, q, r):
    Q = q + r
    if lin:
        return q * (r / (Q * Q) - c)
    return q * (r / (Q * Q) - 2.0 * c * q)


def lma_vec(lin, c, q, r):
    Q = q + r
    if lin:
        return np.maximum(0.0, 0.5 * (2.0 * q + r - c * Q * Q))
    return (2.0 * q + r) / (2.0 * (1.0 + c * Q * Q))


# ---------------------------------------------------------------------------
# public API


def _require_total(q_self, q_rival):
    if not (q_self + q_rival > 0):
        raise DomainError("total output q_self + q_rival must be positive")
    if q_self < 0 or q_rival < 0:
        raise DomainError("outputs must be non-negative")


def profit(cost: CostSide, q_self: float, q_rival: float) -> float:
    """Realised profit q/Q - C(q) at price 1/Q."""
    _require_total(q_self, q_rival)
    return profit_k(cost.linear, cost.c, float(q_self), float(q_rival))


def foc_residual(cost: CostSide, q_self: float, q_rival: float) -> float:
    """Left-hand side of the first-order condition.

    Quadratic cost uses the polynomial form ``q_rival - 2c q_self Q**2``;
    linear cost uses ``q_rival / Q**2 - c``.
    """
    _require_total(q_self, q_rival)
    return foc_k(cost.linear, cost.c, float(q_self), float(q_rival))


def best_response_closed_form(c: float, q_rival: float) -> float:
    """Cardano closed form for quadratic cost, without Newton polishing."""
    if not q_rival > 0:
        raise DomainError("best response needs q_rival > 0")
    return br_quad_closed_k(float(c), float(q_rival))


def best_response(cost: CostSide, q_rival: float, opts: ResponseOptions = DEFAULT_OPTIONS) -> float:
    """Profit-maximising output against a known rival output.

    For quadratic cost the closed form is polished by bracketed Newton so that
    ``|foc_residual| <= newton_tol * (1 + q_rival)``.  For linear cost the
    interior solution ``sqrt(q_rival / c) - q_rival`` is clamped at 0.
    """
    if not q_rival > 0:
        raise DomainError("best response needs q_rival > 0")
    x, status = best_response_k(
        cost.linear, cost.c, float(q_rival), opts.newton_tol, opts.max_iter, opts.bracket_growth
    )
    if status != OK:
        raise ConvergenceError(f"best response did not converge (c={cost.c}, q_rival={q_rival})")
    return x


def lma_response(cost: CostSide, q_self: float, q_rival: float) -> float:
    """Next output of a player using a local monopolistic approximation of
    demand around the current (price, total output) point."""
    _require_total(q_self, q_rival)
    return lma_k(cost.linear, cost.c, float(q_self), float(q_rival))


def gradient_term(cost: CostSide, q_self: float, q_rival: float) -> float:
    """Own output times marginal profit."""
    _require_total(q_self, q_rival)
    return gradient_k(cost.linear, cost.c, float(q_self), float(q_rival))
