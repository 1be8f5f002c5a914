"""Linearisation, Jury tests and the criterion polynomials.

The Jacobian is analytic: partials of the gradient term by direct
differentiation, the slope of the reaction function by implicit
differentiation of its first-order condition, and the LMA partials directly.
GR is analysed through its one-dimensional reduction ``q1 -> q1 + K G1(q1,
R2(q1))``; its derivative is stored in ``a11`` with the other entries zero.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _jit
from ._jit import njit
from .equilibrium import equilibrium_point
from .polynomials import CRITERIA_FOR, POLYNOMIALS, STABLE_SIGN
from .responses import (
    DEFAULT_OPTIONS,
    OK,
    ResponseOptions,
    best_response_k,
    best_response_slope_k,
    gradient_partials_k,
    lma_partials_k,
)
from .types import (
    CLASS_CODES,
    ConvergenceError,
    DomainError,
    Model,
    ModelSpec,
    StabilityClass,
    StabilityVerdict,
)

BOUNDARY_TOL = 1e-9
AGREEMENT_BAND = 1e-7

GR, GB, GL, GA, GG = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class Jacobian2:
    a11: float
    a12: float
    a21: float
    a22: float

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])


@dataclass(frozen=True)
class CriterionSet:
    names: tuple[str, ...]
    values: tuple[float, ...]
    normalized: tuple[float, ...]
    stable: bool

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


class Agreement(enum.Enum):
    AGREE = "agree"
    DISAGREE = "disagree"
    NEAR_BOUNDARY = "near_boundary"


AGREEMENT_CODES = {Agreement.AGREE: 0, Agreement.DISAGREE: 1, Agreement.NEAR_BOUNDARY: 2}


# ---------------------------------------------------------------------------
# kernels


@njit
def jacobian_given_k(model, lin, c1, c2, K, K2, L, q1, q2, r2):
    """Jacobian of the step at (q1, q2) given ``r2 = R2(q1)``; ``r2`` is
    ignored by GL and GG."""
    if model == GR:
        g_self, g_rival = gradient_partials_k(lin, c1, q1, r2)
        slope = best_response_slope_k(lin, c2, r2, q1)
        return 1.0 + K * (g_self + g_rival * slope), 0.0, 0.0, 0.0
    g_self, g_rival = gradient_partials_k(lin, c1, q1, q2)
    a11 = 1.0 + K * g_self
    a12 = K * g_rival
    if model == GB:
        return a11, a12, best_response_slope_k(lin, c2, r2, q1), 0.0
    if model == GA:
        return a11, a12, L * best_response_slope_k(lin, c2, r2, q1), 1.0 - L
    if model == GL:
        s_self, s_rival = lma_partials_k(lin, c2, q2, q1)
        return a11, a12, s_rival, s_self
    h_self, h_rival = gradient_partials_k(lin, c2, q2, q1)
    return a11, a12, K2 * h_rival, 1.0 + K2 * h_self


@njit
def jacobian_k(model, lin, c1, c2, K, K2, L, q1, q2, tol, max_iter, growth):
    r2 = q2
    if model == GR or model == GB or model == GA:
        r2, st = best_response_k(lin, c2, q1, tol, max_iter, growth)
        if st != OK:
            return np.nan, np.nan, np.nan, np.nan, st
    a11, a12, a21, a22 = jacobian_given_k(model, lin, c1, c2, K, K2, L, q1, q2, r2)
    return a11, a12, a21, a22, OK


@njit
def spectral_radius_k(tr, det):
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return max(abs(0.5 * (tr + s)), abs(0.5 * (tr - s)))
    # complex pair: |lambda|^2 = det
    return math.sqrt(det)


@njit
def jury_k(a11, a12, a21, a22):
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    scale = 1.0 + abs(tr) + abs(det)
    return 1.0 + tr + det, 1.0 - tr + det, 1.0 - det, scale, spectral_radius_k(tr, det)


@njit
def classify_k(j1, j2, j3, scale, tol):
    if not (math.isfinite(j1) and math.isfinite(j2) and math.isfinite(j3)):
        return 3
    n1 = j1 / scale
    n2 = j2 / scale
    n3 = j3 / scale
    # a clearly violated inequality outranks one sitting on the boundary
    if n1 < -tol or n2 < -tol or n3 < -tol:
        return 1
    if n1 <= tol or n2 <= tol or n3 <= tol:
        return 2
    return 0


@njit
def equilibrium_jury_k(model, lin, P, out):
    """Jury values at the closed-form equilibrium for each parameter row.
    ``out`` columns: j1, j2, j3, scale, rho."""
    for i in range(P.shape[0]):
        c1 = P[i, 0]
        c2 = P[i, 1]
        if lin:
            s = c1 + c2
            q1 = c2 / (s * s)
            q2 = c1 / (s * s)
        else:
            s1 = math.sqrt(c1)
            s2 = math.sqrt(c2)
            f = 1.0 / ((s1 + s2) * math.sqrt(2.0 * math.sqrt(c1 * c2)))
            q1 = s2 * f
            q2 = s1 * f
        a11, a12, a21, a22 = jacobian_given_k(model, lin, c1, c2, P[i, 2], P[i, 3], P[i, 4], q1, q2, q2)
        j1, j2, j3, scale, rho = jury_k(a11, a12, a21, a22)
        out[i, 0] = j1
        out[i, 1] = j2
        out[i, 2] = j3
        out[i, 3] = scale
        out[i, 4] = rho
    return 0


def _gradient_partials_vec(lin, c, q, r):
    Q = q + r
    Q3 = Q ** 3
    own = r * (r - q) / Q3 - (c if lin else 4.0 * c * q)
    return own, q * (q - r) / Q3


def _br_slope_vec(lin, c, q_self, r):
    if lin:
        return np.where(q_self > 0, 1.0 / (2.0 * np.sqrt(c * r)) - 1.0, 0.0)
    Q = q_self + r
    return (1.0 - 4.0 * c * q_self * Q) / (2.0 * c * Q * (Q + 2.0 * q_self))


def _lma_partials_vec(lin, c, q, r):
    Q = q + r
    if lin:
        interior = 2.0 * q + r - c * Q * Q > 0
        return np.where(interior, 1.0 - c * Q, 0.0), np.where(interior, 0.5 - c * Q, 0.0)
    D = 1.0 + c * Q * Q
    common = (2.0 * q + r) * c * Q / (D * D)
    return 1.0 / D - common, 0.5 / D - common


def jacobian_at_equilibrium_vec(model, lin, P):
    """Numpy Jacobians at the closed-form equilibrium, shape ``(n, 4)``."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    c1, c2, K, K2, L = P.T
    q1, q2 = equilibrium_point(lin, c1, c2)
    zero = np.zeros_like(c1)
    with np.errstate(all="ignore"):
        g_self, g_rival = _gradient_partials_vec(lin, c1, q1, q2)
        if model == GR:
            a11 = 1.0 + K * (g_self + g_rival * _br_slope_vec(lin, c2, q2, q1))
            return np.stack([a11, zero, zero, zero], axis=1)
        a11 = 1.0 + K * g_self
        a12 = K * g_rival
        if model == GB:
            a21, a22 = _br_slope_vec(lin, c2, q2, q1), zero
        elif model == GA:
            a21, a22 = L * _br_slope_vec(lin, c2, q2, q1), 1.0 - L
        elif model == GL:
            s_self, s_rival = _lma_partials_vec(lin, c2, q2, q1)
            a21, a22 = s_rival, s_self
        else:
            h_self, h_rival = _gradient_partials_vec(lin, c2, q2, q1)
            a21, a22 = K2 * h_rival, 1.0 + K2 * h_self
    return np.stack([a11, a12, a21, a22], axis=1)


def jury_vec(J):
    a11, a12, a21, a22 = J.T
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    scale = 1.0 + np.abs(tr) + np.abs(det)
    with np.errstate(invalid="ignore"):
        disc = tr * tr - 4.0 * det
        s = np.sqrt(np.maximum(disc, 0.0))
        real_rho = np.maximum(np.abs(0.5 * (tr + s)), np.abs(0.5 * (tr - s)))
        rho = np.where(disc >= 0.0, real_rho, np.sqrt(np.abs(det)))
    return np.stack([1.0 + tr + det, 1.0 - tr + det, 1.0 - det, scale, rho], axis=1)


def classify_vec(out, tol=BOUNDARY_TOL):
    norm = out[:, :3] / out[:, 3:4]
    finite = np.isfinite(out[:, :3]).all(axis=1)
    violated = (norm < -tol).any(axis=1)
    boundary = (norm <= tol).any(axis=1)
    codes = np.where(violated, 1, np.where(boundary, 2, 0))
    return np.where(finite, codes, 3)


def equilibrium_jury(model, lin, P):
    """Backend dispatch: ``(n, 5)`` array of (j1, j2, j3, scale, rho) at E."""
    P = np.ascontiguousarray(np.atleast_2d(P), dtype=float)
    if _jit.USE_NUMBA:
        out = np.empty((P.shape[0], 5))
        equilibrium_jury_k(model, bool(lin), P, out)
        return out
    return jury_vec(jacobian_at_equilibrium_vec(model, bool(lin), P))


# ---------------------------------------------------------------------------
# criteria (vectorised over parameter rows)


def criterion_names(model, cost_kind) -> tuple[str, ...]:
    return CRITERIA_FOR[(Model.parse(model).value, getattr(cost_kind, "value", cost_kind))]


def evaluate_criteria(model, lin, P):
    """Returns ``(names, values (n,k), normalized (n,k), stable (n,))``."""
    names = criterion_names(model, "linear" if lin else "quadratic")
    P = np.atleast_2d(np.asarray(P, dtype=float))
    values = np.empty((P.shape[0], len(names)))
    normalized = np.empty_like(values)
    stable = np.ones(P.shape[0], bool)
    for k, name in enumerate(names):
        v, scale = POLYNOMIALS[name].value_and_scale(P)
        values[:, k] = v
        with np.errstate(invalid="ignore", divide="ignore"):
            normalized[:, k] = v / scale
        stable &= (v > 0) if STABLE_SIGN[name] > 0 else (v < 0)
    return names, values, normalized, stable


def agreement_codes(model, lin, P, band=AGREEMENT_BAND):
    """Vectorised agreement between the criterion verdict and the Jury
    verdict at E.  Returns codes per :data:`AGREEMENT_CODES`."""
    _, _, normalized, crit_stable = evaluate_criteria(model, lin, P)
    jury = equilibrium_jury(model, lin, P)
    jnorm = jury[:, :3] / jury[:, 3:4]
    num_stable = (jnorm > 0).all(axis=1)
    near = (np.abs(normalized) <= band).any(axis=1) | (np.abs(jnorm) <= band).any(axis=1)
    codes = np.where(crit_stable == num_stable, 0, 1)
    return np.where(near, 2, codes)


# ---------------------------------------------------------------------------
# public API


def jacobian(spec: ModelSpec, s, opts: ResponseOptions = DEFAULT_OPTIONS) -> Jacobian2:
    """Exact linearisation of :func:`~cournot_duo.dynamics.step` at ``s``.

    For GR this is the derivative of the reduced map at ``s.q1`` (``s.q2`` is
    not used), embedded as ``a11``.
    """
    if not (s.q1 > 0 and s.q2 > 0):
        raise DomainError("jacobian needs a strictly positive state")
    p = spec.params()
    a11, a12, a21, a22, st = jacobian_k(spec.model.code, spec.linear, p[0], p[1], p[2], p[3], p[4],
                                        s.q1, s.q2, opts.newton_tol, opts.max_iter, opts.bracket_growth)
    if st != OK:
        raise ConvergenceError("best response did not converge inside jacobian")
    return Jacobian2(a11, a12, a21, a22)


def spectral_radius(J: Jacobian2) -> float:
    return spectral_radius_k(J.trace, J.det)


def jury(J: Jacobian2, boundary_tol: float = BOUNDARY_TOL, criterion_values=()) -> StabilityVerdict:
    """Classify a 2x2 Jacobian by the three Jury inequalities
    ``1 + Tr + Det > 0``, ``1 - Tr + Det > 0``, ``1 - Det > 0``.

    Values are divided by ``1 + |Tr| + |Det|`` before comparison.  Any value
    below ``-boundary_tol`` makes the verdict unstable; otherwise any value
    within the band makes it a boundary case.
    """
    j1, j2, j3, scale, rho = jury_k(J.a11, J.a12, J.a21, J.a22)
    code = classify_k(j1, j2, j3, scale, boundary_tol)
    cls = {0: StabilityClass.STABLE, 1: StabilityClass.UNSTABLE,
           2: StabilityClass.BOUNDARY, 3: StabilityClass.INFEASIBLE}[code]
    return StabilityVerdict(cls, (j1, j2, j3), rho, tuple(criterion_values))


def criteria(spec: ModelSpec) -> CriterionSet:
    names, values, normalized, stable = evaluate_criteria(spec.model, spec.linear, spec.params())
    return CriterionSet(names, tuple(float(v) for v in values[0]),
                        tuple(float(v) for v in normalized[0]), bool(stable[0]))


def equilibrium_verdict(spec: ModelSpec, boundary_tol: float = BOUNDARY_TOL) -> StabilityVerdict:
    """Jury verdict at the closed-form equilibrium, with the criterion values
    attached."""
    J = jacobian_at_equilibrium_vec(spec.model.code, spec.linear, spec.params())[0]
    crit = criteria(spec)
    return jury(Jacobian2(*J), boundary_tol, tuple(zip(crit.names, crit.values)))


def border_poly_gr(c1, c2, K) -> dict[str, float]:
    """Factor values of the squarefree border polynomial of the GR system."""
    return {
        "c1": c1,
        "c2": c2,
        "K": K,
        "c1-c2": c1 - c2,
        "c1+c2": c1 + c2,
        "c1-c2/9": c1 - c2 / 9,
        "quartic": (c1 ** 3 * c2 * K ** 4 - 1.5 * c1 ** 2 * c2 * K ** 2
                    - 81 / 64 * c1 ** 2 + 9 / 32 * c1 * c2 - c2 ** 2 / 64),
    }


def agreement(spec: ModelSpec, band: float = AGREEMENT_BAND) -> Agreement:
    code = int(agreement_codes(spec.model.code, spec.linear, spec.params(), band)[0])
    return {0: Agreement.AGREE, 1: Agreement.DISAGREE, 2: Agreement.NEAR_BOUNDARY}[code]


def class_code(cls: StabilityClass) -> int:
    return CLASS_CODES[cls]
