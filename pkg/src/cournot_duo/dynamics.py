"""One-step maps of the five models, orbit iteration and the GR reduction.

Firm 1 always moves by ``q1 + K * G1(q1, q2)``.  Firm 2 follows the model:

    GR  q2' = R2(q1')                (reacts to firm 1's *new* output)
    GB  q2' = R2(q1)
    GL  q2' = S2(q2, q1)             (LMA response)
    GA  q2' = (1 - L) q2 + L R2(q1)
    GG  q2' = q2 + K2 * G2(q2, q1)

Any non-positive or non-finite output ends an orbit (escape); nothing is
clamped back into the domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _jit
from ._jit import njit
from .responses import (
    DEFAULT_OPTIONS,
    ESCAPED,
    NO_CONVERGENCE,
    OK,
    ResponseOptions,
    best_response_k,
    best_response_vec,
    gradient_k,
    gradient_vec,
    lma_k,
    lma_vec,
)
from .types import ConvergenceError, DomainError, EscapeError, Model, ModelSpec, State

GR, GB, GL, GA, GG = 0, 1, 2, 3, 4

DEFAULT_TRANSIENT = 1000
DEFAULT_STEPS = 5000


@njit
def _bad(x):
    return not (x > 0.0) or not math.isfinite(x)


@njit(inline="never")
def firm1_k(lin, c1, K, q1, q2):
    # kept out of line so the planar and reduced GR maps round identically
    return q1 + K * gradient_k(lin, c1, q1, q2)


@njit
def step_k(model, lin, c1, c2, K, K2, L, q1, q2, tol, max_iter, growth):
    """Returns ``(q1', q2', status)``."""
    n1 = firm1_k(lin, c1, K, q1, q2)
    if _bad(n1):
        return n1, q2, ESCAPED
    if model == GR:
        n2, st = best_response_k(lin, c2, n1, tol, max_iter, growth)
    elif model == GB:
        n2, st = best_response_k(lin, c2, q1, tol, max_iter, growth)
    elif model == GL:
        n2 = lma_k(lin, c2, q2, q1)
        st = OK
    elif model == GA:
        r2, st = best_response_k(lin, c2, q1, tol, max_iter, growth)
        n2 = (1.0 - L) * q2 + L * r2
    else:
        n2 = q2 + K2 * gradient_k(lin, c2, q2, q1)
        st = OK
    if st != OK:
        return n1, n2, st
    if _bad(n2):
        return n1, n2, ESCAPED
    return n1, n2, OK


@njit
def gr_reduced_step_k(lin, c1, c2, K, q1, tol, max_iter, growth):
    r2, st = best_response_k(lin, c2, q1, tol, max_iter, growth)
    if st != OK:
        return q1, st
    n1 = firm1_k(lin, c1, K, q1, r2)
    if _bad(n1):
        return n1, ESCAPED
    return n1, OK


@njit
def orbit_k(model, lin, c1, c2, K, K2, L, q1, q2, n_steps, transient, tol, max_iter, growth, out):
    """Iterate ``n_steps`` times, writing states for t = transient..n_steps
    into ``out``.  Returns ``(n_written, escape_t, status)`` with
    ``escape_t = -1`` when the orbit stays feasible."""
    w = 0
    if transient == 0:
        out[0, 0] = q1
        out[0, 1] = q2
        w = 1
    for t in range(1, n_steps + 1):
        q1, q2, st = step_k(model, lin, c1, c2, K, K2, L, q1, q2, tol, max_iter, growth)
        if st != OK:
            return w, t, st
        if t >= transient:
            out[w, 0] = q1
            out[w, 1] = q2
            w += 1
    return w, -1, OK


@njit
def orbit_tails_k(model, lin, P, S0, n_steps, keep, tol, max_iter, growth, tails, escaped):
    """Batch of orbits, keeping the last ``keep`` states of each (NaN when
    the orbit escaped)."""
    buf = np.empty((keep, 2))
    for i in range(P.shape[0]):
        w, esc, st = orbit_k(
            model, lin, P[i, 0], P[i, 1], P[i, 2], P[i, 3], P[i, 4],
            S0[i, 0], S0[i, 1], n_steps, n_steps - keep + 1, tol, max_iter, growth, buf,
        )
        if esc >= 0:
            escaped[i] = True
            tails[i, :, :] = np.nan
        else:
            escaped[i] = False
            tails[i, :, :] = buf
    return 0


def step_vec(model, lin, P, q1, q2, opts=DEFAULT_OPTIONS):
    """Numpy fallback of :func:`step_k` over arrays of states/parameters.
    Returns ``(q1', q2', ok_mask)``."""
    c1, c2, K, K2, L = P.T
    with np.errstate(all="ignore"):
        n1 = q1 + K * gradient_vec(lin, c1, q1, q2)
        conv = np.ones(n1.shape, bool)
        if model == GR:
            n2, conv = best_response_vec(lin, c2, n1, opts.newton_tol, opts.max_iter, opts.bracket_growth)
        elif model == GB:
            n2, conv = best_response_vec(lin, c2, q1, opts.newton_tol, opts.max_iter, opts.bracket_growth)
        elif model == GL:
            n2 = lma_vec(lin, c2, q2, q1)
        elif model == GA:
            r2, conv = best_response_vec(lin, c2, q1, opts.newton_tol, opts.max_iter, opts.bracket_growth)
            n2 = (1.0 - L) * q2 + L * r2
        else:
            n2 = q2 + K2 * gradient_vec(lin, c2, q2, q1)
    ok = (n1 > 0) & np.isfinite(n1) & (n2 > 0) & np.isfinite(n2) & conv
    return n1, n2, ok


def orbit_tails_vec(model, lin, P, S0, n_steps, keep, opts=DEFAULT_OPTIONS):
    """Numpy fallback of :func:`orbit_tails_k`: all orbits advance in lockstep."""
    n = P.shape[0]
    q1 = S0[:, 0].astype(float).copy()
    q2 = S0[:, 1].astype(float).copy()
    alive = np.ones(n, bool)
    tails = np.full((n, keep, 2), np.nan)
    first_kept = n_steps - keep + 1
    for t in range(1, n_steps + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        n1, n2, ok = step_vec(model, lin, P[idx], q1[idx], q2[idx], opts)
        alive[idx[~ok]] = False
        q1[idx] = n1
        q2[idx] = n2
        if t >= first_kept:
            tails[idx[ok], t - first_kept, 0] = n1[ok]
            tails[idx[ok], t - first_kept, 1] = n2[ok]
    tails[~alive] = np.nan
    return tails, ~alive


def orbit_tails(model, lin, P, S0, n_steps, keep, opts=DEFAULT_OPTIONS):
    """Dispatch to the numba or numpy batch-orbit kernel."""
    P = np.ascontiguousarray(P, dtype=float)
    S0 = np.ascontiguousarray(S0, dtype=float)
    if keep < 1 or keep > n_steps:
        raise ValueError("keep must lie in [1, n_steps]")
    if _jit.USE_NUMBA:
        tails = np.empty((P.shape[0], keep, 2))
        escaped = np.zeros(P.shape[0], dtype=np.bool_)
        orbit_tails_k(model, bool(lin), P, S0, int(n_steps), int(keep),
                      opts.newton_tol, opts.max_iter, opts.bracket_growth, tails, escaped)
        return tails, escaped
    return orbit_tails_vec(model, bool(lin), P, S0, n_steps, keep, opts)


# ---------------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class Orbit:
    """States recorded from time ``t0`` on; ``states[k]`` is the state at
    ``t0 + k``.  ``escape_index`` is the step that left the feasible set."""

    states: np.ndarray
    t0: int
    escaped: bool
    escape_index: Optional[int] = None

    def __len__(self):
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t0, self.t0 + len(self))

    def last(self) -> State:
        return State(*self.states[-1])


def _check_state(s: State):
    if not (math.isfinite(s.q1) and math.isfinite(s.q2)):
        raise DomainError("state must be finite")
    if s.q1 < 0 or s.q2 < 0 or not s.q1 + s.q2 > 0:
        raise DomainError("state must be non-negative with positive total output")


def _unpack(spec: ModelSpec):
    p = spec.params()
    return spec.model.code, spec.linear, p[0], p[1], p[2], p[3], p[4]


def step(spec: ModelSpec, s: State, opts: ResponseOptions = DEFAULT_OPTIONS) -> State:
    _check_state(s)
    model, lin, c1, c2, K, K2, L = _unpack(spec)
    n1, n2, st = step_k(model, lin, c1, c2, K, K2, L, s.q1, s.q2,
                        opts.newton_tol, opts.max_iter, opts.bracket_growth)
    if st == NO_CONVERGENCE:
        raise ConvergenceError("best response did not converge inside step")
    if st == ESCAPED:
        raise EscapeError(f"infeasible output after one step: ({n1!r}, {n2!r})", index=1)
    return State(n1, n2)


def gr_reduced_step(c1, c2, K, q1, opts: ResponseOptions = DEFAULT_OPTIONS, lin=False) -> float:
    """GR written as a map of q1 alone: ``q1 + K * G1(q1, R2(q1))``."""
    if not q1 > 0:
        raise DomainError("q1 must be positive")
    n1, st = gr_reduced_step_k(bool(lin), float(c1), float(c2), float(K), float(q1),
                               opts.newton_tol, opts.max_iter, opts.bracket_growth)
    if st == NO_CONVERGENCE:
        raise ConvergenceError("best response did not converge inside step")
    if st == ESCAPED:
        raise EscapeError(f"infeasible output {n1!r}", index=1)
    return n1


def orbit(spec: ModelSpec, s0: State, n_steps: int = DEFAULT_STEPS, transient: int = DEFAULT_TRANSIENT,
          opts: ResponseOptions = DEFAULT_OPTIONS) -> Orbit:
    if not 0 <= transient <= n_steps:
        raise ValueError("need n_steps >= transient >= 0")
    _check_state(s0)
    model, lin, c1, c2, K, K2, L = _unpack(spec)
    out = np.empty((n_steps - transient + 1, 2))
    w, esc, st = orbit_k(model, lin, c1, c2, K, K2, L, s0.q1, s0.q2, int(n_steps), int(transient),
                         opts.newton_tol, opts.max_iter, opts.bracket_growth, out)
    if st == NO_CONVERGENCE:
        raise ConvergenceError("best response did not converge during orbit")
    escaped = esc >= 0
    return Orbit(out[:w].copy(), transient, escaped, int(esc) if escaped else None)


def model_code(model) -> int:
    return Model.parse(model).code
