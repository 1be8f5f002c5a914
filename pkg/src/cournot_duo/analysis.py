"""Parameter sweeps, bifurcation scans, Lyapunov exponents and the
linear-versus-quadratic containment probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._jit import njit
from .dynamics import gr_reduced_step_k, orbit, orbit_tails, step_k
from .equilibrium import equilibrium_point, nash_equilibrium
from .parallel import map_rows
from .polynomials import STABLE_SIGN
from .responses import DEFAULT_OPTIONS, OK, ResponseOptions, best_response_k
from .stability import (
    AGREEMENT_BAND,
    BOUNDARY_TOL,
    classify_vec,
    criterion_names,
    equilibrium_jury,
    evaluate_criteria,
    jacobian_given_k,
)
from .types import (
    PARAM_INDEX,
    Axis,
    EscapeError,
    Model,
    ModelSpec,
    SpecError,
    State,
    SweepGrid,
    applicable_params,
    make_spec,
)

SWEEP_MODES = ("criterion", "numeric", "both")
DISAGREEMENT_BAND = 1e-6


def _feasible_rows(model: Model, P: np.ndarray) -> np.ndarray:
    ok = (P[:, 0] > 0) & (P[:, 1] > 0) & (P[:, 2] > 0) & np.isfinite(P).all(axis=1)
    if model is Model.GG:
        ok &= P[:, 3] > 0
    if model is Model.GA:
        ok &= (P[:, 4] > 0) & (P[:, 4] < 1)
    return ok


def _check_axis(template: ModelSpec, axis: Axis):
    if not axis.applies_to(template.model):
        raise SpecError(f"axis {axis.name} does not apply to model {template.model.name}")


# ---------------------------------------------------------------------------
# sweeps


def sweep2d(template: ModelSpec, x_axis: Axis, y_axis: Axis, mode: str = "both", threads=None) -> SweepGrid:
    """Local-stability verdicts at the closed-form equilibrium over a 2-D
    parameter slice.  Parameters not on an axis come from ``template``.

    ``mode`` selects which verdict fills ``classes``: the criterion
    polynomials, the Jury test, or (``both``) the Jury test with criterion
    disagreements recorded.  Cells outside the parameter domain are
    Infeasible.
    """
    if mode not in SWEEP_MODES:
        raise SpecError(f"mode must be one of {SWEEP_MODES}")
    if set(x_axis.columns) & set(y_axis.columns):
        raise SpecError("sweep axes must be distinct")
    _check_axis(template, x_axis)
    _check_axis(template, y_axis)
    model, lin = template.model, template.linear
    xs, ys = x_axis.values(), y_axis.values()
    X, Y = np.meshgrid(xs, ys)
    P = np.tile(template.params(), (X.size, 1))
    P[:, x_axis.columns] = X.reshape(-1, 1)
    P[:, y_axis.columns] = Y.reshape(-1, 1)
    if model is Model.GG and 3 not in x_axis.columns + y_axis.columns and template.K2 is None:
        raise SpecError("K2 is required for model GG")

    feasible = _feasible_rows(model, P)

    def evaluate(block):
        jury = equilibrium_jury(model.code, lin, block)
        _, values, normalized, crit_stable = evaluate_criteria(model, lin, block)
        return jury, values, normalized, crit_stable

    jury, values, normalized, crit_stable = map_rows(evaluate, P, threads)
    num_codes = classify_vec(jury, BOUNDARY_TOL)
    names = criterion_names(model, template.cost_kind)
    signed = normalized * np.array([STABLE_SIGN[n] for n in names])
    crit_codes = np.where((signed < -BOUNDARY_TOL).any(axis=1), 1,
                          np.where((signed <= BOUNDARY_TOL).any(axis=1), 2, 0))
    codes = crit_codes if mode == "criterion" else num_codes
    codes = np.where(feasible, codes, 3)
    if mode == "both":
        jnorm = jury[:, :3] / jury[:, 3:4]
        num_stable = (jnorm > 0).all(axis=1)
        disagree = feasible & (num_stable != crit_stable)
    else:
        disagree = np.zeros(P.shape[0], bool)
    shape = (y_axis.n, x_axis.n)
    return SweepGrid(
        template, x_axis, y_axis, mode,
        classes=codes.reshape(shape).astype(np.int8),
        jury=jury[:, :3].reshape(shape + (3,)),
        rho=jury[:, 4].reshape(shape),
        crit_primary=values[:, 0].reshape(shape),
        disagreements=disagree.reshape(shape),
    )


def sweep_margins(grid: SweepGrid) -> np.ndarray:
    """Smallest normalized |criterion| or |Jury| value per cell."""
    model, lin = grid.template.model, grid.template.linear
    ny, nx = grid.shape
    X, Y = np.meshgrid(grid.x_axis.values(), grid.y_axis.values())
    P = np.tile(grid.template.params(), (X.size, 1))
    P[:, grid.x_axis.columns] = X.reshape(-1, 1)
    P[:, grid.y_axis.columns] = Y.reshape(-1, 1)
    _, _, normalized, _ = evaluate_criteria(model, lin, P)
    jury = equilibrium_jury(model.code, lin, P)
    jnorm = np.abs(jury[:, :3] / jury[:, 3:4])
    return np.minimum(np.abs(normalized).min(axis=1), jnorm.min(axis=1)).reshape(ny, nx)


# ---------------------------------------------------------------------------
# bifurcation


@dataclass(frozen=True)
class BifurcationScan:
    param_name: str
    coordinate: str
    values: np.ndarray
    samples: list = field(repr=False)  # one array per value; empty if escaped

    def rows(self):
        for v, s in zip(self.values, self.samples):
            for x in s:
                yield v, x

    def spread(self) -> np.ndarray:
        """Max minus min of the retained samples (NaN where escaped)."""
        return np.array([np.ptp(s) if len(s) else np.nan for s in self.samples])


def bifurcation(template: ModelSpec, param_name: str, lo: float, hi: float, n_points: int,
                coordinate: str = "q1", transient: int = 1000, n_steps: int = 5000, keep: int = 100,
                start_scale: float = 0.9, threads=None,
                opts: ResponseOptions = DEFAULT_OPTIONS) -> BifurcationScan:
    """Post-transient orbit samples of one coordinate across a parameter
    range.  Each orbit starts from ``start_scale`` times that parameter's
    equilibrium."""
    axis = Axis(param_name, lo, hi, n_points)
    _check_axis(template, axis)
    if coordinate not in ("q1", "q2"):
        raise SpecError("coordinate must be q1 or q2")
    keep = min(keep, n_steps - transient) if n_steps > transient else keep
    if keep < 1:
        raise SpecError("nothing retained: need n_steps > transient")
    values = axis.values()
    P = np.tile(template.params(), (n_points, 1))
    P[:, axis.columns] = values[:, None]
    if not _feasible_rows(template.model, P).all():
        raise SpecError("bifurcation range leaves the parameter domain")
    q1, q2 = equilibrium_point(template.linear, P[:, 0], P[:, 1])
    S0 = np.column_stack([q1, q2]) * start_scale
    code, lin = template.model.code, template.linear

    def run(block):
        return orbit_tails(code, lin, block[:, :5], block[:, 5:], n_steps, keep, opts)

    tails, escaped = map_rows(run, np.hstack([P, S0]), threads, min_chunk=8)
    col = 0 if coordinate == "q1" else 1
    samples = [np.empty(0) if escaped[i] else tails[i, :, col].copy() for i in range(n_points)]
    return BifurcationScan(axis.name, coordinate, values, samples)


def flip_point(scan: BifurcationScan, split_tol: float = 1e-4) -> Optional[float]:
    """First parameter value whose retained samples spread by more than
    ``split_tol``."""
    spread = scan.spread()
    hits = np.flatnonzero(np.nan_to_num(spread, nan=np.inf) > split_tol)
    return float(scan.values[hits[0]]) if hits.size else None


# ---------------------------------------------------------------------------
# Lyapunov exponent


@njit
def lyapunov_k(model, lin, c1, c2, K, K2, L, q1, q2, n, tol, max_iter, growth):
    """Returns ``(mean log growth, steps done, status)``; status 1 = escape,
    2 = solver failure, 3 = tangent collapsed to zero."""
    v1 = 0.8
    v2 = 0.6
    total = 0.0
    if model == 0:
        # GR: one-dimensional reduction in q1
        for t in range(n):
            r2, st = best_response_k(lin, c2, q1, tol, max_iter, growth)
            if st != OK:
                return total / max(t, 1), t, st
            d, _, _, _ = jacobian_given_k(model, lin, c1, c2, K, K2, L, q1, r2, r2)
            if d == 0.0:
                return -np.inf, t, 3
            total += math.log(abs(d))
            q1, st = gr_reduced_step_k(lin, c1, c2, K, q1, tol, max_iter, growth)
            if st != OK:
                return total / (t + 1), t + 1, st
        return total / n, n, OK
    for t in range(n):
        r2 = q2
        if model == 1 or model == 3:
            r2, st = best_response_k(lin, c2, q1, tol, max_iter, growth)
            if st != OK:
                return total / max(t, 1), t, st
        a11, a12, a21, a22 = jacobian_given_k(model, lin, c1, c2, K, K2, L, q1, q2, r2)
        w1 = a11 * v1 + a12 * v2
        w2 = a21 * v1 + a22 * v2
        norm = math.sqrt(w1 * w1 + w2 * w2)
        if norm == 0.0:
            return -np.inf, t, 3
        total += math.log(norm)
        v1 = w1 / norm
        v2 = w2 / norm
        q1, q2, st = step_k(model, lin, c1, c2, K, K2, L, q1, q2, tol, max_iter, growth)
        if st != OK:
            return total / (t + 1), t + 1, st
    return total / n, n, OK


def lyapunov(spec: ModelSpec, s0: State, n: int = 10000, transient: int = 0,
             opts: ResponseOptions = DEFAULT_OPTIONS) -> float:
    """Largest Lyapunov exponent from a tangent vector propagated by the
    analytic Jacobian and renormalised every step.  GR uses its reduced map."""
    if transient:
        o = orbit(spec, s0, transient, transient, opts)
        if o.escaped:
            raise EscapeError("orbit escaped during the transient", index=o.escape_index)
        s0 = o.last()
    p = spec.params()
    value, steps, status = lyapunov_k(spec.model.code, spec.linear, p[0], p[1], p[2], p[3], p[4],
                                      s0.q1, s0.q2, int(n), opts.newton_tol, opts.max_iter,
                                      opts.bracket_growth)
    if status == 1:
        raise EscapeError("orbit escaped while estimating the Lyapunov exponent", index=steps)
    if status == 2:
        raise RuntimeError("best response did not converge")
    return float(value)


# ---------------------------------------------------------------------------
# containment probes

DEFAULT_BOXES = {
    "c1": (0.0, 20.0),
    "c2": (0.0, 20.0),
    "K": (0.0, 5.0),
    "K2": (0.0, 5.0),
    "L": (0.0, 1.0),
}


@dataclass(frozen=True)
class ContainmentReport:
    """Result of probing whether linear-cost stability implies quadratic-cost
    stability.  A violation is a parameter point that is linear-stable but
    quadratic-unstable, confirmed by both the criteria and the Jury test."""

    model: Model
    region: dict
    equal_k: bool
    seed: int
    n_samples: int
    n_linear_stable: int
    violations: np.ndarray  # (m, 5) parameter rows
    n_unconfirmed: int
    witness: Optional[tuple] = None
    witness_checks: dict = field(default_factory=dict)

    @property
    def n_violations(self) -> int:
        return int(self.violations.shape[0])

    def summary(self) -> str:
        parts = [
            f"model={self.model.value}",
            f"samples={self.n_samples}",
            f"linear_stable={self.n_linear_stable}",
            f"violations={self.n_violations}",
            f"unconfirmed={self.n_unconfirmed}",
        ]
        if self.witness is not None:
            parts.append("witness=" + ",".join(format(v, ".17g") for v in self.witness))
        return " ".join(parts)


def _sample_box(model: Model, region: dict, n: int, rng: np.random.Generator, equal_k: bool):
    """Uniform samples on half-open boxes ``(lo, hi]``; a third entry
    ``"log"`` samples log-uniformly instead."""
    names = applicable_params(model)
    P = np.zeros((n, 5))
    for name in names:
        if equal_k and name == "K2":
            continue
        box = region[name]
        lo, hi = box[0], box[1]
        u = 1.0 - rng.random(n)  # (0, 1]
        if len(box) > 2 and box[2] == "log":
            P[:, PARAM_INDEX[name]] = np.exp(np.log(lo) + (np.log(hi) - np.log(lo)) * u)
        else:
            P[:, PARAM_INDEX[name]] = lo + (hi - lo) * u
    if equal_k:
        P[:, 3] = P[:, 2]
    if model is Model.GA:
        P[:, 4] = np.minimum(P[:, 4], np.nextafter(1.0, 0.0))
    return P


def _jury_margins(model: Model, P):
    """(linear margin, quadratic margin) from normalized Jury values: the
    linear margin is positive when linear-stable, the quadratic margin is
    positive when quadratic-unstable."""
    jl = equilibrium_jury(model.code, True, P)
    jq = equilibrium_jury(model.code, False, P)
    lin_margin = (jl[:, :3] / jl[:, 3:4]).min(axis=1)
    quad_margin = -(jq[:, :3] / jq[:, 3:4]).min(axis=1)
    return lin_margin, quad_margin


def _classify_points(model: Model, P, threads=None):
    def evaluate(block):
        _, _, nl, lin_stable = evaluate_criteria(model, True, block)
        _, _, nq, quad_stable = evaluate_criteria(model, False, block)
        lin_m, quad_m = _jury_margins(model, block)
        crit_near = np.minimum(np.abs(nl).min(axis=1), np.abs(nq).min(axis=1))
        return lin_stable, quad_stable, lin_m, quad_m, crit_near

    return map_rows(evaluate, P, threads)


def confirm_by_orbit(model: Model, params, n_steps: int = 20000, kick: float = 1e-3) -> dict:
    """Run both cost kinds from a small kick off the equilibrium; the linear
    orbit must settle on E and the quadratic one must not."""
    c1, c2, K, K2, L = (float(v) for v in params)
    out = {}
    for kind in ("linear", "quadratic"):
        spec = make_spec(model, kind, c1, c2, K, K2 if model is Model.GG else None,
                         L if model is Model.GA else None)
        E = nash_equilibrium(spec.costs).state
        s0 = State(E.q1 * (1 + kick), E.q2 * (1 - kick))
        o = orbit(spec, s0, n_steps, n_steps - 100)
        if o.escaped:
            out[kind] = ("escaped", math.inf)
            continue
        d = np.abs(o.states - E.as_array()).max(axis=1) / max(E.q1, E.q2)
        out[kind] = ("converged" if d.max() <= 1e-8 else "away", float(d.min()))
    out["confirmed"] = out["linear"][0] == "converged" and out["quadratic"][0] != "converged"
    return out


def containment_probe(model, region: Optional[dict] = None, n_samples: int = 100_000, seed: int = 42,
                      equal_k: bool = False, find_witness: bool = False, refine_rounds: int = 40,
                      threads=None) -> ContainmentReport:
    """Sample the parameter box and collect points that are linear-stable but
    quadratic-unstable.

    With ``find_witness`` the best-margin violation (or, failing that, a
    locally refined near miss) is checked a third time by orbit simulation and
    reported as the witness.  Results depend only on ``seed``.
    """
    model = Model.parse(model)
    boxes = dict(DEFAULT_BOXES)
    boxes.update(region or {})
    boxes = {k: tuple(v) for k, v in boxes.items() if k in applicable_params(model)}
    if equal_k and model is not Model.GG:
        raise SpecError("equal_k applies to GG only")
    rng = np.random.default_rng(seed)
    P = _sample_box(model, boxes, n_samples, rng, equal_k)
    lin_stable, quad_stable, lin_m, quad_m, crit_near = _classify_points(model, P, threads)
    hit = lin_stable & ~quad_stable
    confirmed = hit & (lin_m > BOUNDARY_TOL) & (quad_m > BOUNDARY_TOL)
    violations = P[confirmed]
    report = dict(
        model=model, region=boxes, equal_k=equal_k, seed=seed, n_samples=n_samples,
        n_linear_stable=int(lin_stable.sum()), violations=violations,
        n_unconfirmed=int((hit & ~confirmed).sum()),
    )
    if not find_witness:
        return ContainmentReport(**report)

    score = np.minimum(lin_m, quad_m)
    candidates = P[np.argsort(-score, kind="stable")[:8]]
    if not confirmed.any():
        candidates = _refine(model, candidates, boxes, rng, equal_k, refine_rounds)
    for point in candidates:
        lm, qm = _jury_margins(model, point[None, :])
        _, _, _, ls = evaluate_criteria(model, True, point[None, :])
        _, _, _, qs = evaluate_criteria(model, False, point[None, :])
        if not (ls[0] and not qs[0] and lm[0] > AGREEMENT_BAND and qm[0] > AGREEMENT_BAND):
            continue
        checks = confirm_by_orbit(model, point)
        if checks["confirmed"]:
            checks.update(linear_jury_margin=float(lm[0]), quadratic_jury_margin=float(qm[0]))
            report.update(witness=tuple(float(v) for v in point), witness_checks=checks)
            break
    return ContainmentReport(**report)


def _refine(model, seeds, boxes, rng, equal_k, rounds, pool: int = 64):
    """Random local search from near misses towards points maximising
    min(linear margin, quadratic margin)."""
    names = [n for n in applicable_params(model) if not (equal_k and n == "K2")]
    cols = [PARAM_INDEX[n] for n in names]
    lo = np.array([boxes[n][0] for n in names])
    hi = np.array([boxes[n][1] for n in names])
    best = seeds.copy()
    lm, qm = _jury_margins(model, best)
    best_score = np.minimum(lm, qm)
    step = 0.1
    for _ in range(rounds):
        trial = np.repeat(best, pool // len(best) or 1, axis=0)
        trial[:, cols] *= np.exp(step * rng.standard_normal((trial.shape[0], len(cols))))
        trial[:, cols] = np.clip(trial[:, cols], np.nextafter(lo, np.inf), hi)
        if equal_k:
            trial[:, 3] = trial[:, 2]
        if model is Model.GA:
            trial[:, 4] = np.minimum(trial[:, 4], np.nextafter(1.0, 0.0))
        tl, tq = _jury_margins(model, trial)
        ts = np.minimum(tl, tq)
        merged = np.vstack([best, trial])
        merged_score = np.concatenate([best_score, ts])
        order = np.argsort(-merged_score, kind="stable")[: len(best)]
        best, best_score = merged[order], merged_score[order]
        if best_score[0] > 1e-3:
            break
    return best


# named probes for the containment / non-containment statements
PROBES = {
    "gr-c1-gt-4": dict(model="gr", region={"c1": (4.0, 20.0)}),
    "gr-c2-gt-3": dict(model="gr", region={"c2": (3.0, 20.0)}),
    "gb-c1-gt-13": dict(model="gb", region={"c1": (13.0, 50.0), "c2": (0.0, 50.0)}),
    "gb-c2-gt-7": dict(model="gb", region={"c1": (0.0, 50.0), "c2": (7.0, 50.0)}),
    "gg-equal-k": dict(model="gg", equal_k=True),
    "ga": dict(model="ga"),
    "gl-witness": dict(model="gl", find_witness=True),
    "gg-witness": dict(model="gg", find_witness=True),
}
