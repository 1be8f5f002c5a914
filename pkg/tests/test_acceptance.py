"""Acceptance suite.  Each criterion is checked at its stated tolerance and
reported as one PASS/FAIL line in the terminal summary; run directly with
``python tests/test_acceptance.py`` or as part of ``pytest``."""
import io
import math
import sys

import numpy as np
import pytest

from cournot_duo import (
    CostSide,
    EscapeError,
    Model,
    State,
    best_response,
    border_poly_gr,
    foc_residual,
    gr_reduced_step,
    jacobian,
    make_spec,
    nash_equilibrium,
    orbit,
    step,
    validate,
)
from cournot_duo.analysis import PROBES, confirm_by_orbit, containment_probe
from cournot_duo.cli import main as cli_main, sample_specs
from cournot_duo.polynomials import POLYNOMIALS
from cournot_duo.stability import agreement_codes, equilibrium_verdict
from cournot_duo.stability import spectral_radius

from acceptance_report import record
from oracles import bisect, brent_root, jacobian_error, log_uniform, random_spec

MODELS = list(Model)
COSTS = ["quadratic", "linear"]
SAMPLE_POINTS = [(1, 0.5, 2), (1, 2, 1), (1, 2, 2), (1, 10, 1), (1, 10, 2)]


def rng_for(criterion, *salt):
    return np.random.default_rng([criterion, *salt])


def check(number, part, passed, detail):
    record(number, part, passed, detail)
    assert passed, f"criterion {number} [{part}]: {detail}"


# 1 ---------------------------------------------------------------------------

@pytest.mark.parametrize("cost", COSTS)
def test_criterion_01_equilibrium(cost):
    rng = rng_for(1, COSTS.index(cost))
    worst_foc = 0.0
    worst_fix = 0.0
    for c1, c2 in log_uniform(rng, 0.05, 20.0, (1000, 2)):
        s = nash_equilibrium((CostSide(cost, c1), CostSide(cost, c2))).state
        r1 = abs(foc_residual(CostSide(cost, c1), s.q1, s.q2))
        r2 = abs(foc_residual(CostSide(cost, c2), s.q2, s.q1))
        worst_foc = max(worst_foc, max(r1, r2) / (1 + s.total))
        for model in MODELS:
            spec = random_spec(rng, model, cost).with_params(c1=c1, c2=c2)
            n = step(spec, s)
            worst_fix = max(worst_fix, math.hypot(n.q1 - s.q1, n.q2 - s.q2) / (1 + math.hypot(s.q1, s.q2)))
    passed = worst_foc <= 1e-10 and worst_fix <= 1e-10
    check(1, cost, passed, f"max FOC/(1+Q)={worst_foc:.1e}, max fixed-point error={worst_fix:.1e}")


# 2 ---------------------------------------------------------------------------

def test_criterion_02_best_response():
    rng = rng_for(2)
    cs = log_uniform(rng, 0.05, 20.0, 1000)
    rs = log_uniform(rng, 1e-3, 10.0, 1000)
    worst_rel = max(abs(best_response(CostSide("quadratic", c), r) / brent_root(c, r) - 1) for c, r in zip(cs, rs))
    grid = np.linspace(1e-3, 10.0, 10_000)
    argmax_ok = True
    for kind in COSTS:
        for c, r in zip(cs, rs):
            x = best_response(CostSide(kind, c), r)
            cost = (lambda q: c * q) if kind == "linear" else (lambda q: c * q * q)
            best = x / (x + r) - cost(x)
            if best < (grid / (grid + r) - cost(grid)).max() - 1e-12 * (1 + abs(best)):
                argmax_ok = False
    check(2, "oracle", worst_rel <= 1e-9, f"max relative gap to Brent root={worst_rel:.1e}")
    check(2, "argmax", argmax_ok, "profit at the best response dominates a 10^4-point grid")


# 3 ---------------------------------------------------------------------------

@pytest.mark.parametrize("cost", COSTS)
@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.value)
def test_criterion_03_jacobian(model, cost):
    rng = rng_for(3, model.code, COSTS.index(cost))
    worst = 0.0
    done = 0
    while done < 1000:
        spec = random_spec(rng, model, cost)
        E = nash_equilibrium(spec.costs).state
        q1, q2 = E.q1 * rng.uniform(0.5, 1.5), E.q2 * rng.uniform(0.5, 1.5)
        err = jacobian_error(spec, q1, q2, jacobian(spec, State(q1, q2)).as_array())
        if err is None:
            continue
        worst = max(worst, err)
        done += 1
    check(3, f"{model.value}/{cost}", worst <= 1e-5, f"max rel. error {worst:.1e}")


# 4 ---------------------------------------------------------------------------

@pytest.mark.parametrize("cost", COSTS)
@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.value)
def test_criterion_04_agreement(model, cost):
    P = sample_specs(model, 10_000, seed=400 + 2 * model.code + COSTS.index(cost))
    codes = agreement_codes(model.code, cost == "linear", P)
    bad = int((codes == 1).sum())
    near = int((codes == 2).sum())
    check(4, f"{model.value}/{cost}", bad == 0, f"disagree={bad} near={near}")


# 5 ---------------------------------------------------------------------------

def gr_rho(K, cost):
    spec = make_spec("gr", cost, 1, 1, K)
    return spectral_radius(jacobian(spec, nash_equilibrium(spec.costs).state))


def test_criterion_05_gr_thresholds():
    K_star = bisect(lambda k: gr_rho(k, "quadratic") - 1, 1.0, 2.0)
    check(5, "quadratic K*", abs(K_star - 1.414214) <= 1e-5, f"K*={K_star:.9f}")

    E = 2 ** -1.5
    o = orbit(make_spec("gr", "quadratic", 1, 1, 1.40), State(0.3, 0.3), 10_000, 0)
    dist = np.hypot(o.states[:, 0] - E, o.states[:, 1] - E)
    hit = np.flatnonzero(dist < 1e-8)
    check(5, "converges at K=1.40", hit.size > 0 and not o.escaped,
          f"|q-E|<1e-8 from step {hit[0] if hit.size else 'never'}")

    x = E * 1.01
    for _ in range(10_000):
        x = gr_reduced_step(1, 1, 1.45, x)
    y = gr_reduced_step(1, 1, 1.45, x)
    z = gr_reduced_step(1, 1, 1.45, y)
    two_cycle = abs(x - y) > 1e-3 and abs(z - x) <= 1e-10 * x
    check(5, "period-2 at K=1.45", two_cycle, f"cycle ({x:.6f}, {y:.6f})")

    K_lin = bisect(lambda k: gr_rho(k, "linear") - 1, 1.0, 3.0)
    exact_root = POLYNOMIALS["R_GR2"].exact((1, 1, 2, 0, 0)) == 0
    check(5, "linear K*", exact_root and abs(K_lin - 2) <= 1e-9, f"K*={K_lin:.12f}, R_GR2(1,1,2)=0")


# 6 ---------------------------------------------------------------------------

def test_criterion_06_border_polynomial():
    rng = rng_for(6)
    worst = 0.0
    for c1, c2, K in rng.uniform(0.05, 5.0, (100, 3)):
        r = POLYNOMIALS["R_GR1"](np.array([c1, c2, K, 0.0, 0.0]))[0]
        worst = max(worst, abs(64 * border_poly_gr(c1, c2, K)["quartic"] - r) / abs(r))
    check(6, "identity", worst <= 1e-12, f"max rel. gap {worst:.1e}")
    vanishing = [(p, n) for p in SAMPLE_POINTS for n, v in border_poly_gr(*map(float, p)).items() if v == 0]
    check(6, "sample points", not vanishing, f"vanishing factors: {vanishing or 'none'}")


# 7 ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["gr-c1-gt-4", "gr-c2-gt-3", "gb-c1-gt-13", "gb-c2-gt-7", "gg-equal-k"])
def test_criterion_07_containment(name):
    rep = containment_probe(n_samples=100_000, seed=42, **PROBES[name])
    detail = f"violations={rep.n_violations} of {rep.n_linear_stable} linear-stable"
    if rep.n_violations:
        c1, c2, K, K2, _ = rep.violations[0]
        detail += f", e.g. (c1,c2,K1,K2)=({c1:.3g},{c2:.3g},{K:.3g},{K2:.3g})"
    check(7, name, rep.n_violations == 0, detail)


@pytest.mark.parametrize("name", ["gl-witness", "gg-witness"])
def test_criterion_07_witness(name):
    rep = containment_probe(n_samples=100_000, seed=42, **PROBES[name])
    ok = False
    detail = "no witness"
    if rep.witness is not None:
        point = np.array(rep.witness)
        kw = dict(K2=point[3] if rep.model is Model.GG else None)
        lin = equilibrium_verdict(make_spec(rep.model, "linear", *point[:3], **kw))
        quad = equilibrium_verdict(make_spec(rep.model, "quadratic", *point[:3], **kw))
        ok = lin.stable and not quad.stable and confirm_by_orbit(rep.model, point)["confirmed"]
        detail = "witness " + ",".join(f"{v:.4g}" for v in point[:4 if rep.model is Model.GG else 3])
    check(7, name, ok, detail)


# 8 ---------------------------------------------------------------------------

@pytest.mark.parametrize("cost", COSTS)
def test_criterion_08_ga_degenerates_to_gb(cost):
    rng = rng_for(8, COSTS.index(cost))
    worst = 0.0
    compared = 0
    for _ in range(1000):
        base = random_spec(rng, "gb", cost)
        ga = validate(make_spec("ga", cost, base.c1, base.c2, base.K, L=1.0), allow_unit_l=True)
        s = State(*rng.uniform(0.01, 1.0, 2))
        try:
            b = step(base, s)
        except EscapeError:
            with pytest.raises(EscapeError):
                step(ga, s)
            continue
        a = step(ga, s)
        worst = max(worst, abs(a.q1 - b.q1), abs(a.q2 - b.q2))
        compared += 1
    check(8, cost, worst <= 1e-12, f"max gap {worst:.1e} over {compared} feasible states")


# 9 ---------------------------------------------------------------------------

def test_criterion_09_gg_symmetry():
    rng = rng_for(9)
    mismatches = 0
    for _ in range(1000):
        for cost in COSTS:
            spec = random_spec(rng, "gg", cost)
            q1, q2 = rng.uniform(0.01, 1.0, 2)
            try:
                a = step(spec, State(q1, q2))
            except EscapeError:
                continue
            b = step(spec.swapped(), State(q2, q1))
            mismatches += (a.q1, a.q2) != (b.q2, b.q1)
    check(9, "step", mismatches == 0, f"{mismatches} non-commuting steps")
    P = np.column_stack([log_uniform(rng, 0.05, 20.0, (1000, 2)), log_uniform(rng, 0.01, 5.0, (1000, 2)),
                         np.zeros(1000)])
    swapped = P[:, [1, 0, 3, 2, 4]]
    worst = max(float(np.max(np.abs(POLYNOMIALS[n](swapped) / POLYNOMIALS[n](P) - 1))) for n in ("R_GG1", "R_GG2"))
    check(9, "criteria", worst <= 1e-12, f"max rel. change {worst:.1e}")


# 10 --------------------------------------------------------------------------

def _run_cli(argv, tmp_path, tag):
    out = io.StringIO()
    path = tmp_path / f"{tag}.csv"
    code = cli_main([*argv, "-o", str(path)], out=out)
    return code, out.getvalue(), path.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--model", "gg", "--samples", "10000", "--seed", "7"],
        ["containment", "--model", "ga", "--samples", "100000", "--seed", "7"],
        ["containment", "--preset", "gl-witness", "--samples", "20000", "--seed", "7"],
    ],
    ids=["verify", "containment", "witness"],
)
def test_criterion_10_determinism(argv, tmp_path):
    runs = [_run_cli([*argv, "--threads", str(t)], tmp_path, f"{t}-{i}") for t in (1, 2, 4) for i in range(2)]
    identical = all(r == runs[0] for r in runs)
    check(10, argv[0] + ("/" + argv[2] if argv[1] == "--preset" else ""), identical,
          f"{len(runs)} runs at 1, 2 and 4 threads byte-identical" if identical else "outputs differ")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
