from fractions import Fraction

import numpy as np
import pytest

from cournot_duo import CostSide, SpecError, best_response, foc_residual, nash_equilibrium

from oracles import log_uniform


def pair(kind, c1, c2):
    return CostSide(kind, c1), CostSide(kind, c2)


@pytest.mark.parametrize(
    "kind, c1, c2, expected",
    [
        ("quadratic", 0.5, 0.5, (0.5, 0.5)),
        ("quadratic", 1.0, 4.0, (1 / 3, 1 / 6)),
        ("linear", 1.0, 1.0, (0.25, 0.25)),
        ("quadratic", 2.0, 2.0, (0.25, 0.25)),
    ],
)
def test_examples(kind, c1, c2, expected):
    rep = nash_equilibrium(pair(kind, c1, c2))
    assert (rep.state.q1, rep.state.q2) == pytest.approx(expected, rel=1e-14)
    assert rep.cost_kind.value == kind


def test_examples_solve_the_first_order_conditions_exactly():
    q1, q2 = Fraction(1, 3), Fraction(1, 6)
    Qt = q1 + q2
    assert q2 - 2 * 1 * q1 * Qt**2 == 0
    assert q1 - 2 * 4 * q2 * Qt**2 == 0
    q = Fraction(1, 4)
    assert q / (2 * q) ** 2 - 1 == 0


@pytest.mark.parametrize("kind", ["quadratic", "linear"])
def test_random_residuals(rng, kind):
    for c1, c2 in log_uniform(rng, 0.05, 20.0, (1000, 2)):
        rep = nash_equilibrium(pair(kind, c1, c2))
        s = rep.state
        assert rep.max_residual <= 1e-10 * (1 + s.total)
        assert abs(foc_residual(CostSide(kind, c1), s.q1, s.q2)) <= 1e-10
        assert abs(foc_residual(CostSide(kind, c2), s.q2, s.q1)) <= 1e-10


@pytest.mark.parametrize("kind", ["quadratic", "linear"])
def test_swap_symmetry(rng, kind):
    for c1, c2 in log_uniform(rng, 0.05, 20.0, (200, 2)):
        a = nash_equilibrium(pair(kind, c1, c2)).state
        b = nash_equilibrium(pair(kind, c2, c1)).state
        assert (a.q1, a.q2) == (b.q2, b.q1)


@pytest.mark.parametrize("kind", ["quadratic", "linear"])
def test_best_response_consistency(rng, kind):
    for c1, c2 in log_uniform(rng, 0.05, 20.0, (1000, 2)):
        s = nash_equilibrium(pair(kind, c1, c2)).state
        assert best_response(CostSide(kind, c1), s.q2) == pytest.approx(s.q1, rel=1e-9)
        assert best_response(CostSide(kind, c2), s.q1) == pytest.approx(s.q2, rel=1e-9)


def test_mixed_kinds_are_rejected():
    with pytest.raises(SpecError):
        nash_equilibrium((CostSide("quadratic", 1), CostSide("linear", 1)))


def test_non_positive_costs_are_rejected():
    with pytest.raises(SpecError):
        nash_equilibrium(pair("quadratic", 0.0, 1.0))


def test_equilibrium_is_interior():
    s = nash_equilibrium(pair("linear", 0.05, 20.0)).state
    assert s.q1 > 0 and s.q2 > 0
    assert np.isfinite([s.q1, s.q2]).all()
