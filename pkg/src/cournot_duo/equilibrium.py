"""Closed-form Nash equilibrium shared by all five models."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .responses import foc_k
from .types import CostKind, CostSide, SpecError, State


@dataclass(frozen=True)
class EquilibriumReport:
    state: State
    residuals: tuple[float, float]
    cost_kind: CostKind

    @property
    def max_residual(self) -> float:
        return max(abs(self.residuals[0]), abs(self.residuals[1]))


def equilibrium_point(lin, c1, c2):
    """(q1*, q2*) from the closed form; works on scalars and arrays."""
    if lin:
        s = c1 + c2
        return c2 / (s * s), c1 / (s * s)
    s1 = np.sqrt(c1)
    s2 = np.sqrt(c2)
    scale = 1.0 / ((s1 + s2) * np.sqrt(2.0 * np.sqrt(c1 * c2)))
    return s2 * scale, s1 * scale


def nash_equilibrium(costs: tuple[CostSide, CostSide]) -> EquilibriumReport:
    cost1, cost2 = costs
    if cost1.kind is not cost2.kind:
        raise SpecError("cost kinds must match")
    if not (cost1.c > 0 and cost2.c > 0):
        raise SpecError("cost coefficients must be positive")
    if not (math.isfinite(cost1.c) and math.isfinite(cost2.c)):
        raise SpecError("cost coefficients must be finite")
    lin = cost1.linear
    q1, q2 = equilibrium_point(lin, cost1.c, cost2.c)
    q1, q2 = float(q1), float(q2)
    residuals = (foc_k(lin, cost1.c, q1, q2), foc_k(lin, cost2.c, q2, q1))
    return EquilibriumReport(State(q1, q2), residuals, cost1.kind)
