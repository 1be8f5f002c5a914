"""Domain vocabulary shared by every module: cost sides, model specs, states,
stability verdicts and sweep grids, plus validation of model specs."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np


class SpecError(ValueError):
    """A model specification or parameter violates its domain."""


class DomainError(ValueError):
    """A response or map was evaluated outside its domain (e.g. Q = 0)."""


class EscapeError(ArithmeticError):
    """An orbit produced a non-positive or non-finite output."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(RuntimeError):
    """The safeguarded best-response solver ran out of iterations."""


class CostKind(enum.Enum):
    QUADRATIC = "quadratic"
    LINEAR = "linear"

    @property
    def code(self) -> int:
        return 0 if self is CostKind.QUADRATIC else 1

    @classmethod
    def parse(cls, value) -> "CostKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise SpecError(f"unknown cost kind {value!r}") from None


class Model(enum.Enum):
    """Firm 1 always adjusts by gradient; firm 2 is rational (GR), boundedly
    rational (GB), LMA (GL), adaptive (GA) or gradient (GG)."""

    GR = "gr"
    GB = "gb"
    GL = "gl"
    GA = "ga"
    GG = "gg"

    @property
    def code(self) -> int:
        return _MODEL_CODES[self]

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            try:
                return MODEL_BY_CODE[int(value)]
            except KeyError:
                raise SpecError(f"unknown model code {value!r}") from None
        try:
            return cls(str(value).lower())
        except ValueError:
            raise SpecError(f"unknown model {value!r}") from None


_MODEL_CODES = {Model.GR: 0, Model.GB: 1, Model.GL: 2, Model.GA: 3, Model.GG: 4}
MODEL_BY_CODE = {v: k for k, v in _MODEL_CODES.items()}


@dataclass(frozen=True)
class CostSide:
    kind: CostKind
    c: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CostKind.parse(self.kind))
        object.__setattr__(self, "c", float(self.c))

    @property
    def linear(self) -> bool:
        return self.kind is CostKind.LINEAR


@dataclass(frozen=True)
class State:
    q1: float
    q2: float

    def __post_init__(self):
        object.__setattr__(self, "q1", float(self.q1))
        object.__setattr__(self, "q2", float(self.q2))

    @property
    def total(self) -> float:
        return self.q1 + self.q2

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2])


@dataclass(frozen=True)
class ModelSpec:
    """One model instance.  ``K`` is firm 1's gradient speed (``K1`` in GG),
    ``K2`` is only used by GG and ``L`` only by GA."""

    model: Model
    costs: tuple[CostSide, CostSide]
    K: float
    K2: Optional[float] = None
    L: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model.parse(self.model))
        object.__setattr__(self, "costs", tuple(self.costs))
        object.__setattr__(self, "K", float(self.K))
        if self.K2 is not None:
            object.__setattr__(self, "K2", float(self.K2))
        if self.L is not None:
            object.__setattr__(self, "L", float(self.L))

    @property
    def c1(self) -> float:
        return self.costs[0].c

    @property
    def c2(self) -> float:
        return self.costs[1].c

    @property
    def cost_kind(self) -> CostKind:
        return self.costs[0].kind

    @property
    def linear(self) -> bool:
        return self.costs[0].kind is CostKind.LINEAR

    def params(self) -> np.ndarray:
        """Packed parameter vector ``(c1, c2, K, K2, L)``; unused slots are 0."""
        return np.array([
            self.c1,
            self.c2,
            self.K,
            self.K2 if self.K2 is not None else 0.0,
            self.L if self.L is not None else 0.0,
        ])

    def with_params(self, **changes) -> "ModelSpec":
        """Copy with any of ``c1, c2, K, K2, L`` replaced."""
        costs = list(self.costs)
        for i, name in enumerate(("c1", "c2")):
            if name in changes:
                costs[i] = CostSide(costs[i].kind, changes.pop(name))
        return replace(self, costs=tuple(costs), **changes)

    def swapped(self) -> "ModelSpec":
        """Relabel the firms (GG only: both firms use the same rule)."""
        if self.model is not Model.GG:
            raise SpecError("firm relabeling is only meaningful for GG")
        return replace(self, costs=(self.costs[1], self.costs[0]), K=self.K2, K2=self.K)


def make_spec(model, cost="quadratic", c1=1.0, c2=1.0, K=1.0, K2=None, L=None) -> ModelSpec:
    kind = CostKind.parse(cost)
    return ModelSpec(Model.parse(model), (CostSide(kind, c1), CostSide(kind, c2)), K, K2, L)


def _check_positive(name, value):
    if value is None:
        raise SpecError(f"{name} must be positive")
    if math.isnan(value) or value <= 0:
        raise SpecError(f"{name} must be positive")
    if not math.isfinite(value):
        raise SpecError(f"{name} must be finite")


def validate(spec: ModelSpec, *, allow_unit_l: bool = False) -> ModelSpec:
    """Return ``spec`` unchanged if every domain constraint holds.

    ``allow_unit_l`` admits ``L = 1`` for GA, where the adaptive player
    reduces to the boundedly rational one; it is meant for consistency
    checks, not for analysis.
    """
    if spec.costs[0].kind is not spec.costs[1].kind:
        raise SpecError("cost kinds must match")
    _check_positive("c1", spec.c1)
    _check_positive("c2", spec.c2)
    _check_positive("K", spec.K)
    if spec.model is Model.GG:
        if spec.K2 is None:
            raise SpecError("K2 is required for model GG")
        _check_positive("K2", spec.K2)
    if spec.model is Model.GA:
        if spec.L is None:
            raise SpecError("L is required for model GA")
        L = spec.L
        upper_ok = L <= 1.0 if allow_unit_l else L < 1.0
        if math.isnan(L) or not (L > 0.0 and upper_ok):
            raise SpecError("L out of (0,1)")
    return spec


class StabilityClass(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    BOUNDARY = "boundary"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class StabilityVerdict:
    cls: StabilityClass
    jury: tuple[float, float, float]
    spectral_radius: float
    criterion_values: tuple[tuple[str, float], ...] = ()

    @property
    def stable(self) -> bool:
        return self.cls is StabilityClass.STABLE


@dataclass(frozen=True)
class Axis:
    """A parameter axis ``name`` sampled at ``n`` evenly spaced points.
    The name ``c`` moves both cost coefficients together (the diagonal
    slice c1 = c2)."""

    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.name not in AXIS_COLUMNS:
            raise SpecError(f"unknown axis parameter {self.name!r}")
        if self.n < 2:
            raise SpecError("axis resolution must be at least 2")
        if not self.lo < self.hi:
            raise SpecError(f"axis {self.name}: min must be below max")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        parts = text.split(":")
        if len(parts) != 4:
            raise SpecError(f"axis spec {text!r} is not name:min:max:n")
        name = _normalize_param(parts[0])
        try:
            return cls(name, float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError:
            raise SpecError(f"axis spec {text!r} has a malformed number") from None

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    @property
    def columns(self) -> tuple[int, ...]:
        """Indices into the packed ``(c1, c2, K, K2, L)`` vector."""
        return AXIS_COLUMNS[self.name]

    def applies_to(self, model: Model) -> bool:
        return all(PARAM_NAMES[i] in applicable_params(model) for i in self.columns)


PARAM_NAMES = ("c1", "c2", "K", "K2", "L")
PARAM_INDEX = {name: i for i, name in enumerate(PARAM_NAMES)}
AXIS_COLUMNS = {name: (i,) for name, i in PARAM_INDEX.items()}
AXIS_COLUMNS["c"] = (0, 1)


def _normalize_param(name: str) -> str:
    table = {"c": "c", "c1": "c1", "c2": "c2", "k": "K", "k1": "K", "k2": "K2", "l": "L"}
    try:
        return table[name.strip().lower()]
    except KeyError:
        raise SpecError(f"unknown parameter {name!r}") from None


def applicable_params(model: Model) -> tuple[str, ...]:
    if model is Model.GG:
        return ("c1", "c2", "K", "K2")
    if model is Model.GA:
        return ("c1", "c2", "K", "L")
    return ("c1", "c2", "K")


@dataclass(frozen=True)
class SweepGrid:
    """Row-major lattice of verdicts; cell ``(j, i)`` sits at
    ``(x_axis.values()[i], y_axis.values()[j])``."""

    template: ModelSpec
    x_axis: Axis
    y_axis: Axis
    mode: str
    classes: np.ndarray = field(repr=False)  # (ny, nx) StabilityClass codes
    jury: np.ndarray = field(repr=False)  # (ny, nx, 3)
    rho: np.ndarray = field(repr=False)  # (ny, nx)
    crit_primary: np.ndarray = field(repr=False)  # (ny, nx)
    disagreements: np.ndarray = field(repr=False)  # (ny, nx) bool

    @property
    def shape(self):
        return self.classes.shape

    def cell_class(self, j: int, i: int) -> StabilityClass:
        return CLASS_BY_CODE[int(self.classes[j, i])]


CLASS_CODES = {
    StabilityClass.STABLE: 0,
    StabilityClass.UNSTABLE: 1,
    StabilityClass.BOUNDARY: 2,
    StabilityClass.INFEASIBLE: 3,
}
CLASS_BY_CODE = {v: k for k, v in CLASS_CODES.items()}
