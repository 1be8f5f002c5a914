"""Heterogeneous Cournot duopolies with isoelastic demand and linear or
quadratic costs: five gradient-based adjustment models, their equilibrium,
local stability and parameter-space analysis."""
from ._jit import USE_NUMBA, backend_name
from .analysis import (
    BifurcationScan,
    ContainmentReport,
    bifurcation,
    containment_probe,
    lyapunov,
    sweep2d,
)
from .dynamics import Orbit, gr_reduced_step, orbit, step
from .equilibrium import EquilibriumReport, nash_equilibrium
from .responses import (
    ResponseOptions,
    best_response,
    foc_residual,
    gradient_term,
    lma_response,
    profit,
)
from .stability import (
    Agreement,
    CriterionSet,
    Jacobian2,
    agreement,
    border_poly_gr,
    criteria,
    jacobian,
    jury,
)
from .types import (
    Axis,
    ConvergenceError,
    CostKind,
    CostSide,
    DomainError,
    EscapeError,
    Model,
    ModelSpec,
    SpecError,
    StabilityClass,
    StabilityVerdict,
    State,
    SweepGrid,
    make_spec,
    validate,
)

__version__ = "0.1.0"
