"""Command-line interface.

Exit codes: 0 success, 1 a check failed (verify found an off-boundary
disagreement, containment found a violation or no witness), 2 invalid flags,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import _jit
from .analysis import PROBES, bifurcation, containment_probe, flip_point, lyapunov, sweep2d
from .dynamics import orbit
from .equilibrium import nash_equilibrium
from .parallel import map_rows, resolve_threads
from .stability import AGREEMENT_CODES, Agreement, agreement_codes, criteria, equilibrium_verdict
from .types import (
    CLASS_BY_CODE,
    PARAM_NAMES,
    Axis,
    EscapeError,
    Model,
    SpecError,
    State,
    _normalize_param,
    make_spec,
    validate,
)

PGM_LEVELS = {0: 0, 2: 128, 1: 255, 3: 64}  # stable, boundary, unstable, infeasible


def fmt(x) -> str:
    return format(float(x), ".17g")


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _add_model_flags(p, need_model=True):
    p.add_argument("--model", required=need_model, choices=[m.value for m in Model])
    p.add_argument("--cost", default="quadratic", choices=["quadratic", "linear"])
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--k", type=float, default=1.0, help="gradient speed of firm 1 (K1 in GG)")
    p.add_argument("--k2", type=float, default=None, help="gradient speed of firm 2 (GG)")
    p.add_argument("--l", type=float, default=None, help="adaptive weight (GA)")


def _add_run_flags(p):
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-o", "--output", default=None)


def _spec_from(args, overrides=None):
    spec = make_spec(args.model, args.cost, args.c1, args.c2, args.k, args.k2, args.l)
    if overrides:
        spec = spec.with_params(**overrides)
    return spec


def _writer(path):
    try:
        fh = open(path, "w", newline="", encoding="ascii")
    except OSError as exc:
        raise _Fail(3, f"cannot write {path}: {exc}") from exc
    return fh


def _write_csv(path, header, rows):
    fh = _writer(path)
    try:
        with fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    except OSError as exc:
        raise _Fail(3, f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_equilibrium(args, out):
    spec = validate(_spec_from(args))
    rep = nash_equilibrium(spec.costs)
    verdict = equilibrium_verdict(spec)
    crit = criteria(spec)
    record = {
        "model": spec.model.value,
        "cost": spec.cost_kind.value,
        "c1": spec.c1,
        "c2": spec.c2,
        "K": spec.K,
    }
    if spec.K2 is not None:
        record["K2"] = spec.K2
    if spec.L is not None:
        record["L"] = spec.L
    record.update(q1=rep.state.q1, q2=rep.state.q2, residual1=rep.residuals[0], residual2=rep.residuals[1])
    record.update(crit.as_dict())
    record["criterion_stable"] = crit.stable
    record.update(numeric_class=verdict.cls.value, jury1=verdict.jury[0], jury2=verdict.jury[1],
                  jury3=verdict.jury[2], rho=verdict.spectral_radius)
    for key, value in record.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = fmt(value)
        print(f"{key}={value}", file=out)
    if args.record:
        print(json.dumps(record, sort_keys=False), file=out)
    return 0


def cmd_simulate(args, out):
    spec = validate(_spec_from(args))
    E = nash_equilibrium(spec.costs).state
    s0 = State(args.q1 if args.q1 is not None else 0.9 * E.q1,
               args.q2 if args.q2 is not None else 0.9 * E.q2)
    o = orbit(spec, s0, args.steps, args.transient)
    if args.output:
        _write_csv(args.output, ["t", "q1", "q2"],
                   ((int(t), q[0], q[1]) for t, q in zip(o.times, o.states)))
    last = o.states[-1] if len(o) else (float("nan"), float("nan"))
    print(f"steps={args.steps} recorded={len(o)} escaped={str(o.escaped).lower()}"
          f" escape_index={o.escape_index if o.escaped else -1}"
          f" last_q1={fmt(last[0])} last_q2={fmt(last[1])}", file=out)
    return 0


def _template_for_axes(args, axes):
    overrides = {}
    for ax in axes:
        for i in ax.columns:
            overrides[PARAM_NAMES[i]] = 0.5 * (ax.lo + ax.hi)
    if args.model == "gg" and args.k2 is None and "K2" not in overrides:
        overrides["K2"] = args.k
    spec = _spec_from(args, overrides)
    for ax in axes:
        if not ax.applies_to(spec.model):
            raise SpecError(f"axis {ax.name} does not apply to model {spec.model.name}")
    validate(spec)
    return spec


def cmd_sweep(args, out):
    x_axis, y_axis = Axis.parse(args.x), Axis.parse(args.y)
    template = _template_for_axes(args, (x_axis, y_axis))
    grid = sweep2d(template, x_axis, y_axis, args.mode, threads=args.threads)
    xs, ys = x_axis.values(), y_axis.values()
    ny, nx = grid.shape
    if args.output:
        def rows():
            for j in range(ny):
                for i in range(nx):
                    yield (xs[i], ys[j], CLASS_BY_CODE[int(grid.classes[j, i])].value,
                           *grid.jury[j, i], grid.rho[j, i], grid.crit_primary[j, i])
        _write_csv(args.output, ["x", "y", "class", "jury1", "jury2", "jury3", "rho", "crit_primary"], rows())
    if args.pgm:
        write_pgm(args.pgm, grid)
    counts = np.bincount(grid.classes.ravel(), minlength=4)
    print(f"cells={nx * ny} stable={counts[0]} unstable={counts[1]} boundary={counts[2]}"
          f" infeasible={counts[3]} disagreements={int(grid.disagreements.sum())}", file=out)
    return 0


def write_pgm(path, grid):
    """Plain P2 greymap; row 0 is the largest y value."""
    ny, nx = grid.shape
    lines = [
        "P2",
        f"# x={grid.x_axis.name} [{fmt(grid.x_axis.lo)}, {fmt(grid.x_axis.hi)}] n={nx}",
        f"# y={grid.y_axis.name} [{fmt(grid.y_axis.lo)}, {fmt(grid.y_axis.hi)}] n={ny}; row 0 = max y",
        "# stable=0 infeasible=64 boundary=128 unstable=255",
        f"{nx} {ny}",
        "255",
    ]
    for j in range(ny - 1, -1, -1):
        lines.append(" ".join(str(PGM_LEVELS[int(c)]) for c in grid.classes[j]))
    fh = _writer(path)
    try:
        with fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise _Fail(3, f"cannot write {path}: {exc}") from exc


def cmd_bifurcation(args, out):
    axis = Axis.parse(args.param)
    template = _template_for_axes(args, (axis,))
    scan = bifurcation(template, axis.name, axis.lo, axis.hi, axis.n, args.coordinate,
                       transient=args.transient, n_steps=args.steps, keep=args.keep,
                       threads=args.threads)
    if args.output:
        _write_csv(args.output, ["param", "value"], scan.rows())
    n_escaped = sum(1 for s in scan.samples if len(s) == 0)
    flip = flip_point(scan)
    print(f"points={axis.n} escaped={n_escaped} first_split={fmt(flip) if flip is not None else 'none'}",
          file=out)
    return 0


def cmd_lyapunov(args, out):
    spec = validate(_spec_from(args))
    E = nash_equilibrium(spec.costs).state
    s0 = State(args.q1 if args.q1 is not None else 0.9 * E.q1,
               args.q2 if args.q2 is not None else 0.9 * E.q2)
    value = lyapunov(spec, s0, args.steps, args.transient)
    print(f"lyapunov={fmt(value)}", file=out)
    return 0


def sample_specs(model: Model, n: int, seed: int) -> np.ndarray:
    """Random parameter rows for the agreement suite: costs and speeds
    log-uniform on [0.05, 20] and [0.01, 5], L uniform on (0, 1)."""
    rng = np.random.default_rng(seed)
    P = np.zeros((n, 5))
    P[:, 0:2] = np.exp(rng.uniform(np.log(0.05), np.log(20.0), (n, 2)))
    P[:, 2] = np.exp(rng.uniform(np.log(0.01), np.log(5.0), n))
    k2 = np.exp(rng.uniform(np.log(0.01), np.log(5.0), n))
    L = 1.0 - rng.random(n)
    if model is Model.GG:
        P[:, 3] = k2
    if model is Model.GA:
        P[:, 4] = np.minimum(L, np.nextafter(1.0, 0.0))
    return P


def cmd_verify(args, out):
    model = Model.parse(args.model)
    if args.samples < 1:
        raise SpecError("samples must be positive")
    P = sample_specs(model, args.samples, args.seed)
    lin = args.cost == "linear"
    codes = map_rows(lambda block: agreement_codes(model.code, lin, block), P, args.threads)
    counts = np.bincount(codes, minlength=3)
    if args.output:
        names = {v: k.value for k, v in AGREEMENT_CODES.items()}
        _write_csv(args.output, ["c1", "c2", "K", "K2", "L", "result"],
                   ((*row, names[int(c)]) for row, c in zip(P, codes)))
    agree = counts[AGREEMENT_CODES[Agreement.AGREE]]
    near = counts[AGREEMENT_CODES[Agreement.NEAR_BOUNDARY]]
    bad = counts[AGREEMENT_CODES[Agreement.DISAGREE]]
    print(f"model={model.value} cost={args.cost} agree={agree} near_boundary={near} disagree={bad}", file=out)
    return 1 if bad else 0


def _parse_box(text):
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise SpecError(f"box {text!r} is not name:min:max[:log]")
    name = _normalize_param(parts[0])
    if name not in PARAM_NAMES:
        raise SpecError(f"box {text!r} must name one of {', '.join(PARAM_NAMES)}")
    try:
        box = (float(parts[1]), float(parts[2]))
    except ValueError:
        raise SpecError(f"box {text!r} has a malformed number") from None
    if not box[0] < box[1]:
        raise SpecError(f"box {name}: min must be below max")
    if len(parts) == 4:
        if box[0] <= 0:
            raise SpecError(f"log box {name} needs a positive min")
        box = box + ("log",)
    return name, box


def cmd_containment(args, out):
    if args.preset:
        kw = dict(PROBES[args.preset])
    else:
        if not args.model:
            raise SpecError("give --model or --preset")
        kw = {"model": args.model}
    region = dict(kw.pop("region", {}))
    for text in args.box or ():
        name, box = _parse_box(text)
        region[name] = box
    if args.equal_k:
        kw["equal_k"] = True
    if args.witness:
        kw["find_witness"] = True
    rep = containment_probe(region=region, n_samples=args.samples, seed=args.seed,
                            threads=args.threads, **kw)
    if args.output:
        _write_csv(args.output, ["c1", "c2", "K", "K2", "L"], (tuple(r) for r in rep.violations))
    print(rep.summary(), file=out)
    if kw.get("find_witness"):
        return 0 if rep.witness is not None else 1
    return 1 if rep.n_violations else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cournot-duo", description=__doc__.splitlines()[0])
    parser.add_argument("--backend", action="store_true", help="print the kernel backend and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("equilibrium", help="equilibrium, residuals and both stability verdicts")
    _add_model_flags(p)
    p.add_argument("--record", action="store_true", help="also print a one-line JSON record")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("simulate", help="iterate the map and write t,q1,q2")
    _add_model_flags(p)
    _add_run_flags(p)
    p.add_argument("--q1", type=float, default=None)
    p.add_argument("--q2", type=float, default=None)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--transient", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="2-D stability raster over two parameters")
    _add_model_flags(p)
    _add_run_flags(p)
    p.add_argument("--x", required=True, help="axis name:min:max:n")
    p.add_argument("--y", required=True, help="axis name:min:max:n")
    p.add_argument("--mode", default="both", choices=["criterion", "numeric", "both"])
    p.add_argument("--pgm", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bifurcation", help="post-transient orbit samples along one parameter")
    _add_model_flags(p)
    _add_run_flags(p)
    p.add_argument("--param", required=True, help="name:min:max:n")
    p.add_argument("--coordinate", default="q1", choices=["q1", "q2"])
    p.add_argument("--transient", type=int, default=1000)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--keep", type=int, default=100)
    p.set_defaults(func=cmd_bifurcation)

    p = sub.add_parser("lyapunov", help="largest Lyapunov exponent")
    _add_model_flags(p)
    p.add_argument("--q1", type=float, default=None)
    p.add_argument("--q2", type=float, default=None)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--transient", type=int, default=0)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("verify", help="criterion vs Jury agreement on random specs")
    p.add_argument("--model", required=True, choices=[m.value for m in Model])
    p.add_argument("--cost", default="quadratic", choices=["quadratic", "linear"])
    p.add_argument("--samples", type=int, default=10000)
    _add_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("containment", help="linear-stable but quadratic-unstable search")
    p.add_argument("--model", default=None, choices=[m.value for m in Model])
    p.add_argument("--preset", default=None, choices=sorted(PROBES))
    p.add_argument("--box", action="append", help="name:min:max[:log], repeatable")
    p.add_argument("--equal-k", action="store_true", help="GG: tie K2 to K1")
    p.add_argument("--witness", action="store_true", help="search for a verified witness point")
    p.add_argument("--samples", type=int, default=100_000)
    _add_run_flags(p)
    p.set_defaults(func=cmd_containment)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        print(_jit.backend_name(), file=out)
        return 0
    if not args.command:
        parser.print_help(file=out)
        return 2
    if getattr(args, "threads", None) is not None:
        try:
            resolve_threads(args.threads)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        return args.func(args, out)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
