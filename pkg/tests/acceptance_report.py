"""Collects per-criterion outcomes so that one line per criterion can be
printed at the end of a run."""
from collections import OrderedDict

_RESULTS = OrderedDict()
TITLES = {
    1: "equilibrium correctness",
    2: "best-response correctness",
    3: "Jacobian vs finite differences",
    4: "criterion/numeric agreement",
    5: "GR analytic thresholds",
    6: "border polynomial identity",
    7: "containment claims",
    8: "GA equals GB at L=1",
    9: "GG relabeling symmetry",
    10: "determinism across thread counts",
}


def record(number, part, passed, detail):
    _RESULTS.setdefault(number, []).append((part, bool(passed), detail))


def lines():
    out = []
    for number in sorted(_RESULTS):
        parts = _RESULTS[number]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'ok' if p else 'FAIL'} ({d})" for name, p, d in parts)
        out.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {TITLES[number]}: {detail}")
    return out
