"""Stability criterion polynomials as a single coefficient table.

Each entry maps a criterion name to its monomials ``(coefficient,
(e_c1, e_c2, e_K, e_K2, e_L))`` over the packed parameter vector
``(c1, c2, K, K2, L)``; for GG, ``K`` is firm 1's speed.  Names ending in 1
(and R_GG2) are for quadratic costs; the rest are the linear-cost
counterparts.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

TABLE = {
    "R_GR1": (
        (64, (3, 1, 4, 0, 0)),
        (-96, (2, 1, 2, 0, 0)),
        (-81, (2, 0, 0, 0, 0)),
        (18, (1, 1, 0, 0, 0)),
        (-1, (0, 2, 0, 0, 0)),
    ),
    "R_GR2": (
        (1, (1, 0, 1, 0, 0)),
        (1, (0, 1, 1, 0, 0)),
        (-4, (0, 0, 0, 0, 0)),
    ),
    "R_GB1": (
        (4, (7, 1, 4, 0, 0)),
        (-272, (6, 2, 4, 0, 0)),
        (4632, (5, 3, 4, 0, 0)),
        (-272, (4, 4, 4, 0, 0)),
        (4, (3, 5, 4, 0, 0)),
        (264, (6, 1, 2, 0, 0)),
        (-2464, (5, 2, 2, 0, 0)),
        (-6096, (4, 3, 2, 0, 0)),
        (96, (3, 4, 2, 0, 0)),
        (8, (2, 5, 2, 0, 0)),
        (-81, (6, 0, 0, 0, 0)),
        (342, (5, 1, 0, 0, 0)),
        (-559, (4, 2, 0, 0, 0)),
        (436, (3, 3, 0, 0, 0)),
        (-159, (2, 4, 0, 0, 0)),
        (22, (1, 5, 0, 0, 0)),
        (-1, (0, 6, 0, 0, 0)),
    ),
    "R_GB2": (
        (1, (2, 0, 1, 0, 0)),
        (-6, (1, 1, 1, 0, 0)),
        (1, (0, 2, 1, 0, 0)),
        (4, (1, 0, 0, 0, 0)),
        (4, (0, 1, 0, 0, 0)),
    ),
    "R_GB3": (
        (1, (2, 0, 1, 0, 0)),
        (-2, (1, 1, 1, 0, 0)),
        (1, (0, 2, 1, 0, 0)),
        (-2, (1, 0, 0, 0, 0)),
        (-2, (0, 1, 0, 0, 0)),
    ),
    "R_GL1": (
        (64, (7, 1, 4, 0, 0)),
        (-672, (6, 2, 4, 0, 0)),
        (1796, (5, 3, 4, 0, 0)),
        (-168, (4, 4, 4, 0, 0)),
        (4, (3, 5, 4, 0, 0)),
        (384, (6, 1, 2, 0, 0)),
        (-400, (5, 2, 2, 0, 0)),
        (-2136, (4, 3, 2, 0, 0)),
        (96, (3, 4, 2, 0, 0)),
        (8, (2, 5, 2, 0, 0)),
        (-256, (6, 0, 0, 0, 0)),
        (544, (5, 1, 0, 0, 0)),
        (-353, (4, 2, 0, 0, 0)),
        (100, (3, 3, 0, 0, 0)),
        (-38, (2, 4, 0, 0, 0)),
        (4, (1, 5, 0, 0, 0)),
        (-1, (0, 6, 0, 0, 0)),
    ),
    "R_GL2": (
        (3, (1, 0, 1, 0, 0)),
        (-1, (0, 1, 1, 0, 0)),
        (2, (0, 0, 0, 0, 0)),
    ),
    "R_GL3": (
        (7, (1, 1, 1, 0, 0)),
        (-1, (0, 2, 1, 0, 0)),
        (-8, (1, 0, 0, 0, 0)),
        (-4, (0, 1, 0, 0, 0)),
    ),
    "R_GA1": (
        (64, (7, 1, 4, 0, 4)),
        (-256, (6, 2, 4, 0, 4)),
        (384, (5, 3, 4, 0, 4)),
        (-256, (4, 4, 4, 0, 4)),
        (64, (3, 5, 4, 0, 4)),
        (-384, (7, 1, 4, 0, 3)),
        (2560, (6, 2, 4, 0, 3)),
        (-4352, (5, 3, 4, 0, 3)),
        (2560, (4, 4, 4, 0, 3)),
        (-384, (3, 5, 4, 0, 3)),
        (864, (7, 1, 4, 0, 2)),
        (-8576, (6, 2, 4, 0, 2)),
        (19520, (5, 3, 4, 0, 2)),
        (-8576, (4, 4, 4, 0, 2)),
        (864, (3, 5, 4, 0, 2)),
        (-864, (7, 1, 4, 0, 1)),
        (11904, (6, 2, 4, 0, 1)),
        (-96, (6, 1, 2, 0, 4)),
        (-38464, (5, 3, 4, 0, 1)),
        (384, (5, 2, 2, 0, 4)),
        (11904, (4, 4, 4, 0, 1)),
        (-576, (4, 3, 2, 0, 4)),
        (-864, (3, 5, 4, 0, 1)),
        (384, (3, 4, 2, 0, 4)),
        (-96, (2, 5, 2, 0, 4)),
        (324, (7, 1, 4, 0, 0)),
        (-5904, (6, 2, 4, 0, 0)),
        (96, (6, 1, 2, 0, 3)),
        (27544, (5, 3, 4, 0, 0)),
        (-2944, (5, 2, 2, 0, 3)),
        (-5904, (4, 4, 4, 0, 0)),
        (6208, (4, 3, 2, 0, 3)),
        (324, (3, 5, 4, 0, 0)),
        (-3968, (3, 4, 2, 0, 3)),
        (608, (2, 5, 2, 0, 3)),
        (1416, (6, 1, 2, 0, 2)),
        (5728, (5, 2, 2, 0, 2)),
        (-27344, (4, 3, 2, 0, 2)),
        (13408, (3, 4, 2, 0, 2)),
        (-1400, (2, 5, 2, 0, 2)),
        (-3744, (6, 1, 2, 0, 1)),
        (-81, (6, 0, 0, 0, 4)),
        (128, (5, 2, 2, 0, 1)),
        (342, (5, 1, 0, 0, 4)),
        (53312, (4, 3, 2, 0, 1)),
        (-559, (4, 2, 0, 0, 4)),
        (-18304, (3, 4, 2, 0, 1)),
        (436, (3, 3, 0, 0, 4)),
        (1376, (2, 5, 2, 0, 1)),
        (-159, (2, 4, 0, 0, 4)),
        (22, (1, 5, 0, 0, 4)),
        (-1, (0, 6, 0, 0, 4)),
        (2592, (6, 1, 2, 0, 0)),
        (648, (6, 0, 0, 0, 3)),
        (-5760, (5, 2, 2, 0, 0)),
        (-2736, (5, 1, 0, 0, 3)),
        (-37696, (4, 3, 2, 0, 0)),
        (4472, (4, 2, 0, 0, 3)),
        (8576, (3, 4, 2, 0, 0)),
        (-3488, (3, 3, 0, 0, 3)),
        (-480, (2, 5, 2, 0, 0)),
        (1272, (2, 4, 0, 0, 3)),
        (-176, (1, 5, 0, 0, 3)),
        (8, (0, 6, 0, 0, 3)),
        (-1944, (6, 0, 0, 0, 2)),
        (8208, (5, 1, 0, 0, 2)),
        (-13416, (4, 2, 0, 0, 2)),
        (10464, (3, 3, 0, 0, 2)),
        (-3816, (2, 4, 0, 0, 2)),
        (528, (1, 5, 0, 0, 2)),
        (-24, (0, 6, 0, 0, 2)),
        (2592, (6, 0, 0, 0, 1)),
        (-10944, (5, 1, 0, 0, 1)),
        (17888, (4, 2, 0, 0, 1)),
        (-13952, (3, 3, 0, 0, 1)),
        (5088, (2, 4, 0, 0, 1)),
        (-704, (1, 5, 0, 0, 1)),
        (32, (0, 6, 0, 0, 1)),
        (-1296, (6, 0, 0, 0, 0)),
        (5472, (5, 1, 0, 0, 0)),
        (-8944, (4, 2, 0, 0, 0)),
        (6976, (3, 3, 0, 0, 0)),
        (-2544, (2, 4, 0, 0, 0)),
        (352, (1, 5, 0, 0, 0)),
        (-16, (0, 6, 0, 0, 0)),
    ),
    "R_GA2": (
        (1, (2, 0, 1, 0, 1)),
        (2, (1, 1, 1, 0, 1)),
        (1, (0, 2, 1, 0, 1)),
        (-4, (1, 1, 1, 0, 0)),
        (-2, (1, 0, 0, 0, 1)),
        (-2, (0, 1, 0, 0, 1)),
    ),
    "R_GA3": (
        (1, (2, 0, 1, 0, 1)),
        (2, (1, 1, 1, 0, 1)),
        (1, (0, 2, 1, 0, 1)),
        (-8, (1, 1, 1, 0, 0)),
        (-4, (1, 0, 0, 0, 1)),
        (-4, (0, 1, 0, 0, 1)),
        (8, (1, 0, 0, 0, 0)),
        (8, (0, 1, 0, 0, 0)),
    ),
    "R_GG1": (
        (-1024, (3, 3, 4, 4, 0)),
        (384, (3, 2, 4, 2, 0)),
        (384, (3, 2, 3, 3, 0)),
        (384, (2, 3, 3, 3, 0)),
        (384, (2, 3, 2, 4, 0)),
        (1, (4, 0, 4, 0, 0)),
        (-18, (3, 1, 4, 0, 0)),
        (-32, (3, 1, 3, 1, 0)),
        (-18, (3, 1, 2, 2, 0)),
        (81, (2, 2, 4, 0, 0)),
        (288, (2, 2, 3, 1, 0)),
        (420, (2, 2, 2, 2, 0)),
        (288, (2, 2, 1, 3, 0)),
        (81, (2, 2, 0, 4, 0)),
        (-18, (1, 3, 2, 2, 0)),
        (-32, (1, 3, 1, 3, 0)),
        (-18, (1, 3, 0, 4, 0)),
        (1, (0, 4, 0, 4, 0)),
    ),
    "R_GG2": (
        (-64, (4, 4, 4, 4, 0)),
        (96, (4, 3, 4, 2, 0)),
        (-32, (4, 3, 3, 3, 0)),
        (-32, (3, 4, 3, 3, 0)),
        (96, (3, 4, 2, 4, 0)),
        (1, (5, 1, 4, 0, 0)),
        (-18, (4, 2, 4, 0, 0)),
        (32, (4, 2, 3, 1, 0)),
        (-18, (4, 2, 2, 2, 0)),
        (81, (3, 3, 4, 0, 0)),
        (96, (3, 3, 3, 1, 0)),
        (-92, (3, 3, 2, 2, 0)),
        (96, (3, 3, 1, 3, 0)),
        (81, (3, 3, 0, 4, 0)),
        (-18, (2, 4, 2, 2, 0)),
        (32, (2, 4, 1, 3, 0)),
        (-18, (2, 4, 0, 4, 0)),
        (1, (1, 5, 0, 4, 0)),
        (8, (4, 1, 2, 0, 0)),
        (-8, (4, 1, 1, 1, 0)),
        (-16, (3, 2, 2, 0, 0)),
        (-120, (3, 2, 1, 1, 0)),
        (-120, (3, 2, 0, 2, 0)),
        (-120, (2, 3, 2, 0, 0)),
        (-120, (2, 3, 1, 1, 0)),
        (-16, (2, 3, 0, 2, 0)),
        (-8, (1, 4, 1, 1, 0)),
        (8, (1, 4, 0, 2, 0)),
        (-4, (4, 0, 0, 0, 0)),
        (16, (3, 1, 0, 0, 0)),
        (-24, (2, 2, 0, 0, 0)),
        (16, (1, 3, 0, 0, 0)),
        (-4, (0, 4, 0, 0, 0)),
    ),
    "R_GG3": (
        (1, (1, 0, 1, 1, 0)),
        (1, (0, 1, 1, 1, 0)),
        (-2, (0, 0, 1, 0, 0)),
        (-2, (0, 0, 0, 1, 0)),
    ),
    "R_GG4": (
        (1, (2, 1, 1, 1, 0)),
        (1, (1, 2, 1, 1, 0)),
        (-4, (1, 1, 1, 0, 0)),
        (-4, (1, 1, 0, 1, 0)),
        (4, (1, 0, 0, 0, 0)),
        (4, (0, 1, 0, 0, 0)),
    ),}

# criteria used for each (model, cost kind), in reporting order
CRITERIA_FOR = {
    ("gr", "quadratic"): ("R_GR1",),
    ("gr", "linear"): ("R_GR2",),
    ("gb", "quadratic"): ("R_GB1",),
    ("gb", "linear"): ("R_GB2", "R_GB3"),
    ("gl", "quadratic"): ("R_GL1",),
    ("gl", "linear"): ("R_GL2", "R_GL3"),
    ("ga", "quadratic"): ("R_GA1",),
    ("ga", "linear"): ("R_GA2", "R_GA3"),
    ("gg", "quadratic"): ("R_GG1", "R_GG2"),
    ("gg", "linear"): ("R_GG3", "R_GG4"),
}

# required sign of each criterion for local stability (+1: > 0, -1: < 0)
STABLE_SIGN = {
    "R_GR1": -1,
    "R_GR2": -1,
    "R_GB1": -1,
    "R_GB2": +1,
    "R_GB3": -1,
    "R_GL1": -1,
    "R_GL2": +1,
    "R_GL3": -1,
    "R_GA1": -1,
    # linear GA and GG: on c1 = c2, K = K2 these reduce to factors whose sign
    # pattern is only consistent with the Jury conditions in this orientation
    "R_GA2": -1,
    "R_GA3": +1,
    "R_GG1": +1,
    "R_GG2": -1,
    "R_GG3": -1,
    "R_GG4": +1,
}


class Polynomial:
    """Compiled view of one table entry."""

    def __init__(self, name):
        self.name = name
        terms = TABLE[name]
        self.coefs = np.array([float(c) for c, _ in terms])
        self.exps = np.array([e for _, e in terms], dtype=np.int64)
        self.int_coefs = tuple(c for c, _ in terms)

    def __len__(self):
        return len(self.coefs)

    def terms(self, P):
        """Monomial values, shape ``(n, n_terms)``, for parameters ``(n, 5)``."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        mono = np.ones((P.shape[0], len(self.coefs)))
        for j in range(5):
            e = self.exps[:, j]
            if e.any():
                mono *= P[:, j:j + 1] ** e[None, :]
        return mono * self.coefs[None, :]

    def __call__(self, P):
        t = self.terms(P)
        return t.sum(axis=1)

    def value_and_scale(self, P):
        """Value plus the sum of absolute term values (for normalisation)."""
        t = self.terms(P)
        return t.sum(axis=1), np.abs(t).sum(axis=1)

    def exact(self, point):
        """Exact rational value at ``point`` (5 rationals)."""
        x = [Fraction(v) for v in point]
        total = Fraction(0)
        for c, e in TABLE[self.name]:
            term = Fraction(c)
            for v, k in zip(x, e):
                if k:
                    term *= v ** k
            total += term
        return total


POLYNOMIALS = {name: Polynomial(name) for name in TABLE}
