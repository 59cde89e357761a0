"""Weighted Lebesgue norms on the circle and the embedding constant C9."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputError
from .fourier import TWO_PI, PeriodicFunction, PeriodicGrid, SampledFunction, TrigPoly, synthesize, wrap
from .quadrature import Rule, rule_for
from .weights import Weight, classify_weight, l1_norm, muckenhoupt_constant, require_admissible

SUP_GRID = 4096
KINK_EXPONENT = 2.0   # below this, |f|^p has a kink at sign changes worth cutting at
ROOT_BISECTIONS = 48


@dataclass(frozen=True)
class NormParams:
    """
    Exponent pair ``(p, q)`` with ``theta = 1/p - 1/q``.

    ``q_star`` is ``q`` for finite ``q`` and 1 for ``q = inf``;
    ``q_lower_star`` is ``q`` for ``1 < p < inf`` and 1 when ``q = inf`` or
    ``p = 1`` (the variant used by the polynomial (p, q) inequalities).
    """

    p: float
    q: Optional[float] = None

    def __post_init__(self):
        if not self.p >= 1:
            raise InputError("p must lie in [1, inf]")
        if self.q is not None and not self.p < self.q:
            raise InputError("need p < q")

    @property
    def theta(self) -> Optional[float]:
        if self.q is None:
            return None
        return 1.0 / self.p - (0.0 if self.q == np.inf else 1.0 / self.q)

    @property
    def q_star(self) -> Optional[float]:
        if self.q is None:
            return None
        return 1.0 if self.q == np.inf else self.q

    @property
    def q_lower_star(self) -> Optional[float]:
        if self.q is None:
            return None
        if self.q == np.inf or self.p == 1:
            return 1.0
        return self.q


def _weight_values(w: Weight, rule: Rule) -> np.ndarray:
    store = w.cache.setdefault("node_values", {})
    key = id(rule)
    hit = store.get(key)
    if hit is None or hit[0] is not rule:
        hit = (rule, w(rule.nodes))
        store[key] = hit
    return hit[1]


def sign_changes(f, nodes, iterations: int = ROOT_BISECTIONS) -> np.ndarray:
    """Zeros of ``f`` bracketed by sign changes between consecutive nodes,
    refined by vectorised bisection."""
    x = np.sort(np.asarray(nodes, dtype=float))
    y = np.asarray(f(x), dtype=float)
    idx = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    if idx.size == 0:
        return idx.astype(float)
    lo, hi = x[idx], x[idx + 1]
    ylo = y[idx]
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        ym = np.asarray(f(mid), dtype=float)
        left = np.sign(ym) == np.sign(ylo)
        lo = np.where(left, mid, lo)
        ylo = np.where(left, ym, ylo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def lp_integral(f, p: float, w: Optional[Weight] = None, rule: Optional[Rule] = None) -> float:
    """``int |f|^p w`` over the circle.

    For ``p < 2`` and an automatically chosen rule, the sign changes of
    ``f`` are located and added as cut points, because ``|f|^p`` is not
    smooth there.
    """
    if isinstance(f, SampledFunction) and f.exact_rule is None:
        f = f.interpolant()
    if rule is None:
        rule = rule_for((f,), w)
        if p < KINK_EXPONENT:
            roots = sign_changes(f, rule.nodes)
            if roots.size:
                rule = rule_for((f,), w, extra_cuts=roots)
    vals = np.abs(np.asarray(f(rule.nodes), dtype=float))
    if p != 1:
        vals = vals ** p
    if w is not None and not w.is_unit:
        vals = vals * _weight_values(w, rule)
    if not np.all(np.isfinite(vals)):
        raise InputError("integrand is not finite")
    return rule.integrate(vals)


def sup_norm(f) -> float:
    """
    Essential supremum of ``|f|``.

    Polynomials are sampled on a grid oversampled 4x relative to their
    degree (at least 4096 points) and the three largest local maxima are
    polished by Newton steps on ``f'``.  Other functions use a 4096 grid,
    their breakpoints (approached from both sides) and a bounded scalar
    search around the best grid points.
    """
    if isinstance(f, SampledFunction) and f.exact_rule is None:
        f = f.interpolant()
    if isinstance(f, TrigPoly):
        return _sup_poly(f)
    x = -np.pi + TWO_PI * np.arange(SUP_GRID) / SUP_GRID
    v = np.abs(f(x))
    best = float(np.max(v))
    eps = 1e-13
    for b in f.breakpoints:
        for y in (b - eps, b + eps):
            best = max(best, float(np.abs(f(np.array([float(wrap(y))])))[0]))
    h = TWO_PI / SUP_GRID
    for j in _top_local_maxima(v, 3):
        res = minimize_scalar(lambda t: -abs(float(f(np.array([t]))[0])),
                              bounds=(x[j] - h, x[j] + h), method="bounded",
                              options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def _top_local_maxima(v, count):
    left = np.roll(v, 1)
    right = np.roll(v, -1)
    idx = np.flatnonzero((v >= left) & (v >= right))
    if idx.size == 0:
        idx = np.array([int(np.argmax(v))])
    return idx[np.argsort(v[idx])[::-1][:count]]


def _sup_poly(p: TrigPoly) -> float:
    if p.degree == 0:
        return abs(p.a0)
    grid = PeriodicGrid.at_least(max(SUP_GRID, 4 * (2 * p.degree + 2)))
    v = np.abs(synthesize(p, grid).values)
    best = float(np.max(v))
    d1 = p.derivative(1)
    d2 = p.derivative(2)
    x = grid.nodes
    for j in _top_local_maxima(v, 3):
        t = x[j]
        for _ in range(4):
            s = float(d2(np.array([t]))[0])
            if s == 0:
                break
            step = float(d1(np.array([t]))[0]) / s
            if abs(step) > grid.spacing:
                break
            t -= step
        best = max(best, abs(float(p(np.array([t]))[0])))
    return best


def weighted_norm(f, p: float, w: Optional[Weight] = None, rule: Optional[Rule] = None) -> float:
    """
    ``||f||_{p,w} = (int |f|^p w)^(1/p)``; for ``p = inf`` the weight is
    ignored and the essential supremum is returned.

    Parameters
    ----------
    f : PeriodicFunction, TrigPoly or SampledFunction
    p : float
        In ``[1, inf]``.
    w : Weight, optional
        Defaults to the unit weight.
    rule : Rule, optional
        Quadrature rule override for ``p < inf``.
    """
    if not p >= 1:
        raise InputError("p must lie in [1, inf]")
    if isinstance(f, SampledFunction) and f.grid.n_points == 0:
        raise InputError("empty grid")
    if p == np.inf:
        return sup_norm(f)
    return lp_integral(f, p, w, rule) ** (1.0 / p)


def embedding_constant_C9(w: Weight, p: float) -> float:
    """
    Constant in ``||f||_1 <= C9 ||f||_{p,w}``:
    ``[w]_p^(1/p) ||w||_1^(-1/p)`` for ``1 < p < inf``, ``1/C8`` for
    ``p = 1`` and ``2 pi`` for ``p = inf``.

    For ``1 < p < inf`` Hoelder's inequality and the ``A_p`` condition on
    the whole circle give the bound for the mean ``(1/2pi) ||f||_1`` only;
    the unnormalised norm needs the extra factor ``2 pi``.  The value is
    returned as stated above.
    """
    rep = require_admissible(w, p)
    if p == np.inf:
        return TWO_PI
    if p == 1:
        return 1.0 / rep.C8
    gp = muckenhoupt_constant(w, p).value
    return gp ** (1.0 / p) * l1_norm(w) ** (-1.0 / p)
