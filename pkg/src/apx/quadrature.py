"""
Quadrature rules on the circle.

Smooth periodic integrands get the periodic trapezoid rule.  When a
function has breakpoints or a weight has singular points, the circle is
cut there and each arc is covered by 8-node Gauss-Legendre panels, graded
geometrically toward both arc ends: 40 halvings at singular points of the
weight, a few at plain breakpoints.  The innermost panel at
a singular point ``|x - x0|^alpha`` uses Gauss-Jacobi nodes so power-law
singularities with ``alpha > -1`` are integrated to near machine accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DivergenceError, InputError
from .fourier import TWO_PI, PeriodicFunction, SampledFunction, TrigPoly, wrap

GRADING_LEVELS = 40
PLAIN_CUT_LEVELS = 6
PANEL_NODES = 8
DEFAULT_UNIFORM = 4096
SINGULAR_UNIFORM = 16384


@dataclass(frozen=True)
class Rule:
    """Nodes in ``[-pi, pi)`` and weights for integrals over the circle."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    @property
    def size(self) -> int:
        return self.nodes.size


@lru_cache(maxsize=None)
def _legendre(n):
    t, w = roots_legendre(n)
    return t, w


@lru_cache(maxsize=None)
def _jacobi_left(n, alpha):
    # weight (1 + t)^alpha on [-1, 1]
    t, w = roots_jacobi(n, 0.0, alpha)
    return t, w


@lru_cache(maxsize=64)
def uniform_rule(n_points: int) -> Rule:
    x = -np.pi + TWO_PI * np.arange(n_points) / n_points
    return Rule(x, np.full(n_points, TWO_PI / n_points))


def _panel(a, h, nodes_out, weights_out):
    t, w = _legendre(PANEL_NODES)
    nodes_out.append(a + 0.5 * h * (t + 1.0))
    weights_out.append(0.5 * h * w)


def _graded_half(end, length, direction, alpha, h_max, nodes_out, weights_out,
                 levels=GRADING_LEVELS):
    """Cover the segment of given length starting at ``end`` going in
    ``direction`` (+1/-1), with panels shrinking geometrically toward ``end``."""
    # near nonzero points, stop grading where offsets are lost to round-off
    floor = 1e-9 * abs(end)
    edges = [length]
    while len(edges) <= levels and edges[-1] * 0.5 > floor:
        edges.append(edges[-1] * 0.5)
    for hi, lo in zip(edges[:-1], edges[1:]):
        span = hi - lo
        m = max(1, int(np.ceil(span / h_max)))
        for i in range(m):
            s0 = lo + span * i / m
            s1 = lo + span * (i + 1) / m
            if direction > 0:
                _panel(end + s0, s1 - s0, nodes_out, weights_out)
            else:
                _panel(end - s1, s1 - s0, nodes_out, weights_out)
    h = edges[-1]
    if alpha == 0.0:
        if direction > 0:
            _panel(end, h, nodes_out, weights_out)
        else:
            _panel(end - h, h, nodes_out, weights_out)
        return
    t, w = _jacobi_left(PANEL_NODES, alpha)
    dist = 0.5 * h * (t + 1.0)
    scale = (0.5 * h) ** (1.0 + alpha) * w / dist ** alpha
    nodes_out.append(end + direction * dist)
    weights_out.append(scale)


@lru_cache(maxsize=256)
def graded_rule(cuts: tuple, singular: tuple, h_max: float) -> Rule:
    """
    Composite rule cut at ``cuts`` with grading toward every cut.

    Parameters
    ----------
    cuts : tuple of float
        Sorted distinct points in ``[-pi, pi)``.
    singular : tuple of (float, float)
        ``(location, exponent)`` pairs; locations must be among ``cuts``.
    h_max : float
        Largest panel length.
    """
    expo = {round(x, 15): a for x, a in singular}
    for x, a in singular:
        if a <= -1.0:
            raise DivergenceError(f"non-integrable singularity |x - {x:g}|^{a:g}")
    nodes, weights = [], []
    pts = list(cuts)
    for i, a in enumerate(pts):
        b = pts[i + 1] if i + 1 < len(pts) else pts[0] + TWO_PI
        half = 0.5 * (b - a)
        if half <= 0:
            continue
        bw = pts[i + 1] if i + 1 < len(pts) else pts[0]
        for end, key, direction in ((a, a, +1), (b, bw, -1)):
            alpha = expo.get(round(key, 15))
            if alpha is None:
                # plain cut: the integrand is only piecewise smooth here
                _graded_half(end, half, direction, 0.0, h_max, nodes, weights, PLAIN_CUT_LEVELS)
            else:
                _graded_half(end, half, direction, alpha, h_max, nodes, weights)
    x = wrap(np.concatenate(nodes))
    w = np.concatenate(weights)
    order = np.argsort(x, kind="stable")
    return Rule(x[order], w[order])


def _merge_points(points: Iterable[float], tol: float = 1e-13):
    pts = sorted(float(p) for p in wrap(np.asarray(list(points), dtype=float)))
    out = []
    for p in pts:
        if not out or p - out[-1] > tol:
            out.append(p)
    if len(out) > 1 and out[0] + TWO_PI - out[-1] <= tol:
        out.pop()
    return tuple(out)


def rule_for(functions=(), weight=None, min_nodes: Optional[int] = None, oversample: float = 1.0,
             extra_cuts=()) -> Rule:
    """
    Pick a rule adapted to the breakpoints and bandwidth of ``functions``
    and to the singular points of ``weight``.

    Parameters
    ----------
    functions : sequence of PeriodicFunction
    weight : Weight, optional
    min_nodes : int, optional
        Lower bound on the node count of a uniform rule.
    oversample : float
        Multiplies the density of panels and uniform nodes.
    extra_cuts : sequence of float
        Further points where the integrand is not smooth.
    """
    if isinstance(functions, PeriodicFunction):
        functions = (functions,)
    cuts = [float(wrap(c)) for c in extra_cuts]
    bandwidth = 0
    for f in functions:
        cuts.extend(f.breakpoints)
        bw = f.bandwidth
        bandwidth = max(bandwidth, 64 if bw is None else bw)
    singular = ()
    if weight is not None:
        singular = tuple((float(wrap(x)), float(a)) for x, a in weight.singular_points)
        cuts.extend(weight.cut_points)
    cuts = _merge_points(cuts)
    if not cuts:
        n = max(min_nodes or DEFAULT_UNIFORM, int(oversample * 8 * (bandwidth + 1)))
        n = 1 << int(np.ceil(np.log2(n)))
        return uniform_rule(n)
    h_max = min(np.pi / 128, 4.0 / (bandwidth + 1)) / oversample
    if min_nodes:
        h_max = min(h_max, PANEL_NODES * TWO_PI / min_nodes)
    # snap singular locations onto merged cuts so exponents are found
    snapped = []
    for x, a in singular:
        j = int(np.argmin(np.abs(np.asarray(cuts) - x)))
        snapped.append((cuts[j], a))
    return graded_rule(cuts, tuple(snapped), float(h_max))


def quadrature(f, w=None, rule: Optional[Rule] = None) -> float:
    """
    Integral of ``f * w`` over the circle.

    Parameters
    ----------
    f : PeriodicFunction or SampledFunction
        Integrand.  Sampled data without an exact rule is evaluated
        through its interpolating polynomial.
    w : Weight, optional
    rule : Rule, optional
        Overrides the automatic rule choice.

    Examples
    --------
    >>> from apx.fourier import TrigPoly
    >>> round(quadrature(TrigPoly(1.0)), 12) == round(2 * np.pi, 12)
    True
    """
    if w is not None:
        for x, a in w.singular_points:
            if a <= -1.0:
                raise DivergenceError(f"non-integrable singularity |x - {x:g}|^{a:g}")
    if isinstance(f, SampledFunction) and f.exact_rule is None:
        f = f.interpolant()
    if not isinstance(f, PeriodicFunction):
        raise InputError("quadrature needs a periodic function")
    if rule is None:
        rule = rule_for((f,), w)
    vals = np.asarray(f(rule.nodes), dtype=float)
    if w is not None:
        vals = vals * w(rule.nodes)
    if not np.all(np.isfinite(vals)):
        raise InputError("integrand is not finite at the quadrature nodes")
    return rule.integrate(vals)


def fourier_series(f, degree: int, rule: Optional[Rule] = None) -> TrigPoly:
    """
    Partial sum of degree ``degree`` of the Fourier series of ``f``, with
    coefficients ``(1/pi) int f cos(kx)`` and ``(1/pi) int f sin(kx)``
    computed by a rule that resolves both the breakpoints of ``f`` and
    frequencies up to ``degree``.
    """
    if degree < 0:
        raise InputError("degree must be non-negative")
    if isinstance(f, SampledFunction) and f.exact_rule is None:
        f = f.interpolant()
    if isinstance(f, TrigPoly):
        return f.with_degree(degree)
    if rule is None:
        rule = rule_for((f, TrigPoly.zero(degree)))
    fw = np.asarray(f(rule.nodes), dtype=float) * rule.weights
    z = np.exp(-1j * rule.nodes)
    zk = np.ones(rule.size, dtype=complex)
    c = np.empty(degree + 1, dtype=complex)
    for k in range(degree + 1):
        c[k] = np.dot(fw, zk)
        zk *= z
    return TrigPoly.from_complex(c / TWO_PI)
