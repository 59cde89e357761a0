"""
Closed-form test functions used across the checks.

Every family implements the :class:`~apx.fourier.PeriodicFunction`
protocol and, where it makes sense, an exact ``derivative`` rule.  Each
also reports the location and order of its singularities through
``singularities`` so callers can work out the Lipschitz order in a given
weighted norm.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import InputError
from .fourier import TWO_PI, PeriodicFunction, TrigPoly, analyze, PeriodicGrid, SampledFunction


class SinCosTerms(PeriodicFunction):
    """
    Sum of terms ``c * |sin x|^alpha * sgn(sin x)^sigma * cos(x)^j``.

    Closed under differentiation, which gives exact derivatives of
    ``|sin x|^s``.  Terms are stored as tuples ``(c, alpha, sigma, j)``.
    """

    def __init__(self, terms, name: str = ""):
        merged = {}
        for c, alpha, sigma, j in terms:
            key = (float(alpha), int(sigma) % 2, int(j))
            merged[key] = merged.get(key, 0.0) + float(c)
        self.terms = tuple((c, a, s, j) for (a, s, j), c in sorted(merged.items()) if c != 0.0)
        self.name = name
        self.breakpoints = (-np.pi, 0.0) if self._nonsmooth() else ()
        self.bandwidth = None

    def _nonsmooth(self):
        for _, a, s, _ in self.terms:
            if not (float(a).is_integer() and (int(a) + s) % 2 == 0):
                return True
        return False

    @property
    def singular_order(self) -> float:
        """Smallest exponent of ``|sin|`` that is not smooth."""
        orders = [a for _, a, s, _ in self.terms
                  if not (float(a).is_integer() and (int(a) + s) % 2 == 0)]
        return min(orders) if orders else np.inf

    @property
    def singularities(self):
        o = self.singular_order
        return () if not np.isfinite(o) else ((0.0, o), (-np.pi, o))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = np.sin(x)
        c = np.cos(x)
        a_s = np.abs(s)
        sg = np.sign(s)
        out = np.zeros(x.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            for coef, alpha, sigma, j in self.terms:
                if alpha == 0:
                    base = np.ones(x.shape)
                else:
                    base = a_s ** alpha
                term = coef * base * (sg if sigma else 1.0) * c ** j
                out = out + term
        return out

    def derivative(self, r: int = 1) -> "SinCosTerms":
        f = self
        for _ in range(r):
            new = []
            for c, a, s, j in f.terms:
                if a != 0:
                    new.append((c * a, a - 1.0, s + 1, j + 1))
                if j != 0:
                    new.append((-c * j, a + 1.0, s + 1, j - 1))
            f = SinCosTerms(new, name=f"{self.name}'")
        return f


def abs_sin_power(s: float) -> SinCosTerms:
    """``|sin x|^s``."""
    if s <= 0:
        raise InputError("exponent of |sin| must be positive")
    return SinCosTerms([(1.0, s, 0, 0)], name=f"|sin|^{s:g}")


class ExpSin(PeriodicFunction):
    """``exp(sin x)``: entire, so every derivative is represented exactly
    (to round-off) by a degree-48 trigonometric polynomial."""

    breakpoints = ()
    bandwidth = None
    singularities = ()

    def __call__(self, x):
        return np.exp(np.sin(np.asarray(x, dtype=float)))

    def surrogate(self) -> TrigPoly:
        g = PeriodicGrid(128)
        return analyze(SampledFunction(g, self(g.nodes))).with_degree(48)

    def derivative(self, r: int = 1):
        return self.surrogate().derivative(r)


class Sawtooth(PeriodicFunction):
    """``x/2`` on ``(-pi, pi)``, extended periodically; jump at ``-pi``.
    Fourier series ``sum (-1)^(k+1) sin(kx)/k``."""

    breakpoints = (-np.pi,)
    bandwidth = None
    singularities = ((-np.pi, 0.0),)

    def __call__(self, x):
        from .fourier import wrap
        x = wrap(x)
        return np.where(x == -np.pi, 0.0, 0.5 * x)

    def fourier(self, n: int) -> TrigPoly:
        k = np.arange(1, n + 1)
        return TrigPoly(0.0, np.zeros(n), (-1.0) ** (k + 1) / k)


def vp_sawtooth(n: int) -> TrigPoly:
    """Sawtooth smoothed by the de la Vallee-Poussin mean of order ``n``
    (a polynomial of degree ``2n - 1``)."""
    k = np.arange(1, 2 * n)
    m = np.where(k <= n, 1.0, 2.0 - k / n)
    return TrigPoly(0.0, np.zeros(k.size), m * (-1.0) ** (k + 1) / k)


def random_poly(degree: int, seed: int, index: int = 0, constant: bool = True) -> TrigPoly:
    """Seeded random polynomial; ``index`` selects one of a reproducible
    stream of draws under the same ``seed``."""
    rng = np.random.default_rng([int(seed) & (2 ** 64 - 1), int(index)])
    return TrigPoly.random(degree, rng, constant=constant)


def jackson_kernel_poly(m: int, shift: float = 0.0) -> TrigPoly:
    """Normalized Jackson kernel ``J_{2,m}`` translated by ``shift``."""
    from .operators import jackson_kernel_coefficients
    p = jackson_kernel_coefficients(m)
    if shift:
        c = p.complex_coefficients() * np.exp(-1j * np.arange(p.degree + 1) * shift)
        p = TrigPoly.from_complex(c)
    return p


def singularities(f) -> tuple:
    """``(location, order)`` pairs; polynomials and entire functions have none."""
    if isinstance(f, TrigPoly):
        return ()
    return tuple(getattr(f, "singularities", ()))


def lipschitz_order(f, p: float, weight=None) -> float:
    """
    Nominal smoothness order ``beta`` of ``f`` in the weighted ``L_p`` norm.

    A local singularity ``|x - x0|^s`` (``s = 0`` for a jump) seen through a
    weight ``|x - x0|^alpha`` contributes ``s + (1 + alpha)/p``; the
    smallest contribution wins.  Smooth functions give ``inf``.
    """
    sing = singularities(f)
    if not sing:
        return np.inf
    wexp = {}
    if weight is not None:
        for x, a in weight.singular_points:
            wexp[round(float(x), 12)] = a
    best = np.inf
    for x0, s in sing:
        alpha = wexp.get(round(float(x0), 12), 0.0)
        extra = 0.0 if p == np.inf else (1.0 + alpha) / p
        best = min(best, s + extra)
    return best


def from_descriptor(d: dict, seed: int = 0) -> PeriodicFunction:
    """
    Build a test function from a JSON-style descriptor.

    Known families: ``mode`` (``m``, ``kind``), ``abs_sin_power`` (``s``),
    ``exp_sin``, ``sawtooth``, ``vp_sawtooth`` (``n``), ``random_poly``
    (``degree``, ``index``), ``jackson_kernel`` (``m``, ``shift``),
    ``constant`` (``c``) and ``trig_poly`` (``a0``, ``a``, ``b``).
    """
    fam = d.get("family")
    if fam == "mode":
        return TrigPoly.mode(int(d["m"]), d.get("kind", "cos"), float(d.get("amplitude", 1.0)))
    if fam == "abs_sin_power":
        return abs_sin_power(float(d.get("s", 1.0)))
    if fam == "exp_sin":
        return ExpSin()
    if fam == "sawtooth":
        return Sawtooth()
    if fam == "vp_sawtooth":
        return vp_sawtooth(int(d["n"]))
    if fam == "random_poly":
        return random_poly(int(d["degree"]), seed, int(d.get("index", 0)), bool(d.get("constant", True)))
    if fam == "jackson_kernel":
        return jackson_kernel_poly(int(d["m"]), float(d.get("shift", 0.0)))
    if fam == "constant":
        return TrigPoly(float(d.get("c", 1.0)))
    if fam == "trig_poly":
        return TrigPoly(float(d.get("a0", 0.0)), d.get("a", ()), d.get("b", ()))
    raise InputError(f"unknown function family {fam!r}")


def describe(f) -> str:
    if isinstance(f, TrigPoly):
        return f"poly[{f.degree}]"
    return getattr(f, "name", "") or type(f).__name__
