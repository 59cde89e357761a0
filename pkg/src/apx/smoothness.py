"""
Moduli of smoothness built from the one-sided Steklov mean, two competitor
moduli, upper bounds for the K-functional and the realization functional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from .errors import InputError
from .fourier import Multiplier, PeriodicFunction, SampledFunction, TrigPoly, apply_multiplier, wrap
from .norms import weighted_norm
from .operators import (KernelOperator, KernelPiece, OperatorImage, OperatorTag, _bspline_pieces,
                        apply, multiplier, trig_derivative)
from .quadrature import fourier_series, rule_for
from .weights import Weight

VARIANT_STEPS = 16
VARIANT_T_NODES = 32


@dataclass(frozen=True)
class SmoothnessParams:
    """Order ``k >= 1``, step ``0 < v <= 1`` and the norm ``(p, w)``."""

    k: int
    v: float
    p: float = 2.0
    w: Optional[Weight] = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InputError("modulus order must be a positive integer")
        if not 0.0 < self.v <= 1.0:
            raise InputError("modulus step must lie in (0, 1]")
        if not self.p >= 1:
            raise InputError("p must lie in [1, inf]")


def _as_function(f):
    if isinstance(f, SampledFunction) and f.exact_rule is None:
        return f.interpolant()
    return f


def modulus(f, sp: SmoothnessParams) -> float:
    """
    ``||(I - T_v)^k f||_{p,w}``.

    Polynomials go through the multiplier ``(1 - m_T(k))^k``; other
    functions through the kernel of ``(I - T_v)^k`` applied by quadrature.

    Examples
    --------
    >>> from apx.fourier import TrigPoly
    >>> modulus(TrigPoly(3.0), SmoothnessParams(2, 0.5))
    0.0
    """
    img = apply(OperatorTag.identity_minus_T(sp.v, sp.k), _as_function(f))
    return weighted_norm(img, sp.p, sp.w)


# ---------------------------------------------------------------------- #
# competitor moduli

def variant_steps(v: float) -> np.ndarray:
    """Geometric grid ``v 2^(-j/2)``, ``j = 0..15``, used for the suprema."""
    return v * 2.0 ** (-0.5 * np.arange(VARIANT_STEPS))


def _symmetric_difference_operator(h: float, r: int) -> KernelOperator:
    """Kernel of ``(I - Phi_h)^r``: ``Phi_h^j`` is a B-spline of ``j`` cells
    of width ``2h`` centred at the origin."""
    pieces = []
    for j in range(1, r + 1):
        c = comb(r, j) * (-1.0) ** j
        for pc in _bspline_pieces(2.0 * h, j):
            pieces.append(KernelPiece(pc.lo - j * h, pc.hi - j * h,
                                      lambda t, kap=pc.kappa, s=j * h, c=c: c * kap(np.asarray(t) + s)))
    return KernelOperator(((0.0, 1.0),), tuple(pieces))


def _symmetric_difference(f, h: float, r: int):
    if isinstance(f, TrigPoly):
        m = multiplier(OperatorTag.symmetric_Phi(h), f.degree).m
        return apply_multiplier(f, Multiplier((1.0 - m) ** r))
    return OperatorImage(_symmetric_difference_operator(h, r), f, f"(I-Phi_{h:g})^{r}")


class AveragedDifference(PeriodicFunction):
    """``x -> (1/h) int_0^h |Delta_t^r f(x)| dt`` by Gauss-Legendre in ``t``,
    with ``Delta_t^r f(x) = sum_j C(r, j) (-1)^j f(x + j t)``."""

    def __init__(self, f: PeriodicFunction, h: float, r: int, nodes: int = VARIANT_T_NODES):
        self.f = f
        self.h = h
        self.r = r
        u, wu = roots_legendre(nodes)
        self.t = 0.5 * h * (u + 1.0)
        self.wt = 0.5 * wu
        self.coef = np.array([comb(r, j) * (-1.0) ** j for j in range(r + 1)])
        pts = set()
        for b in f.breakpoints:
            for j in range(r + 1):
                pts.add(round(float(wrap(b - j * h)), 15))
        self.breakpoints = tuple(sorted(pts))
        self.bandwidth = f.bandwidth

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        diff = np.zeros((x.size, self.t.size))
        for j, c in enumerate(self.coef):
            arg = x[:, None] + j * self.t[None, :]
            diff += c * self.f(arg.ravel()).reshape(arg.shape)
        return np.abs(diff) @ self.wt


def modulus_variants(f, r: int, v: float, p: float = 2.0, w: Optional[Weight] = None) -> dict:
    """
    Lower estimates of the two competitor moduli.

    ``gadjieva`` is ``sup_h ||(I - Phi_h)^r f||`` with equal steps, and
    ``ky`` is ``sup_h ||(1/h) int_0^h |Delta_t^r f| dt||``; both suprema
    run over :func:`variant_steps`.  A supremum over a finite grid can only
    under-estimate the true value, which the ``lower_estimate`` flag records.
    """
    if int(r) != r or r < 1:
        raise InputError("order must be a positive integer")
    if not v > 0:
        raise InputError("step must be positive")
    f = _as_function(f)
    steps = variant_steps(v)
    gad = max(weighted_norm(_symmetric_difference(f, h, r), p, w) for h in steps)
    ky = max(weighted_norm(AveragedDifference(f, h, r), p, w) for h in steps)
    return {"gadjieva": gad, "ky": ky, "steps": steps, "lower_estimate": True}


# ---------------------------------------------------------------------- #
# K-functional and realization

@dataclass
class KEstimate:
    """Upper bound of the K-functional and the candidate attaining it."""

    value: float
    candidate: str
    candidates: dict = field(default_factory=dict)


def fourier_surrogate(f, degree: int) -> TrigPoly:
    """Degree-``degree`` partial Fourier sum of ``f`` (polynomials of lower
    degree are returned unchanged)."""
    f = _as_function(f)
    if isinstance(f, TrigPoly) and f.degree <= degree:
        return f
    return fourier_series(f, degree)


def _surrogate_degree(v: float) -> int:
    d = int(2 ** np.ceil(np.log2(8.0 / v)))
    return int(min(max(d, 64), 2048))


def _k_value(f, g: TrigPoly, r, v, p, w):
    g = g.with_degree(g.effective_degree)
    rule = None if p == np.inf else rule_for((f, g), w)
    dist = weighted_norm(f - g, p, w, rule)
    return dist + v ** r * weighted_norm(trig_derivative(g, r), p, w)


def k_functional_upper(f, r: int, v: float, p: float = 2.0, w: Optional[Weight] = None) -> KEstimate:
    """
    ``min ||f - g|| + v^r ||g^(r)||`` over a fixed candidate set.

    Candidates are ``A_v^r`` applied to a Fourier surrogate of ``f``, the
    de la Vallee-Poussin mean ``V_n f`` and the Jackson operator ``D_n f``
    with ``n = ceil(1/v)``, and ``g = 0``.  Polynomials are used as their
    own surrogate; every candidate is an admissible ``g``, so the minimum
    bounds the infimum from above.
    """
    if int(r) != r or r < 1:
        raise InputError("order must be a positive integer")
    if not 0.0 < v <= 1.0:
        raise InputError("step must lie in (0, 1]")
    f = _as_function(f)
    n = int(np.ceil(1.0 / v - 1e-12))
    base = f if isinstance(f, TrigPoly) else fourier_surrogate(f, max(_surrogate_degree(v), 2 * n))
    gs = {
        "a_delta": apply(OperatorTag.a_delta(v, r), base, "multiplier"),
        "vallee_poussin": apply(OperatorTag.vallee_poussin(n), base, "multiplier"),
        "jackson_D": apply(OperatorTag.jackson_D(n), base, "multiplier"),
    }
    vals = {name: _k_value(f, g, r, v, p, w) for name, g in gs.items()}
    vals["zero"] = weighted_norm(f, p, w)
    best = min(vals, key=vals.get)
    return KEstimate(vals[best], best, vals)


def realization(f, r: int, n: int, p: float, w: Optional[Weight], u: TrigPoly) -> float:
    """``||f - u||_{p,w} + n^(-r) ||u^(r)||_{p,w}`` for a polynomial ``u`` of
    degree at most ``n``."""
    if int(r) != r or r < 1:
        raise InputError("order must be a positive integer")
    if n < 1:
        raise InputError("degree must be positive")
    if u.degree > n:
        raise InputError(f"approximant degree {u.degree} exceeds n = {n}")
    f = _as_function(f)
    rule = None if p == np.inf else rule_for((f, u), w)
    return weighted_norm(f - u, p, w, rule) + n ** (-r) * weighted_norm(trig_derivative(u, r), p, w)
