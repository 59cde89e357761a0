"""
Averaging and convolution operators on the circle.

Each operator has two independent implementations:

* a *multiplier* path acting exactly on the modes of a
  :class:`~apx.fourier.TrigPoly` through closed-form multipliers, and
* a *quadrature* path evaluating the defining integral
  ``sum_j c_j f(x + s_j) + int kappa(t) f(x + t) dt`` with composite
  Gauss-Legendre rules (or the trapezoid rule for full-period kernels).

On polynomial input the quadrature sum is reassociated so the result is a
polynomial again; on other input it returns a lazily evaluated image that
follows the breakpoints of its argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, floor
from typing import Callable, Optional

import numpy as np

from .errors import InputError
from .fourier import (TWO_PI, Multiplier, PeriodicFunction, PeriodicGrid, SampledFunction,
                      TrigPoly, analyze, apply_multiplier, wrap)
from .quadrature import _legendre

JACKSON_GRID = 16384
R_NODES = 64
T_NODES = 16

KINDS = ("steklov_T", "window_S", "symmetric_Phi", "smooth_R", "a_delta", "upsilon",
         "fejer", "vallee_poussin", "jackson_D", "difference", "partial_sum",
         "steklov_power", "identity_minus_T")


# ---------------------------------------------------------------------- #
@dataclass(frozen=True)
class OperatorTag:
    """
    Operator kind plus parameters.

    Kinds and parameters
    --------------------
    ``steklov_T(v)``, ``window_S(lam, tau, g)``, ``symmetric_Phi(h)``,
    ``smooth_R(v)``, ``a_delta(v, r)``, ``upsilon(l)``, ``fejer(n)``,
    ``vallee_poussin(n)``, ``jackson_D(n)``, ``difference(t, r)``,
    ``partial_sum(n)``, plus the helpers ``steklov_power(v, j)`` (``T_v^j``)
    and ``identity_minus_T(v, k)`` (``(I - T_v)^k``).
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown operator kind {self.kind!r}")
        _validate(self.kind, dict(self.params))

    @property
    def p(self) -> dict:
        return dict(self.params)

    def label(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}({args})"

    # constructors
    @classmethod
    def steklov_T(cls, v):
        return cls("steklov_T", (("v", float(v)),))

    @classmethod
    def window_S(cls, lam, tau=0.0, g=1.0):
        return cls("window_S", (("lam", float(lam)), ("tau", float(tau)), ("g", float(g))))

    @classmethod
    def symmetric_Phi(cls, h):
        return cls("symmetric_Phi", (("h", float(h)),))

    @classmethod
    def smooth_R(cls, v):
        return cls("smooth_R", (("v", float(v)),))

    @classmethod
    def a_delta(cls, v, r):
        return cls("a_delta", (("v", float(v)), ("r", int(r))))

    @classmethod
    def upsilon(cls, l):
        return cls("upsilon", (("l", float(l)),))

    @classmethod
    def fejer(cls, n):
        return cls("fejer", (("n", int(n)),))

    @classmethod
    def vallee_poussin(cls, n):
        return cls("vallee_poussin", (("n", int(n)),))

    @classmethod
    def jackson_D(cls, n):
        return cls("jackson_D", (("n", int(n)),))

    @classmethod
    def difference(cls, t, r=1):
        return cls("difference", (("t", float(t)), ("r", int(r))))

    @classmethod
    def partial_sum(cls, n):
        return cls("partial_sum", (("n", int(n)),))

    @classmethod
    def steklov_power(cls, v, j):
        return cls("steklov_power", (("v", float(v)), ("j", int(j))))

    @classmethod
    def identity_minus_T(cls, v, k):
        return cls("identity_minus_T", (("v", float(v)), ("k", int(k))))


def _validate(kind, p):
    def need(cond, msg):
        if not cond:
            raise InputError(f"{kind}: {msg}")

    if kind == "steklov_T":
        # defined for every v >= 0; the uniform norm bounds need v <= 1
        need(0.0 <= p["v"] < np.inf, "step v must be non-negative")
    if kind in ("smooth_R", "a_delta", "steklov_power", "identity_minus_T"):
        need(0.0 <= p["v"] <= 1.0, "step v must lie in [0, 1]")
    if kind == "symmetric_Phi":
        need(0.0 <= p["h"] <= 1.0, "h must lie in [0, 1]")
    if kind == "upsilon":
        need(0.0 <= p["l"] <= 1.0, "l must lie in [0, 1]")
    if kind == "window_S":
        need(p["lam"] >= 1.0, "lambda must be >= 1")
        need(p["g"] > 0, "tau-range exponent g must be positive")
        need(abs(p["tau"]) <= np.pi * p["lam"] ** (-p["g"]) + 1e-15, "|tau| must be <= pi lambda^-g")
    if kind in ("fejer", "jackson_D", "partial_sum"):
        need(p["n"] >= 0 if kind != "jackson_D" else p["n"] >= 1, "n out of range")
    if kind == "vallee_poussin":
        need(p["n"] >= 1, "n must be >= 1")
    if kind in ("a_delta", "difference"):
        need(p["r"] >= 1, "order r must be >= 1")
    if kind == "steklov_power":
        need(p["j"] >= 0, "power j must be >= 0")
    if kind == "identity_minus_T":
        need(p["k"] >= 0, "order k must be >= 0")


# ---------------------------------------------------------------------- #
# multipliers

def _steklov_m(k, v):
    k = np.asarray(k, dtype=float)
    if v == 0:
        return np.ones(k.shape, dtype=complex)
    z = 1j * k * v
    out = np.ones(k.shape, dtype=complex)
    nz = k != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _sinc(u):
    # sin(u)/u with the removable point filled
    return np.sinc(np.asarray(u, dtype=float) / np.pi)


def _smooth_R_m(k, v):
    if v == 0:
        return np.ones(np.shape(k), dtype=complex)
    t, w = _legendre(R_NODES)
    h = 0.75 * v + 0.25 * v * t            # nodes on [v/2, v]
    # Steklov multiplier (e^{ikh}-1)/(ikh) at each node h
    kk = np.asarray(k, dtype=float)[:, None]
    z = 1j * kk * h[None, :]
    vals = np.where(kk == 0, 1.0 + 0j, np.expm1(z) / np.where(z == 0, 1.0, z))
    return (2.0 / v) * (0.25 * v) * (vals @ w)


def multiplier(tag: OperatorTag, max_frequency: int) -> Multiplier:
    """Closed-form multiplier of ``tag`` on frequencies ``0..max_frequency``."""
    k = np.arange(max_frequency + 1, dtype=float)
    p = tag.p
    kind = tag.kind
    if kind == "steklov_T":
        m = _steklov_m(k, p["v"])
    elif kind == "steklov_power":
        m = _steklov_m(k, p["v"]) ** p["j"]
    elif kind == "identity_minus_T":
        m = (1.0 - _steklov_m(k, p["v"])) ** p["k"]
    elif kind == "window_S":
        m = np.exp(1j * k * p["tau"]) * _sinc(k / (2.0 * p["lam"]))
    elif kind == "symmetric_Phi":
        m = _sinc(k * p["h"]) + 0j
    elif kind == "smooth_R":
        m = _smooth_R_m(k, p["v"])
    elif kind == "a_delta":
        r = p["r"]
        m = 1.0 - (1.0 - _smooth_R_m(k, p["v"]) ** r) ** r
    elif kind == "upsilon":
        l = p["l"]
        if l == 0:
            m = np.ones(k.size, dtype=complex)
        else:
            z = 1j * k * l
            m = np.ones(k.size, dtype=complex)
            nz = k != 0
            # 2 (e^z - 1 - z) / z^2 computed stably for small z
            zz = z[nz]
            small = np.abs(zz) < 1e-3
            val = np.empty(zz.shape, dtype=complex)
            val[~small] = 2.0 * (np.expm1(zz[~small]) - zz[~small]) / zz[~small] ** 2
            zs = zz[small]
            val[small] = 1.0 + zs / 3.0 + zs ** 2 / 12.0 + zs ** 3 / 60.0
            m[nz] = val
    elif kind == "fejer":
        m = np.maximum(0.0, 1.0 - k / (p["n"] + 1.0)) + 0j
    elif kind == "vallee_poussin":
        n = p["n"]
        m = np.where(k <= n, 1.0, np.maximum(0.0, 2.0 - k / n)) + 0j
    elif kind == "jackson_D":
        J = jackson_kernel_coefficients(floor(p["n"] / 2) + 1)
        m = np.zeros(k.size, dtype=complex)
        # (1/pi) int J(t) e^{-ikt} dt = 2 c_k(J), and J is even
        c = J.complex_coefficients()
        upto = min(c.size, k.size)
        m[:upto] = 2.0 * c[:upto].real
    elif kind == "difference":
        m = (1.0 - np.exp(1j * k * p["t"])) ** p["r"]
    elif kind == "partial_sum":
        m = (k <= p["n"]).astype(complex)
    else:  # pragma: no cover - guarded by OperatorTag
        raise InputError(kind)
    return Multiplier(m)


# ---------------------------------------------------------------------- #
# Jackson kernel

def _fourth_power_ratio(x, n):
    """``(sin(n x/2) / sin(x/2))^4`` with the removable points filled."""
    x = wrap(np.asarray(x, dtype=float))
    s = np.sin(0.5 * x)
    out = np.empty(x.shape)
    small = np.abs(s) < 1e-7
    out[~small] = (np.sin(0.5 * n * x[~small]) / s[~small]) ** 4
    out[small] = float(n) ** 4
    return out


@lru_cache(maxsize=None)
def jackson_normalization(n: int) -> float:
    """``kappa_{2,n} = (1/pi) int (sin(nt/2)/sin(t/2))^4 dt`` by the
    trapezoid rule on the 16384 grid (exact for this degree)."""
    g = PeriodicGrid(JACKSON_GRID)
    return float(np.sum(_fourth_power_ratio(g.nodes, n)) * g.spacing / np.pi)


def jackson_kernel(n: int):
    """
    Samples of the normalized Jackson kernel on the 16384 grid.

    Returns
    -------
    (SampledFunction, float)
        Kernel samples (with an exact evaluator) and ``kappa_{2,n}``.
    """
    if n < 2:
        raise InputError("Jackson kernel needs n >= 2")
    return _jackson_samples(n), jackson_normalization(n)


class JacksonKernel(PeriodicFunction):
    """Pointwise ``J_{2,n}``."""

    breakpoints = ()

    def __init__(self, n: int):
        self.n = int(n)
        self.kappa = jackson_normalization(self.n)
        self.bandwidth = 2 * (self.n - 1)

    def __call__(self, x):
        return _fourth_power_ratio(x, self.n) / self.kappa


def _jackson_samples(n):
    g = PeriodicGrid(JACKSON_GRID)
    k = JacksonKernel(n)
    return SampledFunction(g, k(g.nodes), exact_rule=k)


@lru_cache(maxsize=None)
def jackson_kernel_coefficients(n: int) -> TrigPoly:
    """``J_{2,n}`` as a polynomial of degree ``2(n-1)``, from its samples."""
    return analyze(_jackson_samples(n)).with_degree(2 * (n - 1))


# ---------------------------------------------------------------------- #
# kernel representation for the quadrature path

@dataclass(frozen=True)
class KernelPiece:
    """``int_lo^hi kappa(t) f(x + t) dt`` with ``kappa`` smooth on the piece.

    ``bandwidth`` bounds the oscillation of ``kappa`` (0 for polynomial
    kernels); ``periodic`` marks a full-period trigonometric kernel."""

    lo: float
    hi: float
    kappa: Callable
    bandwidth: int = 0
    periodic: bool = False


@dataclass(frozen=True)
class KernelOperator:
    points: tuple = ()          # (shift, coefficient)
    pieces: tuple = ()

    def shifts(self):
        out = [s for s, _ in self.points]
        for pc in self.pieces:
            if not pc.periodic:
                out.extend([pc.lo, pc.hi])
        return out


def _bspline_pieces(v, j):
    """Density of a sum of ``j`` uniforms on ``[0, v]`` as polynomial pieces."""
    from scipy.interpolate import BSpline
    basis = BSpline.basis_element(np.arange(j + 1, dtype=float), extrapolate=False)

    def dens(t, basis=basis):
        u = np.asarray(t, dtype=float) / v
        return np.nan_to_num(basis(u)) / v

    return tuple(KernelPiece(i * v, (i + 1) * v, dens) for i in range(j))


def _fejer_kernel(n):
    def k(t):
        t = np.asarray(t, dtype=float)
        s = np.sin(0.5 * t)
        small = np.abs(s) < 1e-7
        out = np.empty(t.shape)
        out[~small] = (np.sin(0.5 * (n + 1) * t[~small]) / s[~small]) ** 2
        out[small] = (n + 1.0) ** 2
        return out / (TWO_PI * (n + 1))
    return k


def _dirichlet_kernel(n):
    def k(t):
        t = np.asarray(t, dtype=float)
        s = np.sin(0.5 * t)
        small = np.abs(s) < 1e-7
        out = np.empty(t.shape)
        out[~small] = np.sin((n + 0.5) * t[~small]) / s[~small]
        out[small] = 2 * n + 1.0
        return out / TWO_PI
    return k


def kernel_of(tag: OperatorTag) -> KernelOperator:
    """Kernel representation of every tag except ``a_delta`` (which is a
    polynomial in ``R_v`` and is composed layer by layer)."""
    p = tag.p
    kind = tag.kind
    if kind == "steklov_T":
        v = p["v"]
        if v == 0:
            return KernelOperator(((0.0, 1.0),))
        return KernelOperator((), (KernelPiece(0.0, v, lambda t, v=v: np.full(np.shape(t), 1.0 / v)),))
    if kind == "steklov_power":
        v, j = p["v"], p["j"]
        if v == 0 or j == 0:
            return KernelOperator(((0.0, 1.0),))
        return KernelOperator((), _bspline_pieces(v, j))
    if kind == "identity_minus_T":
        v, k = p["v"], p["k"]
        if v == 0:
            return KernelOperator(((0.0, 1.0 if k == 0 else 0.0),))
        pts = ((0.0, 1.0),)
        # sum_j C(k,j) (-1)^j T_v^j; the B-spline densities share the cells
        # [iv, (i+1)v], so merge them into one kernel per cell
        dens = [(comb(k, j) * (-1.0) ** j, _bspline_pieces(v, j)) for j in range(1, k + 1)]
        pieces = []
        for i in range(k):
            parts = [(c, pcs[i].kappa) for c, pcs in dens if i < len(pcs)]
            pieces.append(KernelPiece(i * v, (i + 1) * v,
                                      lambda t, parts=parts: sum(c * kap(t) for c, kap in parts)))
        return KernelOperator(pts, tuple(pieces))
    if kind == "window_S":
        lam, tau = p["lam"], p["tau"]
        return KernelOperator((), (KernelPiece(tau - 0.5 / lam, tau + 0.5 / lam,
                                               lambda t, lam=lam: np.full(np.shape(t), lam)),))
    if kind == "symmetric_Phi":
        h = p["h"]
        if h == 0:
            return KernelOperator(((0.0, 1.0),))
        return KernelOperator((), (KernelPiece(-h, h, lambda t, h=h: np.full(np.shape(t), 0.5 / h)),))
    if kind == "smooth_R":
        v = p["v"]
        if v == 0:
            return KernelOperator(((0.0, 1.0),))
        flat = (2.0 / v) * np.log(2.0)
        return KernelOperator((), (
            KernelPiece(0.0, 0.5 * v, lambda t, c=flat: np.full(np.shape(t), c)),
            KernelPiece(0.5 * v, v, lambda t, v=v: (2.0 / v) * np.log(v / np.asarray(t))),
        ))
    if kind == "upsilon":
        l = p["l"]
        if l == 0:
            return KernelOperator(((0.0, 1.0),))
        return KernelOperator((), (KernelPiece(0.0, l, lambda t, l=l: (2.0 / l ** 2) * (l - np.asarray(t))),))
    if kind == "fejer":
        n = p["n"]
        return KernelOperator((), (KernelPiece(-np.pi, np.pi, _fejer_kernel(n), n, True),))
    if kind == "vallee_poussin":
        n = p["n"]
        f2, f1 = _fejer_kernel(2 * n - 1), _fejer_kernel(n - 1)
        return KernelOperator((), (KernelPiece(-np.pi, np.pi, lambda t: 2.0 * f2(t) - f1(t), 2 * n, True),))
    if kind == "jackson_D":
        m = floor(p["n"] / 2) + 1
        J = JacksonKernel(m)
        return KernelOperator((), (KernelPiece(-np.pi, np.pi, lambda t, J=J: J(t) / np.pi, 2 * (m - 1), True),))
    if kind == "difference":
        t, r = p["t"], p["r"]
        return KernelOperator(tuple((j * t, comb(r, j) * (-1.0) ** j) for j in range(r + 1)))
    if kind == "partial_sum":
        n = p["n"]
        return KernelOperator((), (KernelPiece(-np.pi, np.pi, _dirichlet_kernel(n), n, True),))
    raise InputError(f"{kind} has no single-kernel representation")


# ---------------------------------------------------------------------- #
# quadrature evaluation

@lru_cache(maxsize=512)
def _composite_gl(lo, hi, panels):
    t, w = _legendre(T_NODES)
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (a + b) + 0.5 * (b - a) * t[None, :]).ravel()
    weights = (0.5 * (b - a) * w[None, :]).ravel()
    return nodes, weights


def _piece_rule(piece: KernelPiece, bandwidth: int):
    """t-nodes and kernel-weighted quadrature weights for one piece."""
    if piece.periodic:
        q = 1 << int(np.ceil(np.log2(2 * (bandwidth + piece.bandwidth) + 4)))
        q = max(q, 64)
        t = -np.pi + TWO_PI * np.arange(q) / q
        return t, np.full(q, TWO_PI / q) * piece.kappa(t)
    length = piece.hi - piece.lo
    panels = max(1, int(np.ceil(length * (bandwidth + piece.bandwidth + 1) / 6.0)))
    t, w = _composite_gl(piece.lo, piece.hi, panels)
    return t, w * piece.kappa(t)


def _quadrature_poly(op: KernelOperator, f: TrigPoly) -> TrigPoly:
    """Quadrature sum ``sum_j w_j f(x + t_j)`` for a polynomial ``f``.

    Reassociating ``sum_j w_j sum_k c_k e^{ik(x+t_j)}`` gives the moments
    ``mu_k = sum_j w_j e^{ik t_j}``; the image is ``sum_k c_k mu_k e^{ikx}``.
    """
    k = np.arange(f.degree + 1)
    mu = np.zeros(k.size, dtype=complex)
    for s, c in op.points:
        mu += c * np.exp(1j * k * s)
    for pc in op.pieces:
        t, wk = _piece_rule(pc, f.degree)
        mu += np.exp(1j * np.outer(k, t)) @ wk
    return TrigPoly.from_complex(f.complex_coefficients() * mu)


@lru_cache(maxsize=64)
def _graded_unit(panels: int, levels: int = 10):
    """Nodes/weights on ``[0, 1]``: ``panels`` uniform GL panels with the
    two outer ones replaced by panels graded geometrically toward 0 and 1."""
    t, w = _legendre(8)
    edges = [0.0]
    h = 1.0 / panels
    edges += [h * 0.5 ** j for j in range(levels, 0, -1)]
    edges += list(np.linspace(h, 1.0 - h, max(panels - 1, 1)))[0:]
    edges += [1.0 - h * 0.5 ** j for j in range(1, levels + 1)] + [1.0]
    edges = np.unique(np.asarray(edges))
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (a + b) + 0.5 * (b - a) * t[None, :]).ravel()
    weights = (0.5 * (b - a) * w[None, :]).ravel()
    return nodes, weights


class OperatorImage(PeriodicFunction):
    """Lazily evaluated ``op f`` for a non-polynomial ``f``."""

    def __init__(self, op: KernelOperator, f: PeriodicFunction, label: str = ""):
        self.op = op
        self.f = f
        self.name = label
        bps = set()
        for b in f.breakpoints:
            for s in op.shifts():
                bps.add(round(float(wrap(b - s)), 15))
        self.breakpoints = tuple(sorted(bps))
        self.bandwidth = f.bandwidth

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape)
        for s, c in self.op.points:
            out += c * self.f(x + s)
        bw = 64 if self.f.bandwidth is None else self.f.bandwidth
        for pc in self.op.pieces:
            out += self._piece(pc, x, bw)
        return out

    def _piece(self, pc: KernelPiece, x, bw):
        lo, hi = pc.lo, pc.hi
        brk = np.asarray(self.f.breakpoints, dtype=float)
        length = hi - lo
        panels = max(2, int(np.ceil(length * (bw + pc.bandwidth + 1) / 6.0)))
        if brk.size == 0:
            t, w = _composite_gl(lo, hi, panels)
            wk = w * pc.kappa(t)
            out = np.empty(x.shape)
            step = max(1, 2_000_000 // t.size)
            for i in range(0, x.size, step):
                xs = x[i:i + step]
                out[i:i + step] = self.f((xs[:, None] + t[None, :]).ravel()).reshape(xs.size, t.size) @ wk
            return out
        # cut [lo, hi] at every periodic image of a breakpoint, per x
        ms = np.arange(np.floor((lo - np.pi) / TWO_PI) - 1, np.ceil((hi + np.pi) / TWO_PI) + 2)
        u, uw = _graded_unit(max(1, int(np.ceil(panels / 2))))
        out = np.empty(x.shape)
        step = max(1, 200_000 // u.size)
        for i in range(0, x.size, step):
            xs = x[i:i + step]
            cand = (brk[None, :, None] - xs[:, None, None] + TWO_PI * ms[None, None, :]).reshape(xs.size, -1)
            inside = (cand > lo) & (cand < hi)
            cand = np.sort(np.where(inside, cand, np.inf), axis=1)
            width = int(inside.sum(axis=1).max())
            cand = np.minimum(cand[:, :width], hi)
            cuts = np.concatenate([np.full((xs.size, 1), lo), cand, np.full((xs.size, 1), hi)], axis=1)
            a, b = cuts[:, :-1], cuts[:, 1:]
            span = (b - a)[:, :, None]
            t = a[:, :, None] + span * u[None, None, :]
            wt = span * uw[None, None, :]
            vals = self.f((xs[:, None, None] + t).ravel()).reshape(t.shape)
            out[i:i + step] = np.sum(vals * wt * pc.kappa(t), axis=(1, 2))
        return out


# ---------------------------------------------------------------------- #
def apply(tag: OperatorTag, f, path: str = "auto"):
    """
    Apply an operator.

    Parameters
    ----------
    tag : OperatorTag
    f : TrigPoly, SampledFunction or PeriodicFunction
    path : {"auto", "multiplier", "quadrature"}
        ``auto`` uses multipliers for polynomials and quadrature otherwise.

    Returns
    -------
    Same kind as ``f`` (a polynomial stays a polynomial; sampled data is
    re-sampled from the exact image; other functions give a lazily
    evaluated image).
    """
    if path not in ("auto", "multiplier", "quadrature"):
        raise InputError(f"unknown path {path!r}")
    if isinstance(f, SampledFunction):
        img = apply(tag, f.exact_rule if f.exact_rule is not None else f.interpolant(), path)
        return SampledFunction(f.grid, img(f.grid.nodes), exact_rule=img)
    if path == "multiplier" or (path == "auto" and isinstance(f, TrigPoly)):
        if not isinstance(f, TrigPoly):
            raise InputError("the multiplier path needs a trigonometric polynomial")
        return apply_multiplier(f, multiplier(tag, f.degree))
    if tag.kind == "a_delta":
        return _a_delta_quadrature(tag, f)
    op = kernel_of(tag)
    if isinstance(f, TrigPoly):
        return _quadrature_poly(op, f)
    return OperatorImage(op, f, tag.label())


def _a_delta_quadrature(tag, f):
    """``I - (I - R_v^r)^r`` by repeated quadrature applications of ``R_v``."""
    if not isinstance(f, TrigPoly):
        raise InputError("a_delta by quadrature is composed on polynomials only")
    p = tag.p
    R = kernel_of(OperatorTag.smooth_R(p["v"]))
    r = p["r"]
    g = f
    for _ in range(r):
        u = g
        for _ in range(r):
            u = _quadrature_poly(R, u)
        g = g - u
    return f - g


def trig_derivative(p: TrigPoly, r: int = 1) -> TrigPoly:
    """Exact ``r``-th derivative of a polynomial."""
    if r < 1:
        raise InputError("derivative order must be >= 1")
    return p.derivative(r)


# ---------------------------------------------------------------------- #
# kernel-condition framework

@dataclass
class KernelSpec:
    """
    A family ``k_lambda`` of periodic kernels.

    Parameters
    ----------
    name : str
        ``fejer``, ``fejer_printed``, ``jackson``, ``poisson`` or ``custom``.
    rho : float
        Exponent of the tail region ``lambda^-rho <= |x| <= pi``.
    constants : tuple, optional
        Declared ``(C3, C4, C5)`` to verify.
    evaluator : callable, optional
        ``evaluator(lam, x)`` for custom kernels.
    table : sequence, optional
        Tabulated custom kernel (independent of lambda), periodic linear
        interpolation on a uniform grid starting at ``-pi``.
    """

    name: str
    rho: float
    constants: Optional[tuple] = None
    evaluator: Optional[Callable] = None
    table: Optional[tuple] = None

    def kernel(self, lam: float) -> Callable:
        if self.name == "fejer":
            return _fejer_kernel(int(round(lam)) - 1)
        if self.name == "fejer_printed":
            n = int(round(lam)) - 1
            base = _fejer_kernel(n)
            # (2/(n+1)) [sin((n+1)u/2)/sin(u/2)]^2
            return lambda x: base(x) * TWO_PI * (n + 1) * 2.0 / (n + 1)
        if self.name == "jackson":
            J = JacksonKernel(int(round(lam)))
            return lambda x: J(x) / np.pi
        if self.name == "poisson":
            r = 1.0 - 1.0 / lam
            return lambda x: (1 - r * r) / (TWO_PI * (1 - 2 * r * np.cos(x) + r * r))
        if self.name == "custom":
            if self.evaluator is not None:
                return lambda x: self.evaluator(lam, x)
            if self.table is not None:
                v = np.asarray(self.table, dtype=float)
                n = v.size
                def tab(x):
                    u = (wrap(x) + np.pi) / (TWO_PI / n)
                    j = np.floor(u).astype(int) % n
                    fr = u - np.floor(u)
                    return (1 - fr) * v[j] + fr * v[(j + 1) % n]
                return tab
        raise InputError(f"kernel {self.name!r} is not evaluable")

    @classmethod
    def builtin(cls, name: str) -> "KernelSpec":
        """
        Built-in kernels with proven constants.

        * ``fejer``: ``(1/(2 pi lam)) (sin(lam u/2)/sin(u/2))^2``, ``lam = n+1``;
          ``C3 = 1``, ``C4 = 1/(2 pi)``, ``C5 = pi/2`` from
          ``sin(u/2) >= u/pi``, with ``rho = 1/2``.
        * ``fejer_printed``: the same shape scaled to ``(2/lam)(...)^2``, i.e.
          ``4 pi`` times the above.
        * ``jackson``: ``J_{2,lam}/pi`` with ``C3 = 1``,
          ``C4 = (pi/2)^4/pi``, ``C5 = (2 sqrt 2/3) pi^3``, ``rho = 3/4``.
        * ``poisson``: radius ``1 - 1/lam``; ``C3 = 1``, ``C4 = 1/pi``,
          ``C5 = pi/2``, ``rho = 1/2`` (with ``rho = 1`` the tail bound
          grows linearly in ``lam``).
        """
        table = {
            "fejer": (0.5, (1.0, 1.0 / TWO_PI, 0.5 * np.pi)),
            "fejer_printed": (0.5, (4 * np.pi, 2.0, 2 * np.pi ** 2)),
            "jackson": (0.75, (1.0, (0.5 * np.pi) ** 4 / np.pi, 2 * np.sqrt(2) / 3 * np.pi ** 3)),
            "poisson": (0.5, (1.0, 1.0 / np.pi, 0.5 * np.pi)),
        }
        if name not in table:
            raise InputError(f"no built-in kernel {name!r}")
        rho, consts = table[name]
        return cls(name, rho, consts)


@dataclass
class KernelCheck:
    C3: float
    C4: float
    C5: float
    rho: float
    verdict: bool
    per_lambda: list = field(default_factory=list)
    diagnostics: str = ""

    def as_dict(self):
        return {"C3": self.C3, "C4": self.C4, "C5": self.C5, "rho": self.rho,
                "verdict": "pass" if self.verdict else "fail", "per_lambda": self.per_lambda,
                "diagnostics": self.diagnostics}


def check_kernel_conditions(spec: KernelSpec, lambdas=None) -> KernelCheck:
    """
    Smallest ``(C3, C4, C5)`` with ``int |k| <= C3``, ``sup |k| <= C4 lam``
    and ``|k(x)| <= C5`` on ``lam^-rho <= |x| <= pi``, over the sweep
    ``lam = 1, 2, 4, ..., 256``.

    The verdict compares against declared constants when given; otherwise
    it passes when every value is finite and the tail bound shows no
    growth in ``lam`` (log-log slope of the per-lambda tail maxima over the
    last four sweep values at most 0.25).
    """
    if lambdas is None:
        lambdas = [2.0 ** j for j in range(9)]
    rows = []
    for lam in lambdas:
        k = spec.kernel(lam)
        n = max(8192, int(64 * lam))
        n = 1 << int(np.ceil(np.log2(n)))
        x = -np.pi + TWO_PI * np.arange(n) / n
        vals = np.abs(np.asarray(k(x), dtype=float))
        if not np.all(np.isfinite(vals)):
            rows.append({"lambda": lam, "C3": np.inf, "C4": np.inf, "C5": np.inf})
            continue
        c3 = float(np.sum(vals) * TWO_PI / n)
        c4 = float(np.max(np.concatenate([vals, np.abs(k(np.array([0.0])))]))) / lam
        tail = np.abs(x) >= lam ** (-spec.rho)
        edge = np.array([lam ** (-spec.rho), -lam ** (-spec.rho)])
        c5 = float(max(np.max(vals[tail]) if tail.any() else 0.0, np.max(np.abs(k(edge)))))
        rows.append({"lambda": lam, "C3": c3, "C4": c4, "C5": c5})
    C3 = max(r["C3"] for r in rows)
    C4 = max(r["C4"] for r in rows)
    C5 = max(r["C5"] for r in rows)
    diag = ""
    if not all(np.isfinite([C3, C4, C5])):
        ok = False
        diag = "kernel samples are not finite"
    elif spec.constants is not None:
        d3, d4, d5 = spec.constants
        ok = C3 <= d3 * (1 + 1e-9) and C4 <= d4 * (1 + 1e-9) and C5 <= d5 * (1 + 1e-9)
        if not ok:
            diag = f"measured ({C3:.6g}, {C4:.6g}, {C5:.6g}) exceed declared {spec.constants}"
    else:
        last = rows[-4:]
        lx = np.log([r["lambda"] for r in last])
        ly = np.log([max(r["C5"], 1e-300) for r in last])
        slope = float(np.polyfit(lx, ly, 1)[0]) if len(last) > 1 else 0.0
        ok = slope <= 0.25
        if not ok:
            diag = f"tail bound grows like lambda^{slope:.3f}"
    return KernelCheck(C3, C4, C5, spec.rho, bool(ok), rows, diag)
