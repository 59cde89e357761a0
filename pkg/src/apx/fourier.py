"""
Periodic grids, trigonometric polynomials and Fourier multipliers.

Everything lives on the circle ``[-pi, pi)``.  A real trigonometric
polynomial of degree ``n`` is stored as

    f(x) = a0 + sum_{k=1}^n (a[k] cos(kx) + b[k] sin(kx))

so ``a0`` is the actual constant value (no hidden factor 1/2).  The
complex coefficients used internally are ``c_0 = a0`` and
``c_k = (a_k - i b_k) / 2`` for ``k >= 1``, giving
``f(x) = c_0 + 2 Re sum_k c_k exp(ikx)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AliasingError, InputError, MissingFrequencyError

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Map angles into ``[-pi, pi)``; values already inside are untouched
    (so tiny offsets from 0 survive)."""
    x = np.asarray(x, dtype=float)
    inside = (x >= -np.pi) & (x < np.pi)
    return np.where(inside, x, np.mod(x + np.pi, TWO_PI) - np.pi)


class PeriodicFunction:
    """
    Minimal protocol for 2pi-periodic functions evaluated pointwise.

    Subclasses implement ``__call__``.  ``breakpoints`` lists points in
    ``[-pi, pi)`` where the function or one of its low derivatives is not
    smooth; quadrature rules cut panels there.  ``bandwidth`` is the
    degree for band-limited functions and ``None`` otherwise.
    """

    breakpoints: tuple = ()
    bandwidth: Optional[int] = None

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, r: int = 1) -> "PeriodicFunction":
        raise InputError(f"{type(self).__name__} has no exact derivative rule")

    @property
    def has_derivative(self) -> bool:
        return type(self).derivative is not PeriodicFunction.derivative

    # scalar multiples and sums keep the protocol
    def __mul__(self, other):
        if np.isscalar(other):
            return ScaledFunction(self, float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return ScaledFunction(self, -1.0)

    def __add__(self, other):
        if isinstance(other, PeriodicFunction):
            return SumFunction((self, other))
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, PeriodicFunction):
            return SumFunction((self, ScaledFunction(other, -1.0)))
        return NotImplemented


class ScaledFunction(PeriodicFunction):
    def __init__(self, base: PeriodicFunction, factor: float):
        self.base = base
        self.factor = factor
        self.breakpoints = tuple(base.breakpoints)
        self.bandwidth = base.bandwidth

    def __call__(self, x):
        return self.factor * self.base(x)

    def derivative(self, r: int = 1):
        return ScaledFunction(self.base.derivative(r), self.factor)

    @property
    def has_derivative(self):
        return self.base.has_derivative


class SumFunction(PeriodicFunction):
    def __init__(self, terms: Sequence[PeriodicFunction]):
        self.terms = tuple(terms)
        pts = set()
        for t in self.terms:
            pts.update(float(b) for b in t.breakpoints)
        self.breakpoints = tuple(sorted(pts))
        bws = [t.bandwidth for t in self.terms]
        self.bandwidth = None if any(b is None for b in bws) else max(bws)

    def __call__(self, x):
        out = self.terms[0](x)
        for t in self.terms[1:]:
            out = out + t(x)
        return out

    def derivative(self, r: int = 1):
        return SumFunction([t.derivative(r) for t in self.terms])

    @property
    def has_derivative(self):
        return all(t.has_derivative for t in self.terms)


@dataclass(frozen=True)
class PeriodicGrid:
    """
    Uniform grid ``x_j = -pi + 2 pi j / n_points`` on ``[-pi, pi)``.

    Parameters
    ----------
    n_points : int
        Number of nodes, a power of two.
    """

    n_points: int

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 1 or n & (n - 1):
            raise InputError(f"grid size must be a power of two, got {n!r}")

    @property
    def nodes(self) -> np.ndarray:
        return -np.pi + TWO_PI * np.arange(self.n_points) / self.n_points

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_points

    @classmethod
    def at_least(cls, n_min: int) -> "PeriodicGrid":
        """Smallest power-of-two grid with at least ``n_min`` points."""
        n = 1
        while n < n_min:
            n *= 2
        return cls(n)


class TrigPoly(PeriodicFunction):
    """
    Real trigonometric polynomial in cosine/sine form.

    Parameters
    ----------
    a0 : float
        Constant term (the value of the mean, not twice it).
    a, b : array_like
        Cosine and sine coefficients for frequencies ``1..n``.
    degree : int, optional
        Declared degree.  Coefficient arrays are zero-padded to it.
    """

    def __init__(self, a0=0.0, a=(), b=(), degree: Optional[int] = None):
        a = np.atleast_1d(np.asarray(a, dtype=float)).ravel()
        b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
        n = max(len(a), len(b), 0 if degree is None else int(degree))
        self.a0 = float(a0)
        self.a = np.zeros(n)
        self.b = np.zeros(n)
        self.a[: len(a)] = a
        self.b[: len(b)] = b
        self.a.flags.writeable = False
        self.b.flags.writeable = False
        if not (np.isfinite(self.a0) and np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise InputError("trigonometric polynomial coefficients must be finite")

    breakpoints = ()

    @property
    def degree(self) -> int:
        return len(self.a)

    @property
    def bandwidth(self) -> int:
        return self.degree

    @property
    def effective_degree(self) -> int:
        """Index of the last nonzero coefficient pair (0 for constants)."""
        nz = np.flatnonzero((self.a != 0) | (self.b != 0))
        return int(nz[-1]) + 1 if nz.size else 0

    # ------------------------------------------------------------------ #
    # constructors and conversions
    @classmethod
    def zero(cls, degree: int = 0) -> "TrigPoly":
        return cls(0.0, degree=degree)

    @classmethod
    def constant(cls, value: float, degree: int = 0) -> "TrigPoly":
        return cls(value, degree=degree)

    @classmethod
    def mode(cls, k: int, kind: str = "cos", amplitude: float = 1.0) -> "TrigPoly":
        """``amplitude * cos(kx)`` or ``amplitude * sin(kx)``."""
        if k == 0:
            return cls(amplitude if kind == "cos" else 0.0)
        a = np.zeros(k)
        b = np.zeros(k)
        (a if kind == "cos" else b)[k - 1] = amplitude
        return cls(0.0, a, b)

    @classmethod
    def from_complex(cls, c) -> "TrigPoly":
        """Build from ``c_0..c_n`` with ``c_k = (a_k - i b_k)/2``."""
        c = np.asarray(c, dtype=complex)
        return cls(c[0].real, 2.0 * c[1:].real, -2.0 * c[1:].imag)

    @classmethod
    def random(cls, degree: int, rng: np.random.Generator, decay: float = 0.0,
               constant: bool = True) -> "TrigPoly":
        """Gaussian coefficients scaled by ``(1+k)^-decay``."""
        k = np.arange(1, degree + 1)
        scale = (1.0 + k) ** (-decay)
        a0 = rng.standard_normal() if constant else 0.0
        a = rng.standard_normal(degree) * scale
        b = rng.standard_normal(degree) * scale
        return cls(a0, a, b)

    def complex_coefficients(self) -> np.ndarray:
        c = np.empty(self.degree + 1, dtype=complex)
        c[0] = self.a0
        c[1:] = 0.5 * (self.a - 1j * self.b)
        return c

    def with_degree(self, n: int) -> "TrigPoly":
        """Truncate (partial sum) or zero-pad to degree ``n``."""
        return TrigPoly(self.a0, self.a[:n], self.b[:n], degree=n)

    # ------------------------------------------------------------------ #
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = self.complex_coefficients()
        if self.degree == 0:
            return np.full(x.shape, self.a0)
        z = np.exp(1j * x)
        acc = np.full(x.shape, c[-1], dtype=complex)
        for ck in c[-2:0:-1]:
            acc = acc * z + ck
        return self.a0 + 2.0 * (acc * z).real

    def derivative(self, r: int = 1) -> "TrigPoly":
        """Exact term-wise ``r``-th derivative; degree is preserved."""
        if r < 0:
            raise InputError("derivative order must be non-negative")
        c = self.complex_coefficients()
        k = np.arange(self.degree + 1)
        c = c * (1j * k) ** r
        if r > 0:
            c[0] = 0.0
        return TrigPoly.from_complex(c)

    @property
    def has_derivative(self):
        return True

    def l2_norm(self) -> float:
        """Unweighted L2 norm on ``[-pi, pi)`` from Parseval."""
        return float(np.sqrt(2 * np.pi * self.a0 ** 2 + np.pi * np.sum(self.a ** 2 + self.b ** 2)))

    # ------------------------------------------------------------------ #
    def _binary(self, other, sign):
        if np.isscalar(other):
            other = TrigPoly(float(other))
        if not isinstance(other, TrigPoly):
            return NotImplemented
        n = max(self.degree, other.degree)
        p, q = self.with_degree(n), other.with_degree(n)
        return TrigPoly(p.a0 + sign * q.a0, p.a + sign * q.a, p.b + sign * q.b)

    def __add__(self, other):
        if isinstance(other, PeriodicFunction) and not isinstance(other, TrigPoly):
            return SumFunction((self, other))
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PeriodicFunction) and not isinstance(other, TrigPoly):
            return SumFunction((self, ScaledFunction(other, -1.0)))
        return self._binary(other, -1.0)

    def __rsub__(self, other):
        return (-self)._binary(other, 1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            s = float(other)
            return TrigPoly(s * self.a0, s * self.a, s * self.b)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def allclose(self, other: "TrigPoly", atol: float = 1e-12) -> bool:
        n = max(self.degree, other.degree)
        p, q = self.with_degree(n), other.with_degree(n)
        return (abs(p.a0 - q.a0) <= atol and np.allclose(p.a, q.a, rtol=0, atol=atol)
                and np.allclose(p.b, q.b, rtol=0, atol=atol))

    def __repr__(self):
        return f"TrigPoly(degree={self.degree}, a0={self.a0:.6g})"


class SampledFunction(PeriodicFunction):
    """
    Samples on a uniform grid, optionally backed by an exact evaluator.

    Parameters
    ----------
    grid : PeriodicGrid
    values : array_like
        Samples at ``grid.nodes``.
    exact_rule : PeriodicFunction, optional
        Closed-form evaluator (a named test-function family).  When present
        it is used for off-grid evaluation; otherwise the interpolating
        trigonometric polynomial is.
    """

    def __init__(self, grid: PeriodicGrid, values, exact_rule: Optional[PeriodicFunction] = None):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_points,):
            raise InputError("sample count does not match the grid")
        if not np.all(np.isfinite(values)):
            raise InputError("samples must be finite")
        self.grid = grid
        self.values = values.copy()
        self.values.flags.writeable = False
        self.exact_rule = exact_rule
        self._interp = None
        if exact_rule is not None:
            self.breakpoints = tuple(exact_rule.breakpoints)
            self.bandwidth = exact_rule.bandwidth
        else:
            self.breakpoints = ()
            self.bandwidth = grid.n_points // 2 - 1

    @classmethod
    def from_function(cls, f: PeriodicFunction, grid: PeriodicGrid) -> "SampledFunction":
        return cls(grid, f(grid.nodes), exact_rule=f)

    def interpolant(self) -> TrigPoly:
        if self._interp is None:
            self._interp = analyze(self)
        return self._interp

    def __call__(self, x):
        if self.exact_rule is not None:
            return self.exact_rule(x)
        return self.interpolant()(x)

    def derivative(self, r: int = 1):
        if self.exact_rule is not None:
            return self.exact_rule.derivative(r)
        return self.interpolant().derivative(r)

    @property
    def has_derivative(self):
        return self.exact_rule is None or self.exact_rule.has_derivative


@dataclass(frozen=True)
class Multiplier:
    """
    Fourier multiplier ``m[k]`` acting on frequencies ``|k| <= len(m)-1``.

    Negative frequencies receive ``conj(m[k])`` so real functions stay real.
    """

    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex).ravel()
        if m.size == 0:
            raise InputError("empty multiplier")
        if abs(m[0].imag) > 1e-14 * max(1.0, abs(m[0])):
            raise InputError("multiplier at frequency 0 must be real")
        m = m.copy()
        m[0] = m[0].real
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @property
    def max_frequency(self) -> int:
        return self.m.size - 1

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        k = min(self.m.size, other.m.size)
        return Multiplier(self.m[:k] * other.m[:k])

    def __pow__(self, r: int) -> "Multiplier":
        return Multiplier(self.m ** r)


def analyze(f) -> TrigPoly:
    """
    Interpolatory trigonometric polynomial of grid samples.

    Parameters
    ----------
    f : SampledFunction
        Samples on a grid with at least 4 points.

    Returns
    -------
    TrigPoly
        Degree ``n_points/2 - 1``; the Nyquist mode is dropped.
    """
    n = f.grid.n_points
    if n < 4:
        raise InputError("analysis needs at least 4 samples")
    v = np.asarray(f.values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InputError("samples must be finite")
    spec = np.fft.rfft(v) / n
    k = np.arange(spec.size)
    # nodes start at -pi, so frequency k picks up a factor (-1)^k
    c = spec * np.where(k % 2, -1.0, 1.0)
    return TrigPoly.from_complex(c[: n // 2])


def synthesize(p: TrigPoly, grid: PeriodicGrid) -> SampledFunction:
    """Samples of ``p`` on ``grid``; requires ``n_points >= 2*degree + 2``."""
    n = grid.n_points
    if n < 2 * p.degree + 2:
        raise AliasingError(f"grid of {n} points cannot carry degree {p.degree}")
    c = p.complex_coefficients()
    spec = np.zeros(n // 2 + 1, dtype=complex)
    k = np.arange(c.size)
    spec[: c.size] = n * c * np.where(k % 2, -1.0, 1.0)
    return SampledFunction(grid, np.fft.irfft(spec, n=n), exact_rule=p)


def apply_multiplier(p: TrigPoly, m: Multiplier) -> TrigPoly:
    """Multiply ``c_k`` by ``m[k]`` for every frequency of ``p``."""
    if m.max_frequency < p.degree:
        raise MissingFrequencyError(
            f"multiplier covers |k| <= {m.max_frequency}, polynomial has degree {p.degree}")
    c = p.complex_coefficients() * m.m[: p.degree + 1]
    return TrigPoly.from_complex(c)
