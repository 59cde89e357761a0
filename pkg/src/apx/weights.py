"""
Periodic weights and numerical estimates of their class constants.

Supported families are constants, single power singularities
``c |x - x0|^alpha``, products of such factors and tabulated samples with
periodic linear interpolation.  Distances are periodic, so a factor at
``x0`` also has a (harmless) kink at the antipode ``x0 + pi``.

The Muckenhoupt constant, the ``S_1`` average bound, the doubling
constant and the ``A_infinity`` fit are all computed from one table of
cumulative integrals on ``2**15`` dyadic cells.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ClassificationError, InputError, PoleError, WeightError
from .fourier import TWO_PI, wrap
from .quadrature import GRADING_LEVELS, _graded_half, _legendre, rule_for

DYADIC_DEPTH = 15          # knots of the cumulative table
FINEST_WIDTH_LEVEL = 14    # widths 2 pi 2^-l, l = 0..14
C8_GRID = 16384
SPLIT_POSITIONS = 128       # relative positions of a singular point inside a test interval
OFF_KNOT_STRIDE = 4         # off-knot singular points use every 4th position (slow path)
ZERO_EXCLUSION = 1e-6


def periodic_distance(x, x0):
    # wrap only when needed: wrap() loses tiny offsets to round-off
    d = np.asarray(x, dtype=float) - x0
    return np.abs(np.where(np.abs(d) <= np.pi, d, wrap(d)))


@dataclass(frozen=True)
class Weight:
    """
    A 2pi-periodic weight.

    Build instances with :meth:`constant`, :meth:`power`, :meth:`product`,
    :meth:`tabulated` or :meth:`from_descriptor`.

    Attributes
    ----------
    family : str
        ``constant``, ``power``, ``product`` or ``tabulated``.
    factors : tuple of (float, float)
        ``(location, exponent)`` for the power families.
    scale : float
        Positive multiplicative constant.
    table : tuple of float
        Samples on a uniform grid for the tabulated family.
    """

    family: str
    factors: tuple = ()
    scale: float = 1.0
    table: tuple = ()
    cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, compare=False, hash=False, repr=False)

    # ------------------------------------------------------------------ #
    @classmethod
    def constant(cls, c: float = 1.0) -> "Weight":
        if not c > 0:
            raise WeightError("constant weight must be positive")
        return cls("constant", (), float(c))

    @classmethod
    def power(cls, x0: float = 0.0, alpha: float = 0.0, c: float = 1.0) -> "Weight":
        """``c * |x - x0|^alpha`` with periodic distance."""
        _check_exponents([(x0, alpha)])
        if not c > 0:
            raise WeightError("weight scale must be positive")
        return cls("power", ((float(wrap(x0)), float(alpha)),), float(c))

    @classmethod
    def product(cls, factors, c: float = 1.0) -> "Weight":
        """``c * prod |x - x_i|^beta_i``."""
        factors = [(float(wrap(x)), float(b)) for x, b in factors]
        _check_exponents(factors)
        locs = [x for x, _ in factors]
        if len(set(np.round(locs, 12))) != len(locs):
            raise WeightError("product factors must sit at distinct points")
        if not c > 0:
            raise WeightError("weight scale must be positive")
        return cls("product", tuple(factors), float(c))

    @classmethod
    def tabulated(cls, values) -> "Weight":
        """Periodic piecewise-linear weight through samples on a uniform grid
        starting at ``-pi``."""
        v = np.asarray(values, dtype=float).ravel()
        if v.size < 2 or not np.all(np.isfinite(v)):
            raise WeightError("tabulated weight needs at least two finite samples")
        if np.any(v < 0):
            raise WeightError("tabulated weight has negative values")
        if np.all(v == 0):
            raise WeightError("tabulated weight vanishes identically")
        return cls("tabulated", (), 1.0, tuple(float(t) for t in v))

    @classmethod
    def from_descriptor(cls, d: dict) -> "Weight":
        """
        Parse a JSON-style descriptor, e.g.
        ``{"family": "power", "x0": 0, "alpha": 0.5}``.
        """
        fam = d.get("family")
        c = float(d.get("c", 1.0))
        if fam == "constant":
            return cls.constant(c)
        if fam == "power":
            return cls.power(float(d.get("x0", 0.0)), float(d["alpha"]), c)
        if fam == "product":
            return cls.product([tuple(f) for f in d["factors"]], c)
        if fam == "tabulated":
            return cls.tabulated(d["values"])
        raise InputError(f"unknown weight family {fam!r}")

    def descriptor(self) -> dict:
        if self.family == "constant":
            return {"family": "constant", "c": self.scale}
        if self.family == "power":
            (x0, a), = self.factors
            return {"family": "power", "x0": x0, "alpha": a, "c": self.scale}
        if self.family == "product":
            return {"family": "product", "factors": [list(f) for f in self.factors], "c": self.scale}
        return {"family": "tabulated", "values": list(self.table)}

    def label(self) -> str:
        if self.family == "constant":
            return "1" if self.scale == 1 else f"{self.scale:g}"
        if self.family == "tabulated":
            return f"tabulated[{len(self.table)}]"
        parts = [f"|x-{x:g}|^{a:g}" if x else f"|x|^{a:g}" for x, a in self.factors]
        s = "*".join(parts)
        return s if self.scale == 1 else f"{self.scale:g}*{s}"

    # ------------------------------------------------------------------ #
    @property
    def is_unit(self) -> bool:
        return self.family == "constant" and self.scale == 1.0

    @property
    def singular_points(self) -> tuple:
        """``(location, exponent)`` of every point where the weight is not
        smooth in the power-law sense (poles and zeros)."""
        if self.family in ("power", "product"):
            return tuple((x, a) for x, a in self.factors if a != 0.0)
        if self.family == "tabulated":
            return tuple((x, 1.0) for x in self._table_zeros())
        return ()

    @property
    def zeros(self) -> tuple:
        return tuple(x for x, a in self.singular_points if a > 0)

    @property
    def cut_points(self) -> tuple:
        """Points where quadrature panels should be cut."""
        pts = []
        for x, a in self.singular_points:
            pts.extend([x, float(wrap(x + np.pi))])
        if self.family == "tabulated" and len(self.table) <= 256:
            n = len(self.table)
            pts.extend(float(t) for t in -np.pi + TWO_PI * np.arange(n) / n)
        return tuple(pts)

    def _table_zeros(self):
        n = len(self.table)
        v = np.asarray(self.table)
        return [float(-np.pi + TWO_PI * j / n) for j in np.flatnonzero(v == 0)]

    def __call__(self, x):
        return eval_weight(self, x)

    def power_of(self, s: float) -> "Weight":
        """The weight ``gamma ** s``.  No integrability check is made, so the
        result may be non-integrable (quadrature then refuses it)."""
        if self.family == "constant":
            return Weight("constant", (), self.scale ** s)
        if self.family in ("power", "product"):
            return Weight("product", tuple((x, a * s) for x, a in self.factors), self.scale ** s)
        # tabulated powers are tabulated again on a fine grid
        n = max(4096, len(self.table))
        x = -np.pi + TWO_PI * np.arange(n) / n
        with np.errstate(divide="ignore"):
            v = eval_weight(self, x) ** s
        if not np.all(np.isfinite(v)):
            raise WeightError("power of a tabulated weight with zeros is not finite")
        return Weight("tabulated", (), 1.0, tuple(v))


def _check_exponents(factors):
    for x, a in factors:
        if not np.isfinite(a):
            raise WeightError("weight exponent must be finite")
        if a <= -1.0:
            raise WeightError(
                f"exponent {a:g} at x0={x:g} is not integrable: the average bound "
                f"and the A_p condition both require exponent > -1")


def eval_weight(w: Weight, x):
    """
    Pointwise weight values with periodic extension.

    Raises
    ------
    PoleError
        If ``x`` hits a singular point with negative exponent.
    """
    x = np.asarray(x, dtype=float)
    if w.family == "constant":
        return np.full(x.shape, w.scale)
    if w.family == "tabulated":
        v = np.asarray(w.table)
        n = v.size
        u = (wrap(x) + np.pi) / (TWO_PI / n)
        j = np.floor(u).astype(int) % n
        frac = u - np.floor(u)
        return (1 - frac) * v[j] + frac * v[(j + 1) % n]
    out = np.full(x.shape, w.scale)
    for x0, a in w.factors:
        d = periodic_distance(x, x0)
        if a < 0 and np.any(d == 0):
            raise PoleError(f"weight has a pole at x={x0:g}")
        out = out * d ** a
    return out


# ---------------------------------------------------------------------- #
# integrals of a weight over arbitrary segments and dyadic cells

def segment_integral(w: Weight, lo: float, hi: float) -> float:
    """``int_lo^hi w`` for ``lo < hi`` (not wrapped), graded at every cut."""
    if hi <= lo:
        return 0.0
    sing = {}
    cuts = [lo, hi]
    for x, a in w.singular_points:
        for img in x + TWO_PI * np.arange(np.floor((lo - x) / TWO_PI), np.ceil((hi - x) / TWO_PI) + 1):
            if lo <= img <= hi:
                cuts.append(float(img))
                sing[float(img)] = a
    for x in w.cut_points:
        for img in x + TWO_PI * np.arange(np.floor((lo - x) / TWO_PI), np.ceil((hi - x) / TWO_PI) + 1):
            if lo < img < hi:
                cuts.append(float(img))
    cuts = sorted(set(cuts))
    nodes, weights = [], []
    span = hi - lo
    for u0, u1 in zip(cuts[:-1], cuts[1:]):
        if u1 - u0 <= 1e-15 * max(1.0, span):
            continue
        half = 0.5 * (u1 - u0)
        hmax = max(half, 1e-300)
        _graded_half(u0, half, +1, sing.get(u0, 0.0), hmax, nodes, weights)
        _graded_half(u1, half, -1, sing.get(u1, 0.0), hmax, nodes, weights)
    x = np.concatenate(nodes)
    return float(np.dot(np.concatenate(weights), eval_weight(w, x)))


class CumulativeTable:
    """Cumulative integrals of a weight at ``2**depth + 1`` dyadic knots."""

    def __init__(self, w: Weight, depth: int = DYADIC_DEPTH):
        m = 1 << depth
        self.weight = w
        self.m = m
        self.knots = -np.pi + TWO_PI * np.arange(m + 1) / m
        h = TWO_PI / m
        t, gw = _legendre(8)
        x = self.knots[:-1, None] + 0.5 * h * (t[None, :] + 1.0)
        special = np.zeros(m, dtype=bool)
        for p in w.cut_points:
            u = (wrap(p) + np.pi) / h
            j = int(np.floor(u + 1e-9))
            for cell in (j - 1, j, j + 1):
                special[cell % m] = True
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = eval_weight(w, x) if not special.any() else _safe_eval(w, x, special)
        cells = 0.5 * h * (vals @ gw)
        for j in np.flatnonzero(special):
            cells[j] = segment_integral(w, self.knots[j], self.knots[j + 1])
        self.cells = cells
        self.cum = np.concatenate([[0.0], np.cumsum(cells)])
        self.total = float(self.cum[-1])

    def interval(self, start, length):
        """Integrals over ``[knot[start], knot[start+length]]`` (periodic),
        with integer knot indices."""
        start = np.asarray(start) % self.m
        end = start + np.asarray(length)
        full, rem = np.divmod(end, self.m)
        return self.cum[rem] - self.cum[start] + full * self.total

    def at(self, x: float) -> float:
        """Cumulative integral from ``-pi`` to arbitrary ``x`` in ``[-pi, pi)``."""
        h = TWO_PI / self.m
        j = int(np.floor((x + np.pi) / h))
        j = min(max(j, 0), self.m - 1)
        return float(self.cum[j] + segment_integral(self.weight, self.knots[j], x))

    def arbitrary(self, lo: float, hi: float) -> float:
        """Integral over ``[lo, hi]`` with ``hi - lo <= 2 pi`` (periodic)."""
        a = float(wrap(lo))
        b = a + (hi - lo)
        if b <= np.pi:
            return self.at_or_end(b) - self.at(a)
        return self.total - self.at(a) + self.at(float(wrap(b)))

    def at_or_end(self, x):
        return self.total if x >= np.pi else self.at(x)


def _safe_eval(w, x, special):
    vals = np.zeros(x.shape)
    ok = ~special
    vals[ok] = eval_weight(w, x[ok])
    return vals


def _table(w: Weight, key) -> CumulativeTable:
    tabs = w.cache.setdefault("tables", {})
    if key not in tabs:
        with w._lock:
            if key not in tabs:
                target = w if key == 1.0 else w.power_of(key)
                tabs[key] = CumulativeTable(target)
    return tabs[key]


# ---------------------------------------------------------------------- #
@dataclass
class Estimate:
    """A finite-family estimate of a supremum."""

    value: Optional[float]
    refinement_trend: float
    per_level: tuple = ()
    in_class: bool = True
    note: str = ""

    def as_dict(self):
        return {"value": self.value, "refinement_trend": self.refinement_trend,
                "in_class": self.in_class, "note": self.note}


def _split_singular(w: Weight, m: int):
    """Singular points as (knot indices, off-knot locations)."""
    h = TWO_PI / m
    knots, off = [], []
    for x, _ in w.singular_points:
        u = (wrap(x) + np.pi) / h
        if abs(u - round(u)) > 1e-9:
            off.append(x)
        else:
            knots.append(int(round(u)) % m)
    return knots, off


def _level_intervals(level: int, m: int):
    width = m >> level
    step = max(width // 2, 1)
    starts = np.arange(0, m, step)
    return starts, width


def _sup_by_level(w, functional, tables, extra=None):
    """Apply ``functional(integrals..., length)`` to the dyadic family and
    return the running maximum per width level.

    Besides the half-overlapping dyadic intervals, every width level also
    tries intervals that contain a singular point at ``SPLIT_POSITIONS``
    relative positions; for power weights the supremum sits on such an
    off-centre interval.
    """
    m = tables[0].m
    h = TWO_PI / m
    levels = []
    running = 0.0
    knots, offd = _split_singular(w, m)
    fractions = np.arange(SPLIT_POSITIONS + 1) / SPLIT_POSITIONS
    for level in range(FINEST_WIDTH_LEVEL + 1):
        starts, width = _level_intervals(level, m)
        ints = [t.interval(starts, width) for t in tables]
        vals = functional(*ints, width * h)
        best = float(np.max(vals))
        length = width * h
        offsets = np.unique(np.round(fractions * width).astype(int))
        for k in knots:
            ii = [t.interval(k - offsets, width) for t in tables]
            best = max(best, float(np.max(functional(*ii, length))))
        for s in offd:
            for f in fractions[::OFF_KNOT_STRIDE]:
                lo = s - f * length
                ii = [t.arbitrary(lo, lo + length) for t in tables]
                best = max(best, float(functional(*[np.asarray(v) for v in ii], length)))
        running = max(running, best)
        levels.append(running)
    return levels


def muckenhoupt_constant(w: Weight, p: float) -> Estimate:
    """
    Finite-family estimate of the Muckenhoupt ``A_p`` constant.

    The supremum of ``(w(J)/|J|) * ((1/|J|) int_J w^(-1/(p-1)))^(p-1)`` is
    taken over intervals of width ``2 pi 2^-l`` (``l = 0..14``) starting at
    multiples of half their width, plus intervals of the same widths that
    contain a singular point at evenly spaced relative positions.

    Returns
    -------
    Estimate
        ``value`` is ``None`` and ``in_class`` false when the dual weight is
        not integrable; ``refinement_trend`` is the ratio of the estimates
        at the two finest levels (``inf`` on divergence).
    """
    if not 1 < p < np.inf:
        raise InputError("the A_p constant needs 1 < p < inf")
    key = ("A_p", float(p))
    if key in w.cache:
        return w.cache[key]
    dual = -1.0 / (p - 1.0)
    bad = [(x, a) for x, a in w.singular_points if a * dual <= -1.0]
    if bad:
        x, a = bad[0]
        est = Estimate(None, np.inf, (), False,
                       f"dual weight exponent {a * dual:g} <= -1 at x={x:g}: exponent {a:g} >= p-1")
    else:
        tw = _table(w, 1.0)
        ts = _table(w, dual)

        def functional(gi, si, length):
            return (gi / length) * (si / length) ** (p - 1.0)

        levels = _sup_by_level(w, functional, [tw, ts])
        value = levels[-1]
        trend = levels[-1] / levels[-2]
        in_class = bool(np.isfinite(value) and trend < 1.5)
        est = Estimate(value, trend, tuple(levels), in_class)
        if value < 1.0 - 1e-9:
            raise ClassificationError(f"A_p estimate {value} below 1 violates Jensen")
    w.cache.setdefault(key, est)
    return w.cache[key]


def average_bound(w: Weight) -> Estimate:
    """
    Finite-family estimate of ``sup_J w(J)/|J|``.

    For weights with a pole this grows like a negative power of the finest
    width; the trend reports it.  The ``S_1`` verdict itself for power
    families follows the exponent criterion (see :func:`classify_weight`).
    """
    key = ("avg",)
    if key in w.cache:
        return w.cache[key]
    tw = _table(w, 1.0)
    levels = _sup_by_level(w, lambda gi, length: gi / length, [tw])
    est = Estimate(levels[-1], levels[-1] / levels[-2], tuple(levels), True)
    w.cache.setdefault(key, est)
    return w.cache[key]


def lower_bound_c8(w: Weight) -> float:
    """Minimum of the weight on a 16384-point grid, skipping ``1e-6`` balls
    around declared zeros.  Declared zeros give 0."""
    if w.zeros:
        return 0.0
    x = -np.pi + TWO_PI * np.arange(C8_GRID) / C8_GRID
    keep = np.ones(x.size, dtype=bool)
    for x0, a in w.singular_points:
        keep &= periodic_distance(x, x0) > ZERO_EXCLUSION
    return float(np.min(eval_weight(w, x[keep])))


def l1_norm(w: Weight) -> float:
    if "l1" not in w.cache:
        w.cache.setdefault("l1", _table(w, 1.0).total)
    return w.cache["l1"]


def doubling_constant(w: Weight) -> float:
    """Largest ``w(2I)/w(I)`` over dyadic intervals of widths ``2 pi 2^-l``,
    ``l = 1..14``."""
    if "C6" in w.cache:
        return w.cache["C6"]
    t = _table(w, 1.0)
    best = 0.0
    for level in range(1, FINEST_WIDTH_LEVEL + 1):
        starts, width = _level_intervals(level, t.m)
        inner = t.interval(starts, width)
        outer = t.interval(starts - width // 2, 2 * width)
        best = max(best, float(np.max(outer / inner)))
    w.cache.setdefault("C6", best)
    return w.cache["C6"]


def a_infinity_fit(w: Weight) -> dict:
    """
    Fit ``w(E)/w(I) <= C7 (|E|/|I|)^p0`` on sampled pairs.

    Two variants are reported: ``containing`` samples ``E >= I`` (I plus
    unions of its siblings inside the ancestor three levels up) and
    ``contained`` samples ``E <= I`` (unions of the eight grandchildren
    three levels down).  ``p0`` is the least-squares slope in log-log
    coordinates and ``C7`` the smallest constant making every sample hold
    with that slope.
    """
    if "A_inf" in w.cache:
        return w.cache["A_inf"]
    t = _table(w, 1.0)
    m = t.m
    out = {}
    for variant in ("containing", "contained"):
        lx, ly = [], []
        for level in (3, 6, 9, 12):
            width = m >> level
            sub = width // 8
            starts = np.arange(0, m, width)
            gi = t.interval(starts, width)
            if variant == "contained":
                # single grandchildren, then prefixes of 2..8 grandchildren
                pieces = [(j, 1) for j in range(8)] + [(0, c) for c in range(2, 9)]
                for offset, count in pieces:
                    ge = t.interval(starts + offset * sub, count * sub)
                    lx.append(np.full(starts.size, np.log(count / 8.0)))
                    ly.append(np.log(ge / gi))
            else:
                anc = (starts // (8 * width)) * (8 * width)
                pos = (starts - anc) // width
                for count in range(1, 8):
                    # I plus the next `count` siblings, cyclically inside the ancestor
                    ge = gi.copy()
                    for s in range(1, count + 1):
                        sib = anc + ((pos + s) % 8) * width
                        ge = ge + t.interval(sib, width)
                    lx.append(np.full(starts.size, np.log(1.0 + count)))
                    ly.append(np.log(ge / gi))
        lx = np.concatenate(lx)
        ly = np.concatenate(ly)
        A = np.column_stack([np.ones_like(lx), lx])
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        p0 = float(coef[1])
        c7 = float(np.exp(np.max(ly - p0 * lx)))
        out[variant] = {"C7": c7, "p0": p0, "samples": int(lx.size)}
    w.cache.setdefault("A_inf", out)
    return w.cache["A_inf"]


def auxiliary_exponent(w: Weight, p: float) -> float:
    """An exponent ``s`` in ``(1, p)`` with the weight in ``A_s``.

    Power factors ``|x|^alpha`` lie in ``A_s`` iff ``alpha < s - 1``; the
    midpoint between ``max(1, 1 + max alpha)`` and ``p`` is used.
    """
    top = max([a for _, a in w.singular_points] + [0.0])
    lo = max(1.0, 1.0 + top)
    if not lo < p:
        raise ClassificationError(f"no auxiliary exponent below p={p:g}")
    return 0.5 * (lo + p)


@dataclass
class ClassReport:
    p: float
    weight: str
    a_p: Optional[dict]
    s1: Optional[dict]
    a_infinity: dict
    doubling_C6: float
    C8: float
    l1_norm: float
    admissible: bool
    reason: str = ""

    def as_dict(self):
        return {
            "p": "inf" if self.p == np.inf else self.p,
            "weight": self.weight,
            "A_p": self.a_p,
            "S_1": self.s1,
            "A_infinity": self.a_infinity,
            "doubling_C6": self.doubling_C6,
            "C8": self.C8,
            "l1_norm": self.l1_norm,
            "admissible": self.admissible,
            "reason": self.reason,
        }


def classify_weight(w: Weight, p: float) -> ClassReport:
    """
    Class verdicts and constants for the exponent ``p`` in ``[1, inf]``.

    ``admissible`` means: ``A_p`` for ``1 < p < inf``; ``S_1`` for ``p = 1``;
    the unit weight for ``p = inf``.

    For ``S_1`` the power families follow the exponent criterion (every
    exponent negative, or no singular factor at all) together with a
    positive grid lower bound; tabulated weights need a positive lower
    bound only.  The finite-family average bound is reported alongside.
    """
    p = float(p)
    if not p >= 1:
        raise InputError("p must lie in [1, inf]")
    key = ("class", p)
    if key in w.cache:
        return w.cache[key]
    c8 = lower_bound_c8(w)
    norm1 = l1_norm(w)
    c6 = doubling_constant(w)
    ainf = a_infinity_fit(w)
    a_p = s1 = None
    reason = ""
    if 1 < p < np.inf:
        est = muckenhoupt_constant(w, p)
        a_p = est.as_dict()
        admissible = est.in_class
        if not admissible:
            reason = est.note or "A_p estimate does not stabilise under refinement"
    elif p == 1:
        avg = average_bound(w)
        exps = [a for _, a in w.singular_points]
        if w.family == "tabulated":
            crit = c8 > 0
        else:
            crit = c8 > 0 and all(a < 0 for a in exps)
        s1 = {"in_class": bool(crit), "gamma_1": avg.value,
              "refinement_trend": avg.refinement_trend, "C8": c8}
        admissible = bool(crit)
        if not admissible:
            reason = "S_1 needs a positive essential lower bound and negative exponents"
    else:
        admissible = w.is_unit
        if not admissible:
            reason = "p = inf admits only the unit weight"
    rep = ClassReport(p, w.label(), a_p, s1, ainf, c6, c8, norm1, admissible, reason)
    w.cache.setdefault(key, rep)
    return w.cache[key]


def require_admissible(w: Weight, p: float) -> ClassReport:
    rep = classify_weight(w, p)
    if not rep.admissible:
        raise ClassificationError(f"weight {w.label()} not admissible for p={p:g}: {rep.reason}")
    return rep


def gamma_p(w: Weight, p: float) -> float:
    """Cached ``[w]_p`` for ``1 < p < inf`` or ``[w]_1`` for ``p = 1``."""
    if p == 1:
        return average_bound(w).value
    est = muckenhoupt_constant(w, p)
    if est.value is None:
        raise ClassificationError(f"weight {w.label()} not in A_{p:g}")
    return est.value


def weight_rule(w: Weight, **kw):
    """Quadrature rule adapted to the weight alone."""
    return rule_for((), w, **kw)
