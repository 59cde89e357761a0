"""
Sweeps that evaluate both sides of each inequality and turn the ratios
into a verdict.

Verdicts
--------
``bounded-by-paper-constant``
    every ratio is at most its explicit constant (times ``1 + tol``).
``bounded``
    implicit-constant inequality: the largest ratio is finite and the
    log-log trend of the ratio against the sweep variable does not grow by
    more than the slope tolerance (equivalences must be flat both ways).
``violated``
    a ratio exceeds its explicit constant, falls below an explicit lower
    constant, or is infinite.
``inconclusive``
    finite ratios whose trend exceeds the slope tolerance.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import families
from ..approx import best_approx
from ..errors import ConfigError, InputError
from ..fourier import Multiplier, TrigPoly, apply_multiplier
from ..norms import NormParams, weighted_norm
from ..operators import OperatorTag, apply, multiplier
from ..quadrature import fourier_series, rule_for
from ..smoothness import SmoothnessParams, k_functional_upper, modulus, realization
from ..weights import Weight, require_admissible
from .constants import constant_values

CHECK_IDS = (
    "nikolskii", "jackson", "jackson_derivative", "bernstein", "stechkin_inverse", "marchaud",
    "ulyanov_modulus", "ulyanov_best_approx", "realization_equiv", "kfunctional_equiv",
    "operator_uniform", "modulus_props", "upsilon_nikste", "jackson_operator",
)

VERDICTS = ("bounded", "bounded-by-paper-constant", "violated", "inconclusive")

ULYANOV_LEVELS = 20
TAIL_POINTS = 4
SUM_EXACT_TERMS = 8
SUM_MIN_CUTOFF = 64
SUM_MAX_CUTOFF = 4096
SUM_TAIL_RTOL = 0.02
MAX_SUM_DEGREE = 512
MARCHAUD_CELLS_PER_OCTAVE = 4

# the five Ul'yanov-type bounds for p < q:
#   best_from_tail          E_n(f)_q  vs (sum_{k > n/2} k^a E_k(f)_p^s)^(1/s)
#   norm_from_best_sum      ||f||_q   vs ||f||_p + (sum_k k^a E_k(f)_p^s)^(1/s)
#   norm_from_best_integral ||f||_q   vs ||f||_p + (int_1^inf v^a E_v(f)_p^s dv)^(1/s)
#   norm_from_modulus_integral  ||f||_q vs ||f||_p + (int_0^1 (u^-theta Omega_j(f, u)_p)^s du/u)^(1/s)
#   norm_from_modulus_sum   ||f||_q   vs ||f||_p + (sum_k k^a Omega_j(f, 1/k)_p^s)^(1/s)
# with theta = 1/p - 1/q, s = q_* and a = s theta - 1.
BEST_FROM_TAIL = "best_from_tail"
NORM_FROM_BEST_SUM = "norm_from_best_sum"
NORM_FROM_BEST_INTEGRAL = "norm_from_best_integral"
NORM_FROM_MODULUS_INTEGRAL = "norm_from_modulus_integral"
NORM_FROM_MODULUS_SUM = "norm_from_modulus_sum"
ULYANOV_INEQUALITIES = (BEST_FROM_TAIL, NORM_FROM_BEST_SUM, NORM_FROM_BEST_INTEGRAL,
                        NORM_FROM_MODULUS_INTEGRAL, NORM_FROM_MODULUS_SUM)


# ---------------------------------------------------------------------- #
# check specs and report records

def _num(x):
    if isinstance(x, str) and x.lower() in ("inf", "infinity"):
        return np.inf
    return None if x is None else float(x)


@dataclass
class CheckSpec:
    """
    One check: its id, test functions, weight, norm parameters, sweep grids
    and tolerances.

    ``orders`` holds the integer orders the check needs (``k``, ``r``,
    ``j``); each may be an int or a list.  ``params`` carries
    check-specific extras such as ``count`` (number of random polynomials)
    or ``operators`` (for ``operator_uniform``).
    """

    check_id: str
    functions: list = field(default_factory=list)
    weight: Optional[dict] = None
    p: float = 2.0
    q: Optional[float] = None
    n_list: tuple = ()
    v_list: tuple = ()
    orders: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0
    rel_tol: float = 1e-9
    slope_tol: float = 0.05
    name: str = ""

    def __post_init__(self):
        if self.check_id not in CHECK_IDS:
            raise ConfigError(f"unknown check id {self.check_id!r}")
        self.p = _num(self.p)
        self.q = _num(self.q)
        if not self.p >= 1:
            raise ConfigError("p must lie in [1, inf]")
        if self.q is not None and not self.q >= 1:
            raise ConfigError("q must lie in [1, inf]")
        self.n_list = tuple(int(n) for n in self.n_list)
        self.v_list = tuple(float(v) for v in self.v_list)
        if any(n < 1 for n in self.n_list):
            raise ConfigError("degrees in n_list must be positive")
        if any(not v > 0 for v in self.v_list):
            raise ConfigError("steps in v_list must be positive")
        self.name = self.name or self.check_id

    @classmethod
    def from_dict(cls, d: dict, seed: int = 0, weights: Optional[dict] = None,
                  functions: Optional[dict] = None) -> "CheckSpec":
        """Build from a config entry; ``weight`` and ``functions`` may name
        entries of the config-level ``weights`` / ``functions`` tables."""
        d = dict(d)
        w = d.get("weight")
        if isinstance(w, str):
            if not weights or w not in weights:
                raise ConfigError(f"unknown weight id {w!r}")
            w = weights[w]
        fs = []
        for f in d.get("functions", []):
            if isinstance(f, str):
                if not functions or f not in functions:
                    raise ConfigError(f"unknown function id {f!r}")
                f = dict(functions[f], label=functions[f].get("label", f))
            fs.append(f)
        return cls(check_id=d["check_id"], functions=fs, weight=w, p=d.get("p", 2.0), q=d.get("q"),
                   n_list=tuple(d.get("n_list", ())), v_list=tuple(d.get("v_list", ())),
                   orders=dict(d.get("orders", {})), params=dict(d.get("params", {})),
                   seed=int(d.get("seed", seed)), rel_tol=float(d.get("rel_tol", 1e-9)),
                   slope_tol=float(d.get("slope_tol", 0.05)), name=d.get("name", ""))


@dataclass
class CheckReport:
    """
    Rows are dicts with ``params`` (sweep coordinates), ``lhs``, ``rhs``,
    ``ratio`` and optional ``extra`` columns (``bound`` is the explicit
    constant for that row when one exists).
    """

    check_id: str
    name: str
    rows: list
    aggregate: dict
    paper_constant: Optional[dict]
    verdict: str
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"check_id": self.check_id, "name": self.name, "verdict": self.verdict,
                "aggregate": self.aggregate, "paper_constant": self.paper_constant,
                "rows": len(self.rows), "notes": list(self.notes)}


def _row(params, lhs, rhs, x=None, series="", bound=None, lower=None, **extra):
    lhs = float(lhs)
    rhs = float(rhs)
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs == 0 else np.inf
    row = {"params": dict(params), "lhs": lhs, "rhs": rhs, "ratio": ratio, "extra": dict(extra),
           "_x": x, "_series": series}
    if bound is not None:
        row["extra"]["bound"] = float(bound)
    if lower is not None:
        row["extra"]["lower_bound"] = float(lower)
    return row


# ---------------------------------------------------------------------- #
# trend and decay estimates

def _fit_slope(x, y):
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def estimate_decay_exponent(series) -> dict:
    """
    Least-squares decay exponent of ``value ~ C n^(-beta)``.

    Parameters
    ----------
    series : sequence of (n, value) pairs
        At least 6 points with positive values; ``n`` may equally be
        ``1/delta``.

    Returns
    -------
    dict
        ``beta_hat`` and the root-mean-square ``residual`` of the log fit.

    Examples
    --------
    >>> r = estimate_decay_exponent([(n, n ** -1.5) for n in (2, 4, 8, 16, 32, 64)])
    >>> round(r["beta_hat"], 10)
    1.5
    """
    pts = list(series)
    if len(pts) < 6:
        raise InputError("decay fit needs at least 6 points")
    n = np.array([float(a) for a, _ in pts])
    v = np.array([float(b) for _, b in pts])
    if np.any(v <= 0) or np.any(n <= 0):
        raise InputError("decay fit needs positive abscissae and values")
    slope, _, resid = _fit_slope(n, v)
    return {"beta_hat": -slope, "residual": resid}


def _series_slopes(rows):
    groups = {}
    for r in rows:
        if r["_x"] is None:
            continue
        groups.setdefault(r["_series"], []).append(r)
    slopes = {}
    for key, rs in groups.items():
        pts = [(r["_x"], r["ratio"]) for r in rs if np.isfinite(r["ratio"]) and r["ratio"] > 0]
        xs = sorted({x for x, _ in pts})
        if len(xs) < 2:
            continue
        slope, _, _ = _fit_slope([x for x, _ in pts], [y for _, y in pts])
        slopes[key] = slope
    return slopes


def _verdict(rows, mode, tol, slope_tol):
    """Aggregate rows into ``(aggregate, verdict)``; ``mode`` is ``explicit``,
    ``ll`` (one-sided trend) or ``equiv`` (two-sided trend)."""
    ratios = np.array([r["ratio"] for r in rows]) if rows else np.zeros(0)
    agg = {"max_ratio": float(np.max(ratios)) if rows else 0.0,
           "min_ratio": float(np.min(ratios)) if rows else 0.0}
    slopes = _series_slopes(rows)
    agg["slope"] = max(slopes.values(), key=abs) if slopes else 0.0
    agg["max_slope"] = max(slopes.values()) if slopes else 0.0
    bounded = [r for r in rows if "bound" in r["extra"]]
    lowered = [r for r in rows if "lower_bound" in r["extra"]]
    if bounded:
        agg["max_ratio_over_bound"] = max(r["ratio"] / r["extra"]["bound"] for r in bounded)
    if lowered:
        agg["min_ratio_over_lower_bound"] = min(r["ratio"] / r["extra"]["lower_bound"] for r in lowered)
    if not rows:
        return agg, "bounded"
    if any(not np.isfinite(r["ratio"]) for r in rows):
        return agg, "violated"
    if any(r["ratio"] > r["extra"]["bound"] * (1 + tol) for r in bounded):
        return agg, "violated"
    if any(r["ratio"] < r["extra"]["lower_bound"] * (1 - tol) for r in lowered):
        return agg, "violated"
    if mode == "explicit":
        return agg, "bounded-by-paper-constant"
    trend = agg["slope"] if mode == "equiv" else agg["max_slope"]
    ok = abs(trend) <= slope_tol if mode == "equiv" else trend <= slope_tol
    return agg, "bounded" if ok else "inconclusive"


# ---------------------------------------------------------------------- #
# shared evaluation helpers (memoised across checks of one process)

_memo: dict = {}
_memo_lock = threading.Lock()


def _memoised(key, fn):
    with _memo_lock:
        if key in _memo:
            return _memo[key]
    val = fn()
    with _memo_lock:
        return _memo.setdefault(key, val)


def clear_cache():
    with _memo_lock:
        _memo.clear()


def _label(d: dict) -> str:
    if "label" in d:
        return str(d["label"])
    args = ",".join(f"{k}={d[k]}" for k in sorted(d) if k != "family")
    return f"{d.get('family', '?')}({args})" if args else str(d.get("family", "?"))


class _Fn:
    """A test function with a stable cache key."""

    def __init__(self, desc: dict, seed: int):
        self.desc = desc
        self.f = families.from_descriptor(desc, seed)
        self.label = _label(desc)
        self.key = json.dumps({k: v for k, v in desc.items() if k != "label"}, sort_keys=True) + f"#{seed}"


def _wkey(w: Optional[Weight]):
    return "unit" if w is None else json.dumps(w.descriptor(), sort_keys=True)


def _E(fn: _Fn, n: int, p: float, w) -> float:
    return _memoised(("E", fn.key, int(n), p, _wkey(w)), lambda: best_approx(fn.f, int(n), p, w).error)


def _Om(fn: _Fn, k: int, v: float, p: float, w) -> float:
    return _memoised(("Om", fn.key, int(k), float(v), p, _wkey(w)),
                     lambda: modulus(fn.f, SmoothnessParams(int(k), float(v), p, w)))


def _norm(fn: _Fn, p, w) -> float:
    return _memoised(("N", fn.key, p, _wkey(w)), lambda: weighted_norm(fn.f, p, w))


def _orders(spec, name, default):
    v = spec.orders.get(name, default)
    return [int(x) for x in (v if isinstance(v, (list, tuple)) else [v])]


def _weight(spec) -> Optional[Weight]:
    if spec.weight is None:
        return None
    w = Weight.from_descriptor(spec.weight)
    return None if w.is_unit and w.scale == 1.0 else w


def _wlabel(w):
    return "1" if w is None else w.label()


def _unit_if_none(w):
    return Weight.constant(1.0) if w is None else w


def _consts(w, p, r=1, k=None):
    return constant_values(_unit_if_none(w), p, r, k)


def _admissible(w, p):
    return require_admissible(_unit_if_none(w), p)


def _poly_image(tag: OperatorTag, f, degree: int):
    """Image of a finite-band operator: exact multiplier on the partial
    Fourier sum of ``f`` of the operator's band."""
    base = fourier_series(f, degree)
    return apply(tag, base, "multiplier")


def _pmap(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------- #
# integrals and series with tail extrapolation

def _power_tail(xs, ys):
    """Fit ``y = C x^s`` to the given points (log least squares)."""
    s, logc, _ = _fit_slope(xs, ys)
    return np.exp(logc), s


def log_integral(G, upper: float, levels: int = ULYANOV_LEVELS) -> dict:
    """
    ``int_0^upper G(t) dt/t`` by the midpoint rule in ``log t`` on cells
    ``[upper 2^-(j+1), upper 2^-j]``, ``j < levels``, plus a power-law tail
    below ``upper 2^-levels`` fitted to the last four midpoints.

    Returns ``truncated``, ``extrapolated`` and the fitted ``tail_exponent``.
    """
    mids = upper * 2.0 ** (-(np.arange(levels) + 0.5))
    vals = np.array([G(t) for t in mids])
    trunc = float(np.log(2.0) * np.sum(vals))
    pos = vals[-TAIL_POINTS:]
    if np.all(pos > 0):
        C, s = _power_tail(mids[-TAIL_POINTS:], pos)
        tmin = upper * 2.0 ** (-levels)
        tail = C * tmin ** s / s if s > 0 else np.inf
    else:
        s, tail = np.nan, 0.0
    return {"truncated": trunc, "extrapolated": trunc + tail, "tail_exponent": s}


def dyadic_sum(term, start: int, cutoff: Optional[int] = None, max_cutoff: int = SUM_MAX_CUTOFF,
               tail_rtol: float = SUM_TAIL_RTOL) -> dict:
    """
    ``sum_{k >= start} term(k)``.

    Terms ``start .. start+7`` are summed exactly; beyond that ``term`` is
    sampled at ``k`` growing by ``sqrt 2`` and each block is summed as the
    integral of the power law through its end samples.  Sampling runs at
    least to ``cutoff`` (default ``max(64, 4 start)``) and continues until
    the power-law tail fitted to the last four samples is below
    ``tail_rtol`` of the running total, or ``max_cutoff`` is reached.
    """
    start = int(start)
    cutoff = int(cutoff or max(SUM_MIN_CUTOFF, 4 * start))
    exact_end = start + SUM_EXACT_TERMS - 1
    total = float(sum(term(k) for k in range(start, exact_end + 1)))
    nodes = [exact_end]
    vals = [term(exact_end)]
    tail, s = np.inf, np.nan
    while True:
        if len(nodes) >= TAIL_POINTS and all(v > 0 for v in vals[-TAIL_POINTS:]):
            C, s = _power_tail(nodes[-TAIL_POINTS:], vals[-TAIL_POINTS:])
            lo = nodes[-1] + 0.5
            tail = -C * lo ** (s + 1) / (s + 1) if s < -1 else np.inf
        elif len(nodes) >= TAIL_POINTS:
            s, tail = np.nan, 0.0
        done = nodes[-1] >= cutoff and tail <= tail_rtol * abs(total)
        if done or nodes[-1] >= max_cutoff:
            break
        k = min(max_cutoff, max(nodes[-1] + 1, int(round(nodes[-1] * np.sqrt(2.0)))))
        y = term(k)
        total += _block(nodes[-1], vals[-1], k, y)
        nodes.append(k)
        vals.append(y)
    return {"truncated": total, "extrapolated": total + tail, "tail_exponent": s, "cutoff": nodes[-1]}


def _block(a, ya, b, yb):
    """``sum_{k=a+1}^{b} y(k)`` for ``y`` a power law through ``(a, ya)``
    and ``(b, yb)``, as the integral over ``[a + 1/2, b + 1/2]``."""
    if ya <= 0 or yb <= 0:
        return 0.5 * (ya + yb) * (b - a)
    s = np.log(yb / ya) / np.log(b / a)
    C = ya / a ** s
    lo, hi = a + 0.5, b + 0.5
    if abs(s + 1) < 1e-12:
        return C * np.log(hi / lo)
    return C * (hi ** (s + 1) - lo ** (s + 1)) / (s + 1)


# ---------------------------------------------------------------------- #
# individual checks

def _check_nikolskii(spec, w, threads):
    p, q = spec.p, spec.q
    if q is None or not q <= p:
        raise ConfigError("nikolskii needs q <= p (LHS exponent p, RHS exponent q)")
    for s in (p, q):
        if 1 < s < np.inf:
            _admissible(w, s)
    count = int(spec.params.get("count", 5))
    theta = (1.0 / q) - (0.0 if p == np.inf else 1.0 / p)

    def point(item):
        n, i = item
        U = families.random_poly(n, spec.seed, i, constant=False)
        lhs = weighted_norm(U, p, w)
        rhs = n ** theta * weighted_norm(U, q, w)
        return _row({"n": n, "poly": i}, lhs, rhs, x=n, series=str(i))

    rows = _pmap(point, [(n, i) for n in spec.n_list for i in range(count)], threads)
    return rows, "ll", None, []


def _check_jackson(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]

    def point(item):
        fn, r, n = item
        return _row({"function": fn.label, "r": r, "n": n}, _E(fn, n, p, w), _Om(fn, r, 1.0 / n, p, w),
                    x=n, series=f"{fn.label}|{r}")

    items = [(fn, r, n) for fn in fns for r in _orders(spec, "r", 1) for n in spec.n_list]
    return _pmap(point, items, threads), "ll", None, []


def _check_jackson_derivative(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    for fn in fns:
        if not fn.f.has_derivative:
            raise ConfigError(f"{fn.label} has no exact derivative rule")

    def point(item):
        fn, r, k, n = item
        fr = fn.f.derivative(r)
        rhs = n ** (-r) * modulus(fr, SmoothnessParams(k, 1.0 / n, p, w))
        return _row({"function": fn.label, "r": r, "k": k, "n": n}, _E(fn, n, p, w), rhs,
                    x=n, series=f"{fn.label}|{r}|{k}")

    items = [(fn, r, k, n) for fn in fns for r in _orders(spec, "r", 1) for k in _orders(spec, "k", 1)
             for n in spec.n_list]
    return _pmap(point, items, threads), "ll", None, []


def _check_bernstein(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    count = int(spec.params.get("count", 50))
    rs = _orders(spec, "r", 1)
    c12 = _consts(w, p)["C12"]

    def point(item):
        n, r, i = item
        U = families.random_poly(n, spec.seed, i)
        lhs = weighted_norm(U.derivative(r), p, w)
        rhs = n ** r * weighted_norm(U, p, w)
        return _row({"n": n, "r": r, "poly": i}, lhs, rhs, x=n, series=f"{r}|{i}", bound=(2 * c12) ** r)

    rows = _pmap(point, [(n, r, i) for n in spec.n_list for r in rs for i in range(count)], threads)
    return rows, "explicit", {"C12": c12, "bound": "2^r C12^r"}, []


def _check_stechkin(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    nmax = max(spec.n_list) if spec.n_list else 0

    def evals(fn):
        return [_E(fn, nu, p, w) for nu in range(nmax + 1)]

    Es = dict(zip([fn.key for fn in fns], _pmap(evals, fns, threads)))

    def point(item):
        fn, k, n = item
        E = Es[fn.key]
        rhs = n ** (-k) * sum((nu + 1) ** (k - 1) * E[nu] for nu in range(n + 1))
        return _row({"function": fn.label, "k": k, "n": n}, _Om(fn, k, 1.0 / n, p, w), rhs,
                    x=n, series=f"{fn.label}|{k}")

    items = [(fn, k, n) for fn in fns for k in _orders(spec, "k", 1) for n in spec.n_list]
    return _pmap(point, items, threads), "ll", None, []


def _check_marchaud(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    ts = sorted(spec.v_list, reverse=True)
    if any(not 0 < t < 0.5 for t in ts):
        raise ConfigError("marchaud needs 0 < t < 1/2")
    m = MARCHAUD_CELLS_PER_OCTAVE
    notes = ["integrand Omega_{k+1}(f,u)/u^k du/u on [t, 1], midpoint rule in log u"]

    def point(item):
        fn, k, t = item
        cells = max(1, int(np.ceil(m * np.log2(1.0 / t))))
        edges = np.exp(np.linspace(0.0, np.log(t), cells + 1))
        h = np.log(1.0 / t) / cells
        mids = np.sqrt(edges[:-1] * edges[1:])
        integral = h * sum(_Om(fn, k + 1, u, p, w) / u ** k for u in mids)
        return _row({"function": fn.label, "k": k, "t": t}, _Om(fn, k, t, p, w), t ** k * integral,
                    x=1.0 / t, series=f"{fn.label}|{k}")

    items = [(fn, k, t) for fn in fns for k in _orders(spec, "k", 1) for t in ts]
    return _pmap(point, items, threads), "ll", None, notes


def _pq(spec, w):
    p, q = spec.p, spec.q
    if q is None or not p < q:
        raise ConfigError("Ul'yanov checks need p < q")
    _admissible(w, p)
    return p, q, NormParams(p, q)


def _check_ulyanov_modulus(spec, w, threads):
    p, q, npq = _pq(spec, w)
    theta, qs = npq.theta, npq.q_star
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    notes = [f"q* = {qs:g} (q for finite q, 1 for q = inf)"]

    def point(item):
        fn, k, delta = item
        G = lambda t: (t ** (-theta) * _Om(fn, k, t, p, w)) ** qs
        I = log_integral(G, delta)
        lhs = _Om(fn, k, delta, q, w)
        rhs = I["extrapolated"] ** (1.0 / qs)
        return _row({"function": fn.label, "k": k, "delta": delta}, lhs, rhs, x=1.0 / delta,
                    series=f"{fn.label}|{k}", rhs_truncated=I["truncated"] ** (1.0 / qs),
                    rhs_extrapolated=rhs, integral_truncated=I["truncated"],
                    integral_extrapolated=I["extrapolated"], q_star=qs)

    items = [(fn, k, d) for fn in fns for k in _orders(spec, "k", 1) for d in spec.v_list]
    return _pmap(point, items, threads), "ll", None, notes


def _check_ulyanov_best_approx(spec, w, threads):
    p, q, npq = _pq(spec, w)
    theta, qs = npq.theta, npq.q_lower_star
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    notes = [f"q_* = {qs:g} (q for 1 < p < inf, 1 for q = inf or p = 1); "
             f"the modulus inequality uses q* = {npq.q_star:g}"]
    a = qs * theta - 1.0
    which = set(spec.params.get("inequalities", ULYANOV_INEQUALITIES))
    unknown = which - set(ULYANOV_INEQUALITIES)
    if unknown:
        raise ConfigError(f"unknown Ul'yanov inequalities {sorted(unknown)}")
    kmax = int(spec.params.get("max_degree", MAX_SUM_DEGREE))

    def Eterm(fn, k):
        return k ** a * _E(fn, k, p, w) ** qs

    def rows_for(item):
        fn, j = item
        out = []
        nq = weighted_norm(fn.f, q, w)
        npn = _norm(fn, p, w)
        base = {"function": fn.label, "j": j}
        if BEST_FROM_TAIL in which:
            for n in spec.n_list:
                S = dyadic_sum(lambda k: Eterm(fn, k), n // 2 + 1, max_cutoff=kmax)
                rhs = S["extrapolated"] ** (1 / qs)
                out.append(_row(dict(base, inequality=BEST_FROM_TAIL, n=n), _E(fn, n, q, w), rhs, x=n,
                                series=f"{fn.label}|{j}|{BEST_FROM_TAIL}",
                                rhs_truncated=S["truncated"] ** (1 / qs), rhs_extrapolated=rhs,
                                integral_truncated=S["truncated"], integral_extrapolated=S["extrapolated"],
                                q_star=qs))
        single = []
        if NORM_FROM_BEST_SUM in which:
            single.append((NORM_FROM_BEST_SUM, dyadic_sum(lambda k: Eterm(fn, k), 1, max_cutoff=kmax)))
        if NORM_FROM_BEST_INTEGRAL in which:
            # E_v = E_floor(v): int_k^{k+1} v^a dv weights each E_k
            wgt = (lambda k: np.log1p(1.0 / k)) if abs(a) < 1e-14 else \
                (lambda k: ((k + 1.0) ** (a + 1) - k ** (a + 1.0)) / (a + 1))
            single.append((NORM_FROM_BEST_INTEGRAL, dyadic_sum(lambda k: wgt(k) * _E(fn, k, p, w) ** qs, 1, max_cutoff=kmax)))
        if NORM_FROM_MODULUS_INTEGRAL in which:
            G = lambda u: (u ** (-theta) * _Om(fn, j, u, p, w)) ** qs
            single.append((NORM_FROM_MODULUS_INTEGRAL, log_integral(G, 1.0)))
        if NORM_FROM_MODULUS_SUM in which:
            single.append((NORM_FROM_MODULUS_SUM, dyadic_sum(lambda k: k ** a * _Om(fn, j, 1.0 / k, p, w) ** qs, 1)))
        for name, S in single:
            ext = S["extrapolated"] ** (1 / qs) + npn
            tr = S["truncated"] ** (1 / qs) + npn
            out.append(_row(dict(base, inequality=name, n=""), nq, ext, x=None,
                            series=f"{fn.label}|{j}|{name}", rhs_truncated=tr, rhs_extrapolated=ext,
                            integral_truncated=S["truncated"], integral_extrapolated=S["extrapolated"],
                            q_star=qs))
        return out

    items = [(fn, j) for fn in fns for j in _orders(spec, "j", 1)]
    rows = [r for rs in _pmap(rows_for, items, threads) for r in rs]
    return rows, "ll", None, notes


def _check_realization(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    rs = _orders(spec, "r", 1)
    lower = {r: (1 + _consts(w, p, r)["C1"]) ** (-r) for r in rs}

    def point(item):
        fn, r, n = item
        res = best_approx(fn.f, n, p, w)
        R = realization(fn.f, r, n, p, w, res.poly)
        return _row({"function": fn.label, "r": r, "n": n}, R, _Om(fn, r, 1.0 / n, p, w), x=n,
                    series=f"{fn.label}|{r}", lower=lower[r], solver=res.solver_info.get("path", ""))

    items = [(fn, r, n) for fn in fns for r in rs for n in spec.n_list]
    return _pmap(point, items, threads), "equiv", {"lower": "(1 + C1)^-r"}, \
        ["ratio = R_r(f, 1/n) / Omega_r(f, 1/n)"]


def _check_kfunctional(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    rs = _orders(spec, "r", 1)
    lower = {r: (1 + _consts(w, p, r)["C1"]) ** (-r) for r in rs}
    vs = list(spec.v_list) or [1.0 / n for n in spec.n_list]

    def point(item):
        fn, r, v = item
        K = k_functional_upper(fn.f, r, v, p, w)
        return _row({"function": fn.label, "r": r, "v": v}, K.value, _Om(fn, r, v, p, w), x=1.0 / v,
                    series=f"{fn.label}|{r}", lower=lower[r], candidate=K.candidate)

    items = [(fn, r, v) for fn in fns for r in rs for v in vs]
    return _pmap(point, items, threads), "equiv", {"lower": "(1 + C1)^-r"}, \
        ["ratio = K_r upper bound / Omega_r(f, v); the K-functional is an upper bound over candidates"]


def _operator_rows(fn, op, p, w, spec, C):
    rows = []
    f = fn.f
    nf = _norm(fn, p, w)
    if op == "steklov_T":
        for v in spec.params.get("v_list", spec.v_list or [1.0, 0.5, 0.125, 1 / 64]):
            img = apply(OperatorTag.steklov_T(v), f)
            rows.append(_row({"function": fn.label, "operator": op, "param": v},
                             weighted_norm(img, p, w), nf, bound=C["C1"], series=op))
    elif op == "window_S":
        g = float(spec.params.get("g", 1.0))
        for lam in spec.params.get("lambdas", [1.0, 2.0, 8.0, 32.0]):
            for frac in spec.params.get("tau_fractions", [0.0, 1.0]):
                tau = frac * np.pi * lam ** (-g)
                img = apply(OperatorTag.window_S(lam, tau, g), f)
                rows.append(_row({"function": fn.label, "operator": op, "param": f"{lam:g}|{tau:.17g}"},
                                 weighted_norm(img, p, w), nf, bound=C["C2"], series=op))
    elif op in ("fejer", "vallee_poussin", "jackson_D", "partial_sum"):
        bound = {"fejer": C["C12"], "vallee_poussin": 3 * C["C12"], "jackson_D": C["C10"]}.get(op)
        for n in spec.n_list:
            tag = getattr(OperatorTag, op)(n)
            degree = {"fejer": n, "vallee_poussin": 2 * n - 1, "jackson_D": 2 * (n // 2), "partial_sum": n}[op]
            img = _poly_image(tag, f, degree)
            rows.append(_row({"function": fn.label, "operator": op, "param": n},
                             weighted_norm(img, p, w), nf, bound=bound, series=op))
    else:
        raise ConfigError(f"operator_uniform does not cover {op!r}")
    return rows


def _check_operator_uniform(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    C = _consts(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    ops = spec.params.get("operators", ["steklov_T", "window_S", "vallee_poussin"])
    items = [(fn, op) for fn in fns for op in ops]
    rows = [r for rs in _pmap(lambda it: _operator_rows(it[0], it[1], p, w, spec, C), items, threads)
            for r in rs]
    pc = {"C1": C["C1"], "C2": C["C2"], "C10": C["C10"], "C12": C["C12"], "3C12": 3 * C["C12"]}
    return rows, "explicit", pc, ["ratio = ||Op f|| / ||f||; bound C1 (T_v), C2 (S), C12 (F_n), 3C12 (V_n), C10 (D_n)"]


def _check_modulus_props(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    ks = _orders(spec, "k", 1)
    rr = int(spec.params.get("reduction", 1))
    vs = sorted(spec.v_list or [2.0 ** -j for j in range(1, 9)], reverse=True)
    lambdas = spec.params.get("lambdas", [0.5, 1.0, 2.0, 3.7])
    notes = []

    def rows_for(item):
        fn, k = item
        C = _consts(w, p, k)
        out = []
        base = {"function": fn.label, "k": k}
        # limit: Omega_k(f, v) -> 0, recorded against the largest step
        om0 = _Om(fn, k, vs[0], p, w)
        for v in vs:
            out.append(_row(dict(base, property="limit", v=v, lam=""), _Om(fn, k, v, p, w), om0,
                            x=1.0 / v, series=f"{fn.label}|{k}|limit"))
        for v in vs:
            out.append(_row(dict(base, property="order_reduction", v=v, lam=""),
                            _Om(fn, k + rr, v, p, w), _Om(fn, k, v, p, w),
                            bound=(1 + C["C1"]) ** rr, series=f"{fn.label}|{k}|reduction"))
        factor = 4 * (1 + C["C1"]) ** k * max(C["C18"] ** k, C["C19"] ** k)
        for v in vs:
            for lam in lambdas:
                if lam * v > 1:
                    continue
                out.append(_row(dict(base, property="scaling", v=v, lam=lam),
                                _Om(fn, k, lam * v, p, w), _Om(fn, k, v, p, w),
                                bound=factor * (1 + np.floor(lam)) ** k, series=f"{fn.label}|{k}|scaling"))
        if fn.f.has_derivative:
            dk = weighted_norm(fn.f.derivative(k), p, w)
            for v in vs:
                out.append(_row(dict(base, property="smooth_bound", v=v, lam=""), _Om(fn, k, v, p, w),
                                v ** k * dk, bound=2.0 ** (-k) * C["C1"] ** k, series=f"{fn.label}|{k}|smooth"))
        if k == ks[0]:
            for v in vs:
                img = apply(OperatorTag.smooth_R(v), fn.f)
                lhs = weighted_norm(fn.f - img, p, w, None if p == np.inf else rule_for((fn.f, img), w))
                out.append(_row(dict(base, property="R_proximity", v=v, lam=""), lhs, _Om(fn, 1, v, p, w),
                                bound=72 * C["C2"], series=f"{fn.label}|R"))
        return out

    rows = [r for rs in _pmap(rows_for, [(fn, k) for fn in fns for k in ks], threads) for r in rs]
    # the limit rows carry no constant; they fail when the modulus does not shrink
    limit_ok = True
    for fn in fns:
        for k in ks:
            lr = [r for r in rows if r["_series"] == f"{fn.label}|{k}|limit"]
            if lr and lr[-1]["lhs"] > lr[0]["lhs"] * (1 + spec.rel_tol) and lr[0]["lhs"] > 0:
                limit_ok = False
    for r in rows:
        if r["params"].get("property") == "limit":
            r["_x"] = None  # excluded from the trend verdict
    if not limit_ok:
        notes.append("modulus did not decrease from the largest to the smallest step")
    return rows, ("explicit" if limit_ok else "explicit-failed"), {"order_reduction": "(1+C1)^r",
                                                       "scaling": "4(1+C1)^k max(C18^k, C19^k)(1+floor(lam))^k",
                                                       "smooth_bound": "2^-k C1^k", "R_proximity": "72 C2"}, notes


def _check_upsilon_nikste(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]
    r = 1
    C = _consts(w, p)
    ls = spec.v_list or tuple(2.0 ** -j for j in range(1, 9))
    for fn in fns:
        if not fn.f.has_derivative:
            raise ConfigError(f"{fn.label} has no exact derivative rule")

    def point(item):
        fn, l = item
        lhs = l ** r * weighted_norm(fn.f.derivative(r), p, w)
        rhs = modulus(fn.f, SmoothnessParams(r, l, p, w))
        # (T_l - I) g = (l/2) (Upsilon_l g)' on a polynomial surrogate
        g = fn.f if isinstance(fn.f, TrigPoly) else fourier_series(fn.f, 64)
        ident = apply(OperatorTag.identity_minus_T(l, 1), g) + (0.5 * l) * apply(OperatorTag.upsilon(l), g).derivative(1)
        return _row({"function": fn.label, "r": r, "l": l}, lhs, rhs, x=1.0 / l, series=fn.label,
                    bound=2 ** r * C["C2"], upsilon_identity_residual=ident.l2_norm())

    return _pmap(point, [(fn, l) for fn in fns for l in ls], threads), "explicit", \
        {"bound": "2^r C2", "C2": C["C2"]}, ["order r = 1 only"]


def _check_jackson_operator(spec, w, threads):
    p = spec.p
    _admissible(w, p)
    fns = [_Fn(d, spec.seed) for d in spec.functions]

    def point(item):
        fn, k, n = item
        Dn = _poly_image(OperatorTag.jackson_D(n), fn.f, 2 * (n // 2))
        lhs = weighted_norm(fn.f - Dn, p, w, None if p == np.inf else rule_for((fn.f, Dn), w))
        return _row({"function": fn.label, "k": k, "n": n}, lhs, _Om(fn, k, 1.0 / n, p, w), x=n,
                    series=f"{fn.label}|{k}")

    items = [(fn, k, n) for fn in fns for k in _orders(spec, "k", 1) for n in spec.n_list]
    return _pmap(point, items, threads), "ll", None, ["printed constant is garbled; checked as an implicit bound"]


_RUNNERS = {
    "nikolskii": _check_nikolskii,
    "jackson": _check_jackson,
    "jackson_derivative": _check_jackson_derivative,
    "bernstein": _check_bernstein,
    "stechkin_inverse": _check_stechkin,
    "marchaud": _check_marchaud,
    "ulyanov_modulus": _check_ulyanov_modulus,
    "ulyanov_best_approx": _check_ulyanov_best_approx,
    "realization_equiv": _check_realization,
    "kfunctional_equiv": _check_kfunctional,
    "operator_uniform": _check_operator_uniform,
    "modulus_props": _check_modulus_props,
    "upsilon_nikste": _check_upsilon_nikste,
    "jackson_operator": _check_jackson_operator,
}


def default_threads() -> int:
    """Worker count from ``APX_THREADS`` (default 1)."""
    raw = os.environ.get("APX_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("APX_THREADS must be a positive integer") from None
    if n < 1:
        raise ConfigError("APX_THREADS must be a positive integer")
    return n


def run_check(spec: CheckSpec, threads: Optional[int] = None) -> CheckReport:
    """
    Evaluate every sweep point of ``spec`` and aggregate the verdict.

    Sweep points may run on ``threads`` workers; rows keep sweep order, so
    the report does not depend on scheduling.

    Raises
    ------
    ConfigError, ClassificationError
        Inadmissible spec (for example ``q <= p`` for the Ul'yanov checks
        or a weight outside the class required for ``p``).
    SolverError
        Propagated from the best-approximation solver with the failing
        sweep point attached to its diagnostics.
    """
    threads = default_threads() if threads is None else int(threads)
    w = _weight(spec)
    rows, mode, pc, notes = _RUNNERS[spec.check_id](spec, w, threads)
    # "explicit-failed": a property without a constant failed outright
    failed = mode == "explicit-failed"
    mode = "explicit" if failed else mode
    agg, verdict = _verdict(rows, mode, spec.rel_tol, spec.slope_tol)
    if failed:
        verdict = "violated"
    agg["mode"] = mode
    return CheckReport(spec.check_id, spec.name, rows, agg, pc, verdict, notes)
