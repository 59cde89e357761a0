"""
Best and near-best trigonometric approximation in weighted ``L_p``.

``p = 2`` solves the weighted normal equations exactly (up to
quadrature).  Other finite ``p`` use iteratively reweighted least squares
on a quadrature discretization, and ``p = inf`` follows the IRLS solutions
through ``p = 2, 4, ..., 256`` and reports the sup norm of the final
residual.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lstsq

from .errors import InputError, SolverError
from .fourier import PeriodicFunction, SampledFunction, TrigPoly
from .norms import weighted_norm
from .operators import OperatorTag, apply
from .quadrature import Rule, fourier_series, rule_for
from .smoothness import SmoothnessParams, modulus
from .weights import Weight

IRLS_FLOOR = 1e-12
L1_SMOOTHING = 1e-10
DAMPING = 0.5
MAX_FAILED_STEPS = 10
MAX_ITERATIONS = 500
STEP_TOL = 1e-8
HOMOTOPY = (2, 4, 8, 16, 32, 64, 128, 256)
MIN_COLLOCATION = 4096
ROUND_OFF = 1e-13
BASIS_CACHE_SIZE = 8


@dataclass
class ApproxResult:
    """
    Approximant of degree at most ``n`` and its error.

    ``solver_info`` holds ``path`` (``exact-L2``, ``IRLS``,
    ``minimax-homotopy`` or ``near-best-VP``), ``iterations``,
    ``relative_step`` and, where computed, ``certificate`` (largest
    residual inner product for ``p = 2``) and ``discretization_error``
    (change of the error on a rule four times denser).
    """

    poly: TrigPoly
    error: float
    solver_info: dict = field(default_factory=dict)


# ---------------------------------------------------------------------- #
# discretization

_basis_cache: dict = {}
_basis_lock = threading.Lock()


def _basis(rule: Rule, n: int) -> np.ndarray:
    """Columns ``1, cos x, ..., cos nx, sin x, ..., sin nx`` at the rule nodes."""
    key = (id(rule), n)
    with _basis_lock:
        hit = _basis_cache.get(key)
        if hit is not None and hit[0] is rule:
            return hit[1]
    kx = np.outer(rule.nodes, np.arange(1, n + 1))
    B = np.hstack([np.ones((rule.size, 1)), np.cos(kx), np.sin(kx)])
    with _basis_lock:
        if len(_basis_cache) >= BASIS_CACHE_SIZE:
            _basis_cache.pop(next(iter(_basis_cache)))
        _basis_cache.setdefault(key, (rule, B))
    return B


def _poly(c: np.ndarray, n: int) -> TrigPoly:
    return TrigPoly(c[0], c[1:n + 1], c[n + 1:], degree=n)


def _as_function(f):
    if isinstance(f, SampledFunction) and f.exact_rule is None:
        return f.interpolant()
    if not isinstance(f, PeriodicFunction):
        raise InputError("expected a periodic function")
    return f


def _rule(f, n, w, oversample=1.0):
    return rule_for((f, TrigPoly.zero(2 * n + 1)), w, min_nodes=max(MIN_COLLOCATION, 16 * (n + 1)),
                    oversample=oversample)


def _measure(rule: Rule, w: Optional[Weight]) -> np.ndarray:
    m = rule.weights.copy()
    if w is not None and not w.is_unit:
        m = m * w(rule.nodes)
    return m


def _error_with_check(f, poly, n, p, w, info):
    err = weighted_norm(f - poly, p, w, None if p == np.inf else _rule(f, n, w))
    if p != np.inf:
        fine = weighted_norm(f - poly, p, w, _rule(f, n, w, oversample=4.0))
        info["discretization_error"] = abs(fine - err)
    return err


# ---------------------------------------------------------------------- #
# solvers

def _solve_l2(fv, B, mu):
    G = B.T @ (mu[:, None] * B)
    rhs = B.T @ (mu * fv)
    c = cho_solve(cho_factor(G), rhs)
    resid = fv - B @ c
    cert = float(np.max(np.abs(B.T @ (mu * resid))))
    return c, cert


def _weighted_ls(B, fv, wts):
    """``argmin sum wts |f - Bc|^2`` by Cholesky on the normal equations,
    falling back to a QR least-squares solve when they are too ill
    conditioned."""
    G = B.T @ (wts[:, None] * B)
    rhs = B.T @ (wts * fv)
    try:
        cf = cho_factor(G)
        d = np.diag(cf[0])
        if np.min(np.abs(d)) > 1e-7 * np.max(np.abs(d)):
            return cho_solve(cf, rhs)
    except np.linalg.LinAlgError:
        pass
    sw = np.sqrt(wts)
    return lstsq(sw[:, None] * B, sw * fv, lapack_driver="gelsy")[0]


def _objective(resid, mu, p):
    a = np.abs(resid)
    s = float(np.max(a))
    if s == 0.0:
        return 0.0
    return s * float(np.dot(mu, (a / s) ** p)) ** (1.0 / p)


def _irls(fv, B, mu, p, c0, scale, info):
    """Damped IRLS/Newton iteration for ``min sum mu |f - Bc|^p``."""
    c = c0.copy()
    resid = fv - B @ c
    obj = _objective(resid, mu, p)
    step_rel = np.inf
    it = 0
    for it in range(1, MAX_ITERATIONS + 1):
        a = np.abs(resid)
        amax = float(np.max(a))
        if amax <= ROUND_OFF * scale:
            step_rel = 0.0
            break
        if p == 1:
            wts = mu / np.sqrt(a ** 2 + L1_SMOOTHING ** 2)
        else:
            wts = mu * (np.maximum(a, IRLS_FLOOR * amax) / amax) ** (p - 2.0)
        target = _weighted_ls(B, fv, wts)
        delta = target - c
        if p > 2:
            # Newton step for the p-th power objective
            delta = delta / (p - 1.0)
        theta = 1.0
        for _ in range(MAX_FAILED_STEPS):
            trial = c + theta * delta
            r_trial = fv - B @ trial
            o_trial = _objective(r_trial, mu, p)
            if o_trial <= obj * (1.0 + 1e-14):
                break
            theta *= DAMPING
        else:
            if np.linalg.norm(delta) <= 1e-6 * max(np.linalg.norm(c), 1e-300):
                # stalled at round-off in the objective
                step_rel = 0.0
                break
            raise SolverError(f"IRLS failed to decrease the objective for p = {p:g}",
                              {"iterations": it, "objective": obj, "p": p})
        step_rel = float(np.linalg.norm(theta * delta) / max(np.linalg.norm(trial), 1e-300))
        c, resid, obj = trial, r_trial, o_trial
        if step_rel < STEP_TOL:
            break
    info["iterations"] = info.get("iterations", 0) + it
    info["relative_step"] = step_rel
    info["converged"] = bool(step_rel < STEP_TOL)
    return c


def best_approx(f, n: int, p: float = 2.0, w: Optional[Weight] = None, solver: str = "auto") -> ApproxResult:
    """
    Best approximation of ``f`` by polynomials of degree ``n`` in
    ``L_{p,w}``.

    ``solver="irls"`` forces the iterative path for finite ``p`` (including
    ``p = 2``, where it cross-checks the direct solve).

    The returned error is the weighted norm of the residual evaluated with
    the library's adaptive rule, so it is a certified upper bound of
    ``E_n(f)`` up to quadrature accuracy.

    Examples
    --------
    >>> from apx.fourier import TrigPoly
    >>> r = best_approx(TrigPoly.mode(3), 2)
    >>> round(r.error ** 2 / np.pi, 10)
    1.0
    """
    if int(n) != n or n < 0:
        raise InputError("degree must be a non-negative integer")
    if not p >= 1:
        raise InputError("p must lie in [1, inf]")
    if solver not in ("auto", "irls"):
        raise InputError(f"unknown solver {solver!r}")
    n = int(n)
    f = _as_function(f)
    rule = _rule(f, n, w)
    B = _basis(rule, n)
    mu = _measure(rule, w)
    fv = np.asarray(f(rule.nodes), dtype=float)
    if not np.all(np.isfinite(fv * mu)):
        raise InputError("f is not finite at the collocation nodes")
    c2, cert = _solve_l2(fv, B, mu)
    scale = max(float(np.max(np.abs(fv))), 1e-300)
    if p == 2 and solver == "auto":
        info = {"path": "exact-L2", "iterations": 1, "relative_step": 0.0, "certificate": cert}
        c = c2
    elif p == np.inf:
        info = {"path": "minimax-homotopy", "homotopy": list(HOMOTOPY)}
        c = c2
        for q in HOMOTOPY[1:]:
            c = _irls(fv, B, mu, float(q), c, scale, info)
    else:
        info = {"path": "IRLS"}
        c = _irls(fv, B, mu, float(p), c2, scale, info)
    poly = _poly(c, n)
    err = _error_with_check(f, poly, n, p, w, info)
    return ApproxResult(poly, err, info)


def best_approx_sequence(f, degrees, p: float = 2.0, w: Optional[Weight] = None) -> list:
    """:func:`best_approx` over several degrees."""
    return [best_approx(f, int(n), p, w) for n in degrees]


def near_best_vp(f, n: int, p: float = 2.0, w: Optional[Weight] = None) -> ApproxResult:
    """
    De la Vallee-Poussin mean ``V_n f`` (degree ``2n - 1``) and its error.

    Non-polynomial ``f`` is first replaced by its partial Fourier sum of
    degree ``2n - 1``, on which ``V_n`` acts exactly.
    """
    if int(n) != n or n < 1:
        raise InputError("n must be a positive integer")
    f = _as_function(f)
    base = f if isinstance(f, TrigPoly) else fourier_series(f, 2 * n - 1)
    if base.degree < 2 * n - 1:
        base = base.with_degree(2 * n - 1)
    poly = apply(OperatorTag.vallee_poussin(n), base, "multiplier").with_degree(2 * n - 1)
    rule = None if p == np.inf else rule_for((f, poly), w)
    err = weighted_norm(f - poly, p, w, rule)
    return ApproxResult(poly, err, {"path": "near-best-VP", "iterations": 0, "relative_step": 0.0})


def _derivative(f, k):
    if k == 0:
        return f
    if not f.has_derivative:
        raise InputError(f"{type(f).__name__} has no exact derivative rule")
    return f.derivative(k)


def simultaneous_errors(f, n: int, r: int, p: float = 2.0, w: Optional[Weight] = None,
                        l: int = 1) -> list:
    """
    Errors of derivatives of the best approximant ``u`` and of ``V_n f``.

    Returns one row per ``k = 0..r`` with ``best`` (``||f^(k) - u^(k)||``),
    ``vp`` (``||f^(k) - (V_n f)^(k)||``) and the reference quantities
    ``n^(k-r) E_n(f^(r))`` and ``n^(k-r) Omega_l(f^(r), 1/n)``.
    """
    if r < 0 or n < 1:
        raise InputError("need r >= 0 and n >= 1")
    f = _as_function(f)
    if r > 0 and not f.has_derivative:
        raise InputError(f"{type(f).__name__} has no exact derivative rule")
    u = best_approx(f, n, p, w).poly
    phi = near_best_vp(f, n, p, w).poly
    fr = _derivative(f, r)
    e_r = best_approx(fr, n, p, w).error
    om_r = modulus(fr, SmoothnessParams(l, min(1.0, 1.0 / n), p, w))
    rows = []
    for k in range(r + 1):
        fk = _derivative(f, k)
        uk = u if k == 0 else u.derivative(k)
        pk = phi if k == 0 else phi.derivative(k)
        rows.append({
            "k": k,
            "best": weighted_norm(fk - uk, p, w, None if p == np.inf else rule_for((fk, uk), w)),
            "vp": weighted_norm(fk - pk, p, w, None if p == np.inf else rule_for((fk, pk), w)),
            "bound_E": n ** (k - r) * e_r,
            "bound_modulus": n ** (k - r) * om_r,
        })
    return rows
