"""
Explicit constants of the operator bounds, computed from the weight
characteristics ``[w]_p``, ``[w]_1``, ``C8`` and ``||w||_1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ClassificationError
from ..weights import Weight, auxiliary_exponent, gamma_p, require_admissible

# Fejer kernel tail constant: with (1/pi) int k_n = 1 one has
# k_n(t) <= pi^2 / (2 (n+1) t^2); 2 pi^2 is a safe envelope for either
# normalization of the kernel.
C11 = 2.0 * np.pi ** 2
JACKSON_FACTOR = (2.0 * np.pi) ** 4 * np.sqrt(2.0) / 3.0


@dataclass(frozen=True)
class Constant:
    value: float
    formula: str

    def as_dict(self):
        return {"value": self.value, "formula": self.formula}


def explicit_constants(w: Weight, p: float, r: int = 1, k: int = None) -> dict:
    """
    Constants ``C1, C2, C9, C10, C11, C12, C13, C14, C15, C18, C19`` for the
    weight ``w`` in ``L_{p,w}``.

    ``r`` is the smoothness order entering ``C13, C15, C18``; ``k`` (default
    ``r``) is the derivative order in ``C15``.  For ``1 < p < inf`` the
    constants ``C10`` and ``C12`` use ``[w]_s`` at the auxiliary exponent
    ``s = auxiliary_exponent(w, p)``.

    Raises
    ------
    ClassificationError
        If ``w`` is not admissible for ``p``.
    """
    p = float(p)
    k = r if k is None else k
    rep = require_admissible(w, p)
    c8 = rep.C8
    n1 = rep.l1_norm
    out = {}
    if 1 < p < np.inf:
        g = gamma_p(w, p)
        s = auxiliary_exponent(w, p)
        gs = gamma_p(w, s)
        out["C1"] = Constant(2 ** (1 / p) * 2 * np.pi * g ** (1 / p), "2^(1/p) 2pi [w]_p^(1/p)")
        out["C2"] = Constant(4 * np.pi * 3 ** (1 / p + 1) * g ** (1 / p), "4pi 3^(1/p+1) [w]_p^(1/p)")
        out["C9"] = Constant(g ** (1 / p) * n1 ** (-1 / p), "[w]_p^(1/p) ||w||_1^(-1/p)")
        out["C10"] = Constant(
            2 * 9 ** (1 + 1 / p) * g ** (1 / p)
            + JACKSON_FACTOR * (2 * np.pi) ** (1 - s / p) * n1 ** ((p - 1) / p) * gs,
            f"2 9^(1+1/p) [w]_p^(1/p) + (2pi)^4 sqrt2/3 (2pi)^(1-s/p) ||w||_1^((p-1)/p) [w]_s, s={s:g}")
        out["C12"] = Constant(
            18 ** (1 + 1 / p) * g ** (1 / p) + C11 * (2 * np.pi) ** (1 - s / p) * n1 ** ((p - 1) / p) * gs,
            f"18^(1+1/p) [w]_p^(1/p) + C11 (2pi)^(1-s/p) ||w||_1^((p-1)/p) [w]_s, s={s:g}")
    elif p == 1:
        if c8 <= 0:
            raise ClassificationError("p = 1 constants need a positive lower bound C8")
        g1 = gamma_p(w, 1.0)
        out["C1"] = Constant(2 * g1 * c8, "2 [w]_1 C8")
        out["C2"] = Constant(36 * np.pi * g1 / c8, "36pi [w]_1 / C8")
        out["C9"] = Constant(1 / c8, "1 / C8")
        out["C10"] = Constant(n1 * JACKSON_FACTOR / c8 + 162 * g1 / c8,
                              "||w||_1 (2pi)^4 sqrt2/3 / C8 + 162 [w]_1 / C8")
        out["C12"] = Constant(n1 * C11 / c8 + 324 * g1 / c8, "||w||_1 C11 / C8 + 324 [w]_1 / C8")
    else:
        out["C1"] = Constant(1.0, "1")
        out["C2"] = Constant(1.0, "1")
        out["C9"] = Constant(2 * np.pi, "2pi")
        out["C10"] = Constant(np.pi, "pi")
        out["C12"] = Constant(np.pi, "pi")
    out["C11"] = Constant(C11, "2pi^2")
    c1, c2, c9, c12 = out["C1"].value, out["C2"].value, out["C9"].value, out["C12"].value
    c13 = c1 ** r * (1 + c9 * n1 / (2 * np.pi)) ** r
    out["C13"] = Constant(c13, f"C1^r (1 + C9 ||w||_1 / 2pi)^r, r={r}")
    out["C14"] = Constant((1 + 3 * c12) * c13, "(1 + 3 C12) C13")
    out["C15"] = Constant(c13 * (1 + 3 * c12 + 3 * 2 ** (2 * k) * c12 ** (r + 1)),
                          f"C13 (1 + 3 C12 + 3 2^(2k) C12^(r+1)), k={k}")
    out["C18"] = Constant(72 * c2 * sum(c1 ** j for j in range(r)), f"72 C2 sum_(j<r) C1^j, r={r}")
    out["C19"] = Constant(2 * (1 + 36 * c2 + 144 * c2 * np.log(2)), "2 (1 + 36 C2 + 144 C2 ln2)")
    return out


def constant_values(w: Weight, p: float, r: int = 1, k: int = None) -> dict:
    """Plain ``name -> value`` view of :func:`explicit_constants`."""
    return {name: c.value for name, c in explicit_constants(w, p, r, k).items()}
