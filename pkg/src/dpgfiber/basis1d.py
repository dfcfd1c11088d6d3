"""1D shape-function hierarchies on [0, 1].

H1 hierarchy of order p (dimension p+1): the two vertex hat functions plus
integrated-Legendre bubbles b_n, n = 2..p.  L2 hierarchy of dimension p:
Legendre polynomials P_0..P_{p-1} mapped to [0, 1].

These two families are compatible with the exact sequence: the derivative of
every H1 function of order p lies in the span of the L2 family of dimension p
(see ``h1_deriv_matrix``).  Both families have definite parity under the
coordinate reversal x -> 1-x, which makes face/edge orientation handling a
signed permutation:

    hat0 <-> hat1,   b_n -> (-1)^n b_n,   P_m -> (-1)^m P_m.
"""

import numpy as np
from numpy.polynomial import legendre


def _legendre_vals(nmax: int, t: np.ndarray) -> np.ndarray:
    """P_0..P_nmax on [-1, 1], shape (nmax+1, len(t))."""
    out = np.empty((nmax + 1, len(t)))
    for n in range(nmax + 1):
        c = np.zeros(n + 1)
        c[n] = 1.0
        out[n] = legendre.legval(t, c)
    return out


def h1_tab(p: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the order-p H1 hierarchy at points x.

    Returns (vals, ders), each of shape (p+1, len(x)).  Ordering:
    [hat at 0, hat at 1, b_2, ..., b_p].
    """
    if p < 1:
        raise ValueError("H1 hierarchy needs order >= 1")
    x = np.asarray(x, dtype=float)
    t = 2.0 * x - 1.0
    vals = np.empty((p + 1, len(x)))
    ders = np.empty((p + 1, len(x)))
    vals[0] = 1.0 - x
    ders[0] = -1.0
    vals[1] = x
    ders[1] = 1.0
    if p >= 2:
        P = _legendre_vals(p, t)
        for n in range(2, p + 1):
            vals[n] = (P[n] - P[n - 2]) / (2 * n - 1)
            ders[n] = 2.0 * P[n - 1]
    return vals, ders


def l2_tab(dim: int, x: np.ndarray) -> np.ndarray:
    """Values of the L2 hierarchy of dimension dim (degree dim-1) at x."""
    if dim < 1:
        raise ValueError("L2 hierarchy needs dimension >= 1")
    x = np.asarray(x, dtype=float)
    return _legendre_vals(dim - 1, 2.0 * x - 1.0)


def h1_deriv_matrix(p: int) -> np.ndarray:
    """Matrix D, (p+1, p), with  d/dx h1_i = sum_m D[i, m] l2_m."""
    D = np.zeros((p + 1, p))
    D[0, 0] = -1.0
    D[1, 0] = 1.0
    for n in range(2, p + 1):
        D[n, n - 1] = 2.0
    return D


def h1_reversal_signs(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutation and signs realizing f(1-x) for the H1 family.

    Returns (perm, sign) with  h1_i(1-x) = sign[i] * h1_perm[i](x).
    """
    perm = np.arange(p + 1)
    perm[0], perm[1] = 1, 0
    sign = np.ones(p + 1)
    for n in range(2, p + 1):
        sign[n] = (-1.0) ** n
    return perm, sign


def l2_reversal_signs(dim: int) -> np.ndarray:
    """Signs s with  P_m(1-x expressed) = s[m] * P_m(x): s[m] = (-1)^m."""
    return (-1.0) ** np.arange(dim)
