"""Sum-factorized integration of element bilinear and linear forms.

Forms are written as

    M[i, j] = sum_g  test_i[a](g) * C[a, b](g) * trial_j[b](g)

with real tensor-product shape tables and a pointwise (possibly complex)
coefficient tensor C that already carries material data, pullbacks and the
Jacobian determinant; quadrature weights are folded in here.  Conjugation of
sesquilinear forms lives entirely in C, never in the tables.

Because every shape block is a tensor product (see
:class:`dpgfiber.basis.TensorTerm`), the triple quadrature sum factorizes
into three staged contractions of cost O(p^7) instead of the naive O(p^9)
point loop.  Both a numba kernel and a pure-numpy einsum path are provided;
``dpgfiber.backend`` picks the lane.  The naive point-loop integrator is kept
as the correctness oracle and the timing baseline.
"""

import numpy as np

from .backend import USE_NUMBA, njit
from .basis import TensorFamily
from .quad import QuadratureRule


@njit(cache=True)
def _sf3_kernel(A, V0, V1, V2, U0, U1, U2):
    ng0, ng1, ng2 = A.shape
    nv0, nv1, nv2 = V0.shape[0], V1.shape[0], V2.shape[0]
    nu0, nu1, nu2 = U0.shape[0], U1.shape[0], U2.shape[0]
    C1 = np.zeros((ng0, ng1, nv2, nu2), np.complex128)
    for x in range(ng0):
        for y in range(ng1):
            for a in range(nv2):
                for b in range(nu2):
                    s = 0.0 + 0.0j
                    for z in range(ng2):
                        s += A[x, y, z] * V2[a, z] * U2[b, z]
                    C1[x, y, a, b] = s
    C2 = np.zeros((ng0, nv1, nu1, nv2, nu2), np.complex128)
    for x in range(ng0):
        for c in range(nv1):
            for d in range(nu1):
                for a in range(nv2):
                    for b in range(nu2):
                        s = 0.0 + 0.0j
                        for y in range(ng1):
                            s += C1[x, y, a, b] * V1[c, y] * U1[d, y]
                        C2[x, c, d, a, b] = s
    M = np.zeros((nv0, nv1, nv2, nu0, nu1, nu2), np.complex128)
    for e in range(nv0):
        for f in range(nu0):
            for c in range(nv1):
                for d in range(nu1):
                    for a in range(nv2):
                        for b in range(nu2):
                            s = 0.0 + 0.0j
                            for x in range(ng0):
                                s += C2[x, c, d, a, b] * V0[e, x] * U0[f, x]
                            M[e, c, a, f, d, b] = s
    return M


def _sf3_einsum(A, V0, V1, V2, U0, U1, U2):
    C1 = np.einsum("xyz,az,bz->xyab", A, V2, U2)
    C2 = np.einsum("xyab,cy,dy->xcdab", C1, V1, U1)
    return np.einsum("xcdab,ex,fx->ecafdb", C2, V0, U0)


@njit(cache=True)
def _naive_pair_kernel(A, V, U, M):
    """Honest point loop: M[i, j] += sum_g V[i, g] A[g] U[j, g]."""
    nv, nu, ng = V.shape[0], U.shape[0], A.shape[0]
    for i in range(nv):
        for j in range(nu):
            s = 0.0 + 0.0j
            for g in range(ng):
                s += V[i, g] * A[g] * U[j, g]
            M[i, j] += s


def integrate_bilinear(test: TensorFamily, trial: TensorFamily,
                       coeff: np.ndarray, rule: QuadratureRule,
                       lane: str = None) -> np.ndarray:
    """Sum-factorized element matrix (test.ndof, trial.ndof).

    coeff has shape (test.ncomp, trial.ncomp, ngx, ngy, ngz); weights are
    applied internally.  ``lane`` overrides the backend choice
    ("numba" | "numpy"), mainly for benchmarking.
    """
    shape = rule.shape
    if coeff.shape != (test.ncomp, trial.ncomp) + shape:
        raise ValueError("coefficient tensor shape mismatch")
    W = rule.weights_grid
    M = np.zeros((test.ndof, trial.ndof), dtype=np.complex128)
    if lane is None:
        kern = _sf3_kernel if USE_NUMBA else _sf3_einsum
    else:
        kern = {"numba": _sf3_kernel, "numpy": _sf3_einsum}[lane]
    for tv in test.terms:
        for tu in trial.terms:
            C = coeff[tv.comp, tu.comp]
            if not np.any(C):
                continue
            A = np.ascontiguousarray((C * W) * (tv.sign * tu.sign),
                                     dtype=np.complex128)
            blk = kern(A, tv.tabs[0], tv.tabs[1], tv.tabs[2],
                       tu.tabs[0], tu.tabs[1], tu.tabs[2])
            nv = tv.dims[0] * tv.dims[1] * tv.dims[2]
            nu = tu.dims[0] * tu.dims[1] * tu.dims[2]
            M[tv.offset:tv.offset + nv, tu.offset:tu.offset + nu] += \
                blk.reshape(nv, nu)
    return M


def integrate_bilinear_naive(test: TensorFamily, trial: TensorFamily,
                             coeff: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """Point-loop reference integrator (correctness oracle, timing baseline)."""
    shape = rule.shape
    if coeff.shape != (test.ncomp, trial.ncomp) + shape:
        raise ValueError("coefficient tensor shape mismatch")
    w = rule.weights
    Vd = test.tabulate()
    Ud = trial.tabulate()
    M = np.zeros((test.ndof, trial.ndof), dtype=np.complex128)
    for a in range(test.ncomp):
        for b in range(trial.ncomp):
            C = coeff[a, b].reshape(-1)
            if not np.any(C):
                continue
            A = np.ascontiguousarray(C * w, dtype=np.complex128)
            if USE_NUMBA:
                _naive_pair_kernel(A, Vd[:, a], Ud[:, b], M)
            else:
                M += (Vd[:, a] * A) @ Ud[:, b].T
    return M


def integrate_linear(test: TensorFamily, f: np.ndarray,
                     rule: QuadratureRule) -> np.ndarray:
    """Sum-factorized load vector: l[i] = sum_g test_i[a](g) f[a](g).

    f has shape (test.ncomp, ngx, ngy, ngz); weights applied internally.
    """
    if f.shape != (test.ncomp,) + rule.shape:
        raise ValueError("load tensor shape mismatch")
    W = rule.weights_grid
    out = np.zeros(test.ndof, dtype=np.complex128)
    for tv in test.terms:
        A = f[tv.comp] * W
        if not np.any(A):
            continue
        blk = np.einsum("xyz,ax,by,cz->abc", A, tv.tabs[0], tv.tabs[1],
                        tv.tabs[2])
        n = tv.dims[0] * tv.dims[1] * tv.dims[2]
        out[tv.offset:tv.offset + n] += tv.sign * blk.reshape(n)
    return out
