"""Benchmark of the element integration lanes.

Times the Gram-style H(curl) value/curl assembly on a curved fiber element
for the three available paths:

* sum factorization, numba kernel
* sum factorization, pure-numpy einsum fallback
* naive point-loop reference

Run as ``python -m dpgfiber.bench [pmax]``.
"""

import sys
import time

import numpy as np

from . import basis, mesh, sumfact
from .backend import USE_NUMBA
from .basis import OrderTriple
from .quad import gauss_rule


def _element_coeff(m, e, rule):
    _, J, detJ = m.geometry(e).eval(rule.points_1d)
    P = np.swapaxes(np.linalg.inv(J), -1, -2)
    PtP = np.einsum("...ac,...ab->...cb", P, P) * detJ[..., None, None]
    return np.ascontiguousarray(np.moveaxis(PtP, (-2, -1), (0, 1)),
                                dtype=np.complex128)


def _time(fn, min_reps=3, min_time=0.3):
    fn()  # warm up (jit compilation, caches)
    reps, t0 = 0, time.perf_counter()
    while reps < min_reps or time.perf_counter() - t0 < min_time:
        fn()
        reps += 1
    return (time.perf_counter() - t0) / reps


def run(pmax: int = 5):
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0.0, 1.0, 2))
    e = 1  # curved core element
    rows = []
    for p in range(2, pmax + 1):
        orders = OrderTriple(p, p, p)
        rule = gauss_rule(p + 2)
        tb = basis.Tab1D(orders, rule.points_1d)
        qv = basis.q_value(tb)
        coeff = _element_coeff(m, e, rule)

        def sf_numba():
            return sumfact.integrate_bilinear(qv, qv, coeff, rule,
                                              lane="numba")

        def sf_numpy():
            return sumfact.integrate_bilinear(qv, qv, coeff, rule,
                                              lane="numpy")

        def naive():
            return sumfact.integrate_bilinear_naive(qv, qv, coeff, rule)

        t_naive = _time(naive)
        t_np = _time(sf_numpy)
        t_nb = _time(sf_numba) if USE_NUMBA else float("nan")
        rows.append((p, qv.ndof, t_naive, t_np, t_nb))
    return rows


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    pmax = int(argv[0]) if argv else 5
    print(f"numba available: {USE_NUMBA}")
    print(f"{'p':>2} {'ndof':>5} {'naive':>10} {'sf-numpy':>10} "
          f"{'sf-numba':>10} {'best speedup':>12}")
    for p, ndof, t_naive, t_np, t_nb in run(pmax):
        best = min(t for t in (t_np, t_nb) if t == t)
        print(f"{p:>2} {ndof:>5} {t_naive:>10.4f} {t_np:>10.4f} "
              f"{t_nb:>10.4f} {t_naive / best:>11.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
