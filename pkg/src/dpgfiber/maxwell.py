"""Time-harmonic Maxwell physics on top of the DPG core.

Conventions (e^{-i omega t}, mu = 1, fields nondimensionalized):

    curl H - (i omega n^2 + sigma) E = J_E        (Ampere + gain/loss)
    curl E +  i omega H              = J_H        (Faraday)

sigma is the active-gain conductivity produced by the Raman model; inside a
PML both zeroth-order coefficients are multiplied by the stretch tensor.

This module supplies the coefficient callbacks for
:class:`dpgfiber.dpg.UltraweakProblem`, sympy-backed manufactured solutions,
boundary trace projection (Dirichlet data), field projection and L2 error
norms, and a primal curl-curl DPG formulation with a globally conforming
H(curl) trial space (box meshes) used for discretization comparisons.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import sympy as sym

from . import basis, sumfact
from .basis import OrderTriple
from .dpg import TraceSpace, UltraweakProblem, _face_sign, solve_with_dirichlet
from .mesh import HexMesh, edge_local_id
from .pml import PmlStretch
from .quad import gauss_rule, gauss_rule_2d


@dataclass
class StepIndex:
    """Per-zone refractive index (constant within each element)."""

    n_core: float
    n_clad: float

    def __call__(self, zone: str) -> float:
        return self.n_core if zone == "core" else self.n_clad


@dataclass
class MaxwellCoefficients:
    """Material and load callbacks for the ultraweak formulation.

    index: callable zone -> n, or a float for homogeneous media.
    sigma_fn: optional gain conductivity sigma(e, X) -> array X.shape[:-1].
    pml: optional z stretch applied to both coefficient matrices.
    load_fn: optional (e, X) -> (f_E, f_H) physical loads.
    """

    omega: float
    mesh: HexMesh
    index: object = 1.0
    sigma_fn: object = None
    pml: PmlStretch = None
    load_fn: object = None

    def refractive_index(self, e: int) -> float:
        if callable(self.index):
            return self.index(self.mesh.zone[e])
        return float(self.index)

    def material(self, e: int, X: np.ndarray):
        shape = X.shape[:-1]
        n2 = self.refractive_index(e) ** 2
        coef = 1j * self.omega * n2
        if self.sigma_fn is not None:
            coef = coef + self.sigma_fn(e, X)
        if self.pml is not None:
            T = self.pml.tensor(X[..., 2])
        else:
            T = np.broadcast_to(np.eye(3), shape + (3, 3))
        M_E = -np.asarray(coef)[..., None, None] * T
        M_H = 1j * self.omega * T
        return np.ascontiguousarray(M_E), np.ascontiguousarray(M_H)

    def load(self, e: int, X: np.ndarray):
        if self.load_fn is None:
            return None
        return self.load_fn(e, X)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

_XYZ = sym.symbols("x y z")


def _lambdify_vec(exprs):
    fns = [sym.lambdify(_XYZ, e, "numpy") for e in exprs]

    def f(X):
        x, y, z = X[..., 0], X[..., 1], X[..., 2]
        out = np.zeros(X.shape[:-1] + (3,), dtype=np.complex128)
        for c, fn in enumerate(fns):
            out[..., c] = fn(x, y, z)
        return out

    return f


def _curl(exprs):
    x, y, z = _XYZ
    ex, ey, ez = exprs
    return (sym.diff(ez, y) - sym.diff(ey, z),
            sym.diff(ex, z) - sym.diff(ez, x),
            sym.diff(ey, x) - sym.diff(ex, y))


class ManufacturedSolution:
    """Exact (E, H) pair with the volume loads that make it a solution.

    E is a triple of sympy expressions in x, y, z.  If H is omitted it is
    derived from Faraday's law (making J_H vanish identically).
    """

    def __init__(self, omega: float, n: float, E_exprs, H_exprs=None):
        self.omega = omega
        self.n = n
        E = tuple(sym.sympify(e) for e in E_exprs)
        if H_exprs is None:
            H = tuple(sym.expand(c / (-sym.I * omega)) for c in _curl(E))
        else:
            H = tuple(sym.sympify(h) for h in H_exprs)
        JE = tuple(sym.expand(ch - (sym.I * omega * n**2) * e)
                   for ch, e in zip(_curl(H), E))
        JH = tuple(sym.expand(ce + sym.I * omega * h)
                   for ce, h in zip(_curl(E), H))
        self.E = _lambdify_vec(E)
        self.H = _lambdify_vec(H)
        self.JE = _lambdify_vec(JE)
        self.JH = _lambdify_vec(JH)
        self._JH_zero = all(j == 0 for j in JH)

    def load(self, e: int, X: np.ndarray):
        fH = None if self._JH_zero else self.JH(X)
        return self.JE(X), fH

    def exact6(self, X: np.ndarray) -> np.ndarray:
        """(E, H) stacked: shape X.shape[:-1] + (6,)."""
        return np.concatenate([self.E(X), self.H(X)], axis=-1)


def polynomial_mms(omega: float, n: float, degree: int) -> ManufacturedSolution:
    """A dense polynomial exact solution of the given componentwise degree."""
    x, y, z = _XYZ
    rng = np.random.default_rng(degree)

    def poly():
        terms = []
        for i in range(degree + 1):
            for j in range(degree + 1 - i):
                for k in range(degree + 1 - i - j):
                    c = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
                    terms.append(c * x**i * y**j * z**k)
        return sum(terms)

    E = (poly(), poly(), poly())
    H = (poly(), poly(), poly())
    return ManufacturedSolution(omega, n, E, H)


def smooth_mms(omega: float, n: float, scale: float = 1.0) -> ManufacturedSolution:
    """A non-polynomial smooth exact solution for convergence studies."""
    x, y, z = _XYZ
    s = scale
    E = (sym.sin(s * y) * sym.cos(s * z),
         sym.cos(s * x) * sym.sin(s * z),
         sym.sin(s * x) * sym.sin(s * y))
    return ManufacturedSolution(omega, n, E)


# ---------------------------------------------------------------------------
# Trace projection (Dirichlet data) and field norms
# ---------------------------------------------------------------------------

def _face_quad_geometry(problem, e, lf, npts=None):
    """Quadrature, trace tabs, inverse metric and area factor on a face."""
    ref = problem._face_ref[lf]
    a, b = ref["pts2d"]
    w = ref["w"]
    ttab = ref["ttab"]
    a1, a2 = basis.FACE_AXES[lf]
    pts3 = basis.face_points_3d(lf, a, b)
    X, J = problem.mesh.geometry(e).eval_points(pts3)
    xa, xb = J[:, :, a1], J[:, :, a2]
    Gm = np.empty((len(a), 2, 2))
    Gm[:, 0, 0] = np.sum(xa * xa, axis=1)
    Gm[:, 0, 1] = Gm[:, 1, 0] = np.sum(xa * xb, axis=1)
    Gm[:, 1, 1] = np.sum(xb * xb, axis=1)
    Gi = np.linalg.inv(Gm)
    sq = np.sqrt(np.linalg.det(Gm))
    return X, xa, xb, Gi, sq, w, ttab


def project_boundary_traces(problem: UltraweakProblem, faces, field_fn):
    """Surface L2 projection of a tangential field onto the trace space.

    field_fn(X) -> physical 3-vectors (npts, 3).  Returns (geo_dofs, values)
    for all trace dofs carried by the given faces.
    """
    ts = problem.trace_space
    involved = {}
    rows, cols, vals = [], [], []
    rhs = {}
    for f in faces:
        e, lf = problem.mesh.face_elems[f][0]
        X, xa, xb, Gi, sq, w, ttab = _face_quad_geometry(problem, e, lf)
        gdofs, signs = ts.face_scatter(e, lf)
        F = field_fn(X)
        cov = np.stack([np.sum(F * xa, axis=1), np.sum(F * xb, axis=1)])
        Mloc = np.einsum("mag,gab,nbg,g->mn", ttab, Gi, ttab, w * sq)
        rloc = np.einsum("mag,gab,bg,g->m", ttab, Gi, cov, w * sq)
        sm = signs
        for m, gm in enumerate(gdofs):
            involved[int(gm)] = True
            rhs[int(gm)] = rhs.get(int(gm), 0.0) + sm[m] * rloc[m]
            for n_, gn in enumerate(gdofs):
                rows.append(int(gm))
                cols.append(int(gn))
                vals.append(sm[m] * sm[n_] * Mloc[m, n_])
    dofs = np.array(sorted(involved), dtype=np.int64)
    pos = {int(g): k for k, g in enumerate(dofs)}
    nd = len(dofs)
    M = sp.coo_matrix(
        (vals, ([pos[r] for r in rows], [pos[c] for c in cols])),
        shape=(nd, nd)).tocsc()
    b = np.zeros(nd, dtype=np.complex128)
    for g, v in rhs.items():
        b[pos[g]] = v
    u = sp.linalg.spsolve(M, b)
    return dofs, u


def project_fields(problem: UltraweakProblem, exact_fn) -> np.ndarray:
    """Element-local L2 projection of exact fields onto the discrete field
    space (the best approximation); exact_fn(X) -> (..., 6)."""
    rule = problem.rule
    ytab = problem._yv.tabulate()[:, 0, :]  # (ny, npts)
    w = rule.weights
    ne = problem.mesh.n_elems
    out = np.zeros((ne, 6, problem.ny), dtype=np.complex128)
    for e in range(ne):
        X, _, _, detJ = problem.element_geometry(e)
        dj = (detJ.reshape(-1)) * w
        M = (ytab * dj) @ ytab.T
        f = exact_fn(X).reshape(-1, 6)
        rhsm = (ytab * dj) @ f
        out[e] = sla.solve(M, rhsm, assume_a="pos").T
    return out


def field_l2_norms(problem: UltraweakProblem, fields, exact_fn=None,
                   comps=range(6)):
    """(error, exact_norm) over the listed components; with exact_fn None
    returns (norm of the discrete fields, 0)."""
    rule = problem.rule
    ytab = problem._yv.tabulate()[:, 0, :]
    w = rule.weights
    err2, ref2 = 0.0, 0.0
    comps = list(comps)
    for e in range(problem.mesh.n_elems):
        X, _, _, detJ = problem.element_geometry(e)
        dj = detJ.reshape(-1) * w
        uh = fields[e] @ ytab  # (6, npts)
        if exact_fn is None:
            err2 += np.sum(np.abs(uh[comps]) ** 2 * dj)
            continue
        ux = exact_fn(X).reshape(-1, 6).T
        err2 += np.sum(np.abs(uh[comps] - ux[comps]) ** 2 * dj)
        ref2 += np.sum(np.abs(ux[comps]) ** 2 * dj)
    return np.sqrt(err2), np.sqrt(ref2)


def eval_fields_at(problem: UltraweakProblem, fields, points):
    """Evaluate the piecewise field solution at physical points (n, 3).

    Returns (values (n, 6) complex, found mask)."""
    pts = np.atleast_2d(points)
    out = np.zeros((len(pts), 6), dtype=np.complex128)
    ok = np.zeros(len(pts), dtype=bool)
    for k, x in enumerate(pts):
        e, xi = problem.mesh.element_containing(x)
        if e is None:
            continue
        ytab, _ = basis.shape_eval("Y", problem.orders, xi[None, :])
        out[k] = fields[e] @ ytab[:, 0, 0]
        ok[k] = True
    return out, ok


# ---------------------------------------------------------------------------
# Conforming H(curl) numbering and the primal formulation
# ---------------------------------------------------------------------------

def conforming_scatter(m: HexMesh, orders: OrderTriple, ts: TraceSpace):
    """Global numbering of the conforming H(curl) space built from the same
    hierarchy: [trace geo dofs; element interior dofs].

    Returns (gdofs (ne, nQ), signs (ne, nQ), n_total).
    """
    o = tuple(orders)
    nQ = basis.space_dim("Q", orders)
    ne = m.n_elems
    gdofs = np.full((ne, nQ), -1, dtype=np.int64)
    signs = np.ones((ne, nQ))

    # face-attached shapes via the trace layouts
    face_maps = {}
    for lf in range(6):
        face_maps[lf] = {d.vol_index: k
                         for k, d in enumerate(ts.face_layout(lf))}

    n_int_per = None
    for e in range(ne):
        scat = {lf: ts.face_scatter(e, lf) for lf in range(6)}
        interior = []
        idx = 0
        for c in range(3):
            dims = [o[k] if k == c else o[k] + 1 for k in range(3)]
            d1, d2 = [d for d in range(3) if d != c]
            for i0 in range(dims[0]):
                for i1 in range(dims[1]):
                    for i2 in range(dims[2]):
                        iax = (i0, i1, i2)
                        hats = [d for d in (d1, d2) if iax[d] < 2]
                        if len(hats) == 2:
                            le = edge_local_id(c, iax[d1], iax[d2])
                            gid, flip = m.elem_edges[e, le]
                            gdofs[e, idx] = ts.edge_offset[gid] + iax[c]
                            signs[e, idx] = basis.edge_dof_sign(
                                iax[c], bool(flip))
                        elif len(hats) == 1:
                            d = hats[0]
                            lf = 2 * d + iax[d]
                            k = face_maps[lf][idx]
                            gd, sg = scat[lf]
                            gdofs[e, idx] = gd[k]
                            signs[e, idx] = sg[k]
                        else:
                            interior.append(idx)
                        idx += 1
        if n_int_per is None:
            n_int_per = len(interior)
        for j, ii in enumerate(interior):
            gdofs[e, ii] = ts.n_geo + e * n_int_per + j
    return gdofs, signs, ts.n_geo + ne * n_int_per


def hcurl_projection_error(m: HexMesh, orders: OrderTriple, E_fn, curlE_fn,
                           nquad: int = None):
    """Best approximation of a field in the conforming H(curl) space under
    the full H(curl) norm.  Returns (error, reference_norm) with
    error^2 = ||E - Eh||^2 + ||curl E - curl Eh||^2."""
    ts = TraceSpace(m, orders)
    gdofs, gsigns, ntot = conforming_scatter(m, orders, ts)
    rule = gauss_rule(nquad or max(orders) + 2)
    tb = basis.Tab1D(orders, rule.points_1d)
    qv, qc = basis.q_value(tb), basis.q_curl(tb)
    w = rule.weights

    def cf(C):
        return np.ascontiguousarray(np.moveaxis(C, (-2, -1), (0, 1)),
                                    dtype=np.complex128)

    def geo(e):
        X, J, detJ = m.geometry(e).eval(rule.points_1d)
        P = np.swapaxes(np.linalg.inv(J), -1, -2)
        K = J / detJ[..., None, None]
        return X, P, K, detJ

    rows, cols, vals = [], [], []
    rhs = np.zeros(ntot, dtype=np.complex128)
    for e in range(m.n_elems):
        X, P, K, detJ = geo(e)
        dJ = detJ[..., None, None]
        PtP = np.einsum("...ac,...ab->...cb", P, P) * dJ
        KtK = np.einsum("...ac,...ab->...cb", K, K) * dJ
        M = sumfact.integrate_bilinear(qv, qv, cf(PtP), rule)
        M += sumfact.integrate_bilinear(qc, qc, cf(KtK), rule)
        fv = np.moveaxis(np.einsum("...ac,...a->...c", P, E_fn(X))
                         * detJ[..., None], -1, 0)
        fc = np.moveaxis(np.einsum("...ac,...a->...c", K, curlE_fn(X))
                         * detJ[..., None], -1, 0)
        r = sumfact.integrate_linear(qv, fv, rule)
        r += sumfact.integrate_linear(qc, fc, rule)
        sg = gsigns[e]
        np.add.at(rhs, gdofs[e], sg * r)
        R, C = np.meshgrid(gdofs[e], gdofs[e], indexing="ij")
        rows.append(R.ravel())
        cols.append(C.ravel())
        vals.append((np.outer(sg, sg) * M).ravel())
    M = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ntot, ntot)).tocsc()
    u = sp.linalg.spsolve(M, rhs)

    dense_v = qv.tabulate()
    dense_c = qc.tabulate()
    err2, ref2 = 0.0, 0.0
    for e in range(m.n_elems):
        X, P, K, detJ = geo(e)
        dj = detJ.reshape(-1) * w
        coef = gsigns[e] * u[gdofs[e]]
        Pg = P.reshape(-1, 3, 3)
        Kg = K.reshape(-1, 3, 3)
        Eh = np.einsum("gac,cg->ga", Pg, np.einsum("j,jcg->cg", coef, dense_v))
        Ch = np.einsum("gac,cg->ga", Kg, np.einsum("j,jcg->cg", coef, dense_c))
        Ex = E_fn(X).reshape(-1, 3)
        Cx = curlE_fn(X).reshape(-1, 3)
        err2 += np.sum(np.abs(Eh - Ex) ** 2 * dj[:, None])
        err2 += np.sum(np.abs(Ch - Cx) ** 2 * dj[:, None])
        ref2 += np.sum((np.abs(Ex) ** 2 + np.abs(Cx) ** 2) * dj[:, None])
    return np.sqrt(err2), np.sqrt(ref2)


@dataclass
class PrimalProblem:
    """Primal curl-curl DPG formulation with conforming H(curl) trial E and
    an H-trace unknown on the skeleton; test norm ||F||^2 + ||curl F||^2.

        (curl E, curl F) - omega^2 n^2 (E, F) + i omega <n x Hhat, F>
            = -i omega (J_E, F)

    Unknown vector: [conforming E dofs; H-trace geo dofs].  An impedance
    face n x E = gamma H_t replaces its H-trace by the Robin term
    -(i omega / gamma)(E_t, F_t).
    """

    mesh: HexMesh
    orders: OrderTriple
    omega: float
    n_index: float = 1.0
    dp: int = 1
    nquad: int = None
    impedance_faces: dict = field(default_factory=dict)
    load_fn: object = None

    def __post_init__(self):
        self.test_orders = self.orders.bump(self.dp)
        nqd = self.nquad or (max(self.test_orders) + 2)
        self.rule = gauss_rule(nqd)
        self.trace_space = TraceSpace(self.mesh, self.orders)
        self.gdofs, self.gsigns, self.n_e_dofs = conforming_scatter(
            self.mesh, self.orders, self.trace_space)
        self.n_geo = self.trace_space.n_geo
        self.n_total = self.n_e_dofs + self.n_geo
        self._tb_test = basis.Tab1D(self.test_orders, self.rule.points_1d)
        self._tb_trial = basis.Tab1D(self.orders, self.rule.points_1d)
        self._qv_t = basis.q_value(self._tb_test)
        self._qc_t = basis.q_curl(self._tb_test)
        self._qv_u = basis.q_value(self._tb_trial)
        self._qc_u = basis.q_curl(self._tb_trial)
        self.nQ = basis.space_dim("Q", self.orders)
        self.nt = basis.space_dim("Q", self.test_orders)
        self._face_ref = {}
        for lf in range(6):
            a1, a2 = basis.FACE_AXES[lf]
            na = max(self.orders[a1], self.test_orders[a1]) + 2
            nb = max(self.orders[a2], self.test_orders[a2]) + 2
            a, b, w = gauss_rule_2d(na, nb)
            layout, ttab = basis.face_trace("Q", self.orders, lf, 0, (a, b))
            pts3 = basis.face_points_3d(lf, a, b)
            tvals, _ = basis.shape_eval("Q", self.test_orders, pts3)
            va, vb = tvals[:, a1], tvals[:, a2]
            F = _face_sign(lf) * ((ttab[:, 0] * w) @ vb.T
                                  - (ttab[:, 1] * w) @ va.T)
            self._face_ref[lf] = {"F": F, "pts2d": (a, b), "w": w,
                                  "ttab": ttab, "layout": layout}

    def _cf(self, C):
        return np.ascontiguousarray(np.moveaxis(C, (-2, -1), (0, 1)),
                                    dtype=np.complex128)

    def element_matrices(self, e: int):
        gm = self.mesh.geometry(e)
        X, J, detJ = gm.eval(self.rule.points_1d)
        Jinv = np.linalg.inv(J)
        P = np.swapaxes(Jinv, -1, -2)
        K = J / detJ[..., None, None]
        dJ = detJ[..., None, None]
        PtP = np.einsum("...ac,...ab->...cb", P, P) * dJ
        KtK = np.einsum("...ac,...ab->...cb", K, K) * dJ
        c0 = -self.omega**2 * self.n_index**2

        B = sumfact.integrate_bilinear(self._qc_t, self._qc_u,
                                       self._cf(KtK), self.rule)
        B += c0 * sumfact.integrate_bilinear(self._qv_t, self._qv_u,
                                             self._cf(PtP), self.rule)
        G = sumfact.integrate_bilinear(self._qv_t, self._qv_t,
                                       self._cf(PtP), self.rule)
        G += sumfact.integrate_bilinear(self._qc_t, self._qc_t,
                                        self._cf(KtK), self.rule)

        l = np.zeros(self.nt, dtype=np.complex128)
        if self.load_fn is not None:
            fE, _ = self.load_fn(e, X)
            f = np.moveaxis(
                np.einsum("...ac,...a->...c", P, fE) * detJ[..., None], -1, 0)
            l = -1j * self.omega * sumfact.integrate_linear(self._qv_t, f,
                                                            self.rule)

        # trace / impedance face terms
        cols, blocks = [], []
        ts = self.trace_space
        for lf in range(6):
            ref = self._face_ref[lf]
            gd, sg = ts.face_scatter(e, lf)
            fid = self.mesh.elem_faces[e, lf, 0]
            gamma = self.impedance_faces.get(int(fid))
            if gamma is None:
                blk = 1j * self.omega * (sg * ref["F"].T)
                blocks.append(blk)
                cols.append(self.n_e_dofs + gd)
            else:
                Fi = self._metric_face_matrix(e, lf)
                for k, dof in enumerate(ref["layout"]):
                    B[:, dof.vol_index] += -(1j * self.omega / gamma) * Fi[k]
        Bh = (np.concatenate(blocks, axis=1) if blocks
              else np.zeros((self.nt, 0), dtype=np.complex128))
        hcols = (np.concatenate(cols) if cols
                 else np.array([], dtype=np.int64))
        return G, B, Bh, l, hcols

    def _metric_face_matrix(self, e: int, lf: int):
        ref = self._face_ref[lf]
        a, b = ref["pts2d"]
        w = ref["w"]
        ttab = ref["ttab"]
        a1, a2 = basis.FACE_AXES[lf]
        pts3 = basis.face_points_3d(lf, a, b)
        _, J = self.mesh.geometry(e).eval_points(pts3)
        xa, xb = J[:, :, a1], J[:, :, a2]
        Gm = np.empty((len(a), 2, 2))
        Gm[:, 0, 0] = np.sum(xa * xa, axis=1)
        Gm[:, 0, 1] = Gm[:, 1, 0] = np.sum(xa * xb, axis=1)
        Gm[:, 1, 1] = np.sum(xb * xb, axis=1)
        Gi = np.linalg.inv(Gm)
        sq = np.sqrt(np.linalg.det(Gm))
        pts3v, _ = basis.shape_eval("Q", self.test_orders, pts3)
        v2 = np.stack([pts3v[:, a1], pts3v[:, a2]], axis=1)
        return np.einsum("mag,gab,ibg,g->mi", ttab, Gi, v2, w * sq)

    def assemble(self):
        rows, cols, vals = [], [], []
        rhs = np.zeros(self.n_total, dtype=np.complex128)
        for e in range(self.mesh.n_elems):
            G, B, Bh, l, hcols = self.element_matrices(e)
            Bs = B * self.gsigns[e]
            A = np.column_stack([Bs, Bh])
            Lc = sla.cholesky(G, lower=True)
            W = sla.solve_triangular(Lc, np.column_stack([A, l]), lower=True)
            Wa, wl = W[:, :-1], W[:, -1]
            Ke = Wa.conj().T @ Wa
            ge = Wa.conj().T @ wl
            gall = np.concatenate([self.gdofs[e], hcols])
            np.add.at(rhs, gall, ge)
            R, C = np.meshgrid(gall, gall, indexing="ij")
            rows.append(R.ravel())
            cols.append(C.ravel())
            vals.append(Ke.ravel())
        K = sp.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_total, self.n_total)).tocsr()
        return K, rhs

    def inactive_h_dofs(self) -> np.ndarray:
        """H-trace dofs on impedance faces (substituted out)."""
        if not self.impedance_faces:
            return np.array([], dtype=np.int64)
        geo = self.trace_space.faces_geo_dofs(list(self.impedance_faces))
        return self.n_e_dofs + geo

    def solve(self, dirichlet_dofs, dirichlet_values):
        K, rhs = self.assemble()
        return solve_with_dirichlet(K, rhs, dirichlet_dofs, dirichlet_values,
                                    self.n_total)

    def e_field_l2_error(self, u, exact_fn):
        """L2 error of the conforming E field; exact_fn(X) -> (..., 3)."""
        rule = self.rule
        dense = self._qv_u.tabulate()  # (nQ, 3, npts)
        w = rule.weights
        err2, ref2 = 0.0, 0.0
        for e in range(self.mesh.n_elems):
            gm = self.mesh.geometry(e)
            X, J, detJ = gm.eval(rule.points_1d)
            P = np.swapaxes(np.linalg.inv(J), -1, -2).reshape(-1, 3, 3)
            dj = detJ.reshape(-1) * w
            coef = self.gsigns[e] * u[self.gdofs[e]]
            ref_vals = np.einsum("j,jcg->cg", coef, dense)
            Eh = np.einsum("gac,cg->ga", P, ref_vals)
            Ex = exact_fn(X).reshape(-1, 3)
            err2 += np.sum(np.abs(Eh - Ex) ** 2 * dj[:, None])
            ref2 += np.sum(np.abs(Ex) ** 2 * dj[:, None])
        return np.sqrt(err2), np.sqrt(ref2)

    def e_field_hcurl_error(self, u, exact_fn, exact_curl_fn):
        """H(curl)-norm error of the conforming E field."""
        rule = self.rule
        dense_v = self._qv_u.tabulate()
        dense_c = self._qc_u.tabulate()
        w = rule.weights
        err2, ref2 = 0.0, 0.0
        for e in range(self.mesh.n_elems):
            gm = self.mesh.geometry(e)
            X, J, detJ = gm.eval(rule.points_1d)
            P = np.swapaxes(np.linalg.inv(J), -1, -2).reshape(-1, 3, 3)
            K = (J / detJ[..., None, None]).reshape(-1, 3, 3)
            dj = detJ.reshape(-1) * w
            coef = self.gsigns[e] * u[self.gdofs[e]]
            Eh = np.einsum("gac,cg->ga", P,
                           np.einsum("j,jcg->cg", coef, dense_v))
            Ch = np.einsum("gac,cg->ga", K,
                           np.einsum("j,jcg->cg", coef, dense_c))
            Ex = exact_fn(X).reshape(-1, 3)
            Cx = exact_curl_fn(X).reshape(-1, 3)
            err2 += np.sum((np.abs(Eh - Ex) ** 2
                            + np.abs(Ch - Cx) ** 2) * dj[:, None])
            ref2 += np.sum((np.abs(Ex) ** 2 + np.abs(Cx) ** 2) * dj[:, None])
        return np.sqrt(err2), np.sqrt(ref2)
