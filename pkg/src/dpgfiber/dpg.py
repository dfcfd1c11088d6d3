"""Discontinuous Petrov-Galerkin core in ultraweak form.

Per element the trial unknowns are six L2 field components (Ex..Hz, each a
scalar of the Y space at order p-1) plus tangential skeleton traces of both
fields (the trace part of the order-p H(curl) space on each face).  The test
space is a broken H(curl) pair (R, S) at order p + dp equipped with the
scaled adjoint graph norm

    ||v||^2_G = alpha ||v||^2 + ||A* v||^2 ,

where A* is the formal adjoint of the first-order Maxwell operator supplied
through the coefficient callbacks.  Optimal test functions are never formed
explicitly: each element computes the normal equations

    [B  Bhat]^H G^{-1} [B  Bhat]

via a Cholesky factor of G, statically condenses the field block, and
scatters the trace Schur complement into a global sparse system.  Fields and
the built-in a posteriori error indicator ||L^{-1}(l - B u)|| are recovered
in a second element pass.

Face coupling terms are computed entirely in reference coordinates: for two
tangential fields with covariant components (t_a, t_b) on a face,
(n x A) . B dS reduces to (t_a u_b - t_b u_a) da db, so no geometry enters
the trace matrices (impedance faces are the one exception, they need the
surface metric).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import basis, sumfact
from .basis import OrderTriple
from .mesh import HexMesh, edge_local_id
from .quad import QuadratureRule, gauss_rule, gauss_rule_2d


class TraceSpace:
    """Global numbering of skeleton trace dofs (one scalar copy).

    Geometric dofs are edge dofs (L2 hierarchy along each mesh edge) followed
    by face-interior dofs (owner frame).  The solver uses two copies, one for
    the E trace and one for the H trace.
    """

    def __init__(self, m: HexMesh, orders: OrderTriple):
        self.mesh = m
        self.orders = orders
        o = tuple(orders)
        edge_count = np.full(m.n_edges, -1, dtype=np.int64)
        for e in range(m.n_elems):
            for le in range(12):
                gid = m.elem_edges[e, le, 0]
                c = o[le // 4]
                if edge_count[gid] == -1:
                    edge_count[gid] = c
                elif edge_count[gid] != c:
                    raise ValueError("incompatible edge orders across elements")
        self.edge_count = edge_count
        self.edge_offset = np.concatenate([[0], np.cumsum(edge_count)])

        face_count = np.empty(m.n_faces, dtype=np.int64)
        for f, els in enumerate(m.face_elems):
            e, lf = els[0]
            a1, a2 = basis.FACE_AXES[lf]
            face_count[f] = basis.n_face_interior((o[a1], o[a2]))
        base = self.edge_offset[-1]
        self.face_offset = base + np.concatenate([[0], np.cumsum(face_count)])
        self.n_geo = int(self.face_offset[-1])

        self._layouts = {lf: basis.q_face_trace_layout(orders, lf)
                         for lf in range(6)}
        self._perm_cache = {}

    def face_layout(self, lf: int):
        return self._layouts[lf]

    def _perm(self, orders_face, code):
        key = (orders_face, code)
        if key not in self._perm_cache:
            self._perm_cache[key] = basis.interior_orient_signed_perm(
                orders_face, code)
        return self._perm_cache[key]

    def face_scatter(self, e: int, lf: int):
        """(gdofs, signs) for the local face-trace layout of element e."""
        m, o = self.mesh, tuple(self.orders)
        axis, side = lf // 2, lf % 2
        a1, a2 = basis.FACE_AXES[lf]
        fid, code = m.elem_faces[e, lf]
        perm, psign = self._perm((o[a1], o[a2]), code)
        layout = self._layouts[lf]
        gdofs = np.empty(len(layout), dtype=np.int64)
        signs = np.empty(len(layout))
        for k, dof in enumerate(layout):
            if dof.kind == "edge":
                eax = a1 if dof.family == 0 else a2
                across = a2 if dof.family == 0 else a1
                sides = {axis: side, across: dof.edge_side}
                others = sorted(d for d in range(3) if d != eax)
                le = edge_local_id(eax, sides[others[0]], sides[others[1]])
                gid, flip = m.elem_edges[e, le]
                gdofs[k] = self.edge_offset[gid] + dof.i
                signs[k] = basis.edge_dof_sign(dof.i, bool(flip))
            else:
                flat = basis.face_interior_index((o[a1], o[a2]), dof.family,
                                                 dof.i, dof.j)
                gdofs[k] = self.face_offset[fid] + perm[flat]
                signs[k] = psign[flat]
        return gdofs, signs

    def faces_geo_dofs(self, faces) -> np.ndarray:
        """All geometric dofs carried by the given global faces (interior
        dofs plus the dofs of their edges)."""
        out = set()
        for f in faces:
            e, lf = self.mesh.face_elems[f][0]
            gdofs, _ = self.face_scatter(e, lf)
            out.update(int(g) for g in gdofs)
        return np.array(sorted(out), dtype=np.int64)

    def face_interior_geo_dofs(self, f: int) -> np.ndarray:
        e, lf = self.mesh.face_elems[f][0]
        gdofs, _ = self.face_scatter(e, lf)
        layout = self._layouts[lf]
        return np.array([g for g, d in zip(gdofs, layout) if d.kind == "face"],
                        dtype=np.int64)


def _face_sign(lf: int) -> float:
    """Sign of (x_a cross x_b) . n_outward for the reference face frames."""
    axis, side = lf // 2, lf % 2
    base = 1.0 if axis in (0, 2) else -1.0
    return base if side == 1 else -base


@dataclass
class UltraweakProblem:
    """Mesh, orders and physics callbacks defining one linear solve.

    ``coeffs`` provides  material(e, X) -> (M_E, M_H), complex (..., 3, 3)
    zeroth-order coefficient matrices of the two Maxwell equations, and
    load(e, X) -> (f_E, f_H) physical volume loads (or None).  X has shape
    (n0, n1, n2, 3).  ``impedance_faces`` maps global boundary face ids to
    the impedance factor gamma of the absorbing condition n x E = gamma H_t.
    """

    mesh: HexMesh
    orders: OrderTriple
    coeffs: object
    dp: int = 1
    alpha: float = 1.0
    nquad: int | None = None
    impedance_faces: dict = field(default_factory=dict)

    def __post_init__(self):
        self.test_orders = self.orders.bump(self.dp)
        self.field_orders = self.orders  # Y space of this triple: degree p-1
        nq = self.nquad or (max(self.test_orders) + 2)
        self.rule = gauss_rule(nq)
        self.trace_space = TraceSpace(self.mesh, self.orders)
        self.n_geo = self.trace_space.n_geo
        self.n_trace = 2 * self.n_geo  # E traces then H traces
        self.ny = basis.space_dim("Y", self.orders)
        self.n_field = 6 * self.ny
        self.nt = 2 * basis.space_dim("Q", self.test_orders)
        self._tb_test = basis.Tab1D(self.test_orders, self.rule.points_1d)
        self._tb_trial = basis.Tab1D(self.orders, self.rule.points_1d)
        self._qv = basis.q_value(self._tb_test)
        self._qc = basis.q_curl(self._tb_test)
        self._yv = basis.y_value(self._tb_trial)
        self._face_ref = {lf: self._face_reference(lf) for lf in range(6)}

    def _face_reference(self, lf: int):
        """Reference face data: trace tabs, test covariant tabs, weights."""
        a1, a2 = basis.FACE_AXES[lf]
        na = max(self.orders[a1], self.test_orders[a1]) + 2
        nb = max(self.orders[a2], self.test_orders[a2]) + 2
        a, b, w = gauss_rule_2d(na, nb)
        layout, ttab = basis.face_trace("Q", self.orders, lf, 0, (a, b))
        pts3 = basis.face_points_3d(lf, a, b)
        tvals, _ = basis.shape_eval("Q", self.test_orders, pts3)
        va, vb = tvals[:, a1], tvals[:, a2]
        tau = _face_sign(lf)
        # F[m, i] = tau * int t_m,a v_i,b - t_m,b v_i,a
        F = tau * ((ttab[:, 0] * w) @ vb.T - (ttab[:, 1] * w) @ va.T)
        return {"F": F, "pts2d": (a, b), "w": w, "ttab": ttab,
                "layout": layout}

    # -- element level ----------------------------------------------------

    def element_geometry(self, e: int):
        gm = self.mesh.geometry(e)
        X, J, detJ = gm.eval(self.rule.points_1d)
        Jinv = np.linalg.inv(J)
        P = np.swapaxes(Jinv, -1, -2)  # J^{-T}, H(curl) value pullback
        K = J / detJ[..., None, None]  # curl pullback
        return X, P, K, detJ

    def element_matrices(self, e: int):
        """Cholesky factor of the Gram matrix, B, Bhat (signs folded in),
        load vector and the global column ids of the trace block."""
        X, P, K, detJ = self.element_geometry(e)
        M_E, M_H = self.coeffs.material(e, X)
        rule = self.rule
        nq = self.nt // 2

        def cf(C):
            """(..., a, b) pointwise matrix -> sumfact coefficient layout."""
            return np.ascontiguousarray(
                np.moveaxis(C, (-2, -1), (0, 1)), dtype=np.complex128)

        dJ = detJ[..., None, None]
        PtME = np.einsum("...ac,...ab->...cb", P, M_E) * dJ
        PtMH = np.einsum("...ac,...ab->...cb", P, M_H) * dJ
        Kt = np.swapaxes(K, -1, -2) * dJ

        B = np.zeros((self.nt, self.n_field), dtype=np.complex128)
        for b in range(3):
            col_E = slice(b * self.ny, (b + 1) * self.ny)
            col_H = slice((3 + b) * self.ny, (4 + b) * self.ny)
            B[:nq, col_E] = sumfact.integrate_bilinear(
                self._qv, self._yv, cf(PtME[..., :, b:b + 1]), rule)
            B[:nq, col_H] = sumfact.integrate_bilinear(
                self._qc, self._yv, cf(Kt[..., :, b:b + 1]), rule)
            B[nq:, col_E] = sumfact.integrate_bilinear(
                self._qc, self._yv, cf(Kt[..., :, b:b + 1]), rule)
            B[nq:, col_H] = sumfact.integrate_bilinear(
                self._qv, self._yv, cf(PtMH[..., :, b:b + 1]), rule)

        G = np.zeros((self.nt, self.nt), dtype=np.complex128)
        PtP = np.einsum("...ac,...ab->...cb", P, P) * dJ
        KtK = np.einsum("...ac,...ab->...cb", K, K) * dJ
        ME_MEH = np.einsum("...ab,...cb->...ac", M_E, np.conj(M_E))
        MH_MHH = np.einsum("...ab,...cb->...ac", M_H, np.conj(M_H))
        C_RR = self.alpha * PtP + np.einsum(
            "...ac,...ab,...bd->...cd", P, ME_MEH, P) * dJ
        C_SS = self.alpha * PtP + np.einsum(
            "...ac,...ab,...bd->...cd", P, MH_MHH, P) * dJ
        G[:nq, :nq] = sumfact.integrate_bilinear(self._qv, self._qv,
                                                 cf(C_RR), rule)
        G[:nq, :nq] += sumfact.integrate_bilinear(self._qc, self._qc,
                                                  cf(KtK), rule)
        G[nq:, nq:] = sumfact.integrate_bilinear(self._qv, self._qv,
                                                 cf(C_SS), rule)
        G[nq:, nq:] += sumfact.integrate_bilinear(self._qc, self._qc,
                                                  cf(KtK), rule)
        C_vc = np.einsum("...ac,...ab,...bd->...cd", P, M_E, K) * dJ
        C_cv = np.einsum("...ac,...ba,...bd->...cd", K, np.conj(M_H), P) * dJ
        G_RS = sumfact.integrate_bilinear(self._qv, self._qc, cf(C_vc), rule)
        G_RS += sumfact.integrate_bilinear(self._qc, self._qv, cf(C_cv), rule)
        G[:nq, nq:] = G_RS
        G[nq:, :nq] = G_RS.conj().T

        l = np.zeros(self.nt, dtype=np.complex128)
        loads = self.coeffs.load(e, X)
        if loads is not None:
            f_E, f_H = loads
            if f_E is not None:
                f = np.moveaxis(
                    np.einsum("...ac,...a->...c", P, f_E) * detJ[..., None],
                    -1, 0)
                l[:nq] = sumfact.integrate_linear(self._qv, f, rule)
            if f_H is not None:
                f = np.moveaxis(
                    np.einsum("...ac,...a->...c", P, f_H) * detJ[..., None],
                    -1, 0)
                l[nq:] = sumfact.integrate_linear(self._qv, f, rule)

        Bhat, gcols = self._element_trace_block(e)
        return G, B, Bhat, l, gcols

    def _element_trace_block(self, e: int):
        """Face coupling block with global column ids; orientation signs are
        folded into the columns.  Impedance faces couple into H columns."""
        ts = self.trace_space
        nq = self.nt // 2
        cols = []
        blocks = []
        for lf in range(6):
            ref = self._face_ref[lf]
            F = ref["F"]
            gdofs, signs = ts.face_scatter(e, lf)
            fid = self.mesh.elem_faces[e, lf, 0]
            gamma = self.impedance_faces.get(int(fid))
            ntr = len(gdofs)
            if gamma is None:
                # <n x H, R> rows 0..nq with H columns; <n x E, S> with E cols
                blk = np.zeros((self.nt, 2 * ntr), dtype=np.complex128)
                blk[:nq, ntr:] = (signs * F.T)
                blk[nq:, :ntr] = (signs * F.T)
                c = np.concatenate([gdofs, self.n_geo + gdofs])
            else:
                # substitution n x E = gamma H_t removes the E columns
                Fi = self._impedance_face_matrix(e, lf)
                blk = np.zeros((self.nt, ntr), dtype=np.complex128)
                blk[:nq, :] = signs * F.T
                blk[nq:, :] = gamma * (signs * Fi.T)
                c = self.n_geo + gdofs
            blocks.append(blk)
            cols.append(c)
        gcols = np.concatenate(cols)
        Bhat = np.concatenate(blocks, axis=1)
        return Bhat, gcols

    def _impedance_face_matrix(self, e: int, lf: int):
        """Metric pairing int t_m . v_i dS on a face (both tangential)."""
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
        tvals, _ = basis.shape_eval("Q", self.test_orders, pts3)
        v2 = np.stack([tvals[:, a1], tvals[:, a2]], axis=1)  # (nt, 2, npts)
        return np.einsum("mag,gab,ibg,g->mi", ttab, Gi, v2, w * sq)

    def impedance_e_dofs(self) -> np.ndarray:
        """E-trace dofs living on impedance faces; they were substituted out
        and must be pinned to zero by the caller."""
        if not self.impedance_faces:
            return np.array([], dtype=np.int64)
        return self.trace_space.faces_geo_dofs(list(self.impedance_faces))

    # -- global level ------------------------------------------------------

    def assemble(self):
        """Condensed global trace system.  Returns (K, rhs) with K sparse
        (n_trace x n_trace)."""
        rows, cols, vals = [], [], []
        rhs = np.zeros(self.n_trace, dtype=np.complex128)
        for e in range(self.mesh.n_elems):
            S, g, gcols = self._condensed_element(e)
            np.add.at(rhs, gcols, g)
            R, C = np.meshgrid(gcols, gcols, indexing="ij")
            rows.append(R.ravel())
            cols.append(C.ravel())
            vals.append(S.ravel())
        K = sp.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_trace, self.n_trace)).tocsr()
        return K, rhs

    def _condensed_element(self, e: int):
        G, B, Bhat, l, gcols = self.element_matrices(e)
        Lc = sla.cholesky(G, lower=True)
        W = sla.solve_triangular(Lc, np.column_stack([B, Bhat, l]),
                                 lower=True)
        nf = self.n_field
        Wb, Wh, wl = W[:, :nf], W[:, nf:-1], W[:, -1]
        K_ff = Wb.conj().T @ Wb
        K_fh = Wb.conj().T @ Wh
        K_hh = Wh.conj().T @ Wh
        r_f = Wb.conj().T @ wl
        r_h = Wh.conj().T @ wl
        Y = sla.solve(K_ff, np.column_stack([K_fh, r_f]),
                      assume_a="pos")
        S = K_hh - K_fh.conj().T @ Y[:, :-1]
        g = r_h - K_fh.conj().T @ Y[:, -1]
        return S, g, gcols

    def solve(self, dirichlet_dofs, dirichlet_values):
        """Solve with prescribed trace dofs.  Returns the full trace vector."""
        K, rhs = self.assemble()
        return solve_with_dirichlet(K, rhs, dirichlet_dofs, dirichlet_values,
                                    self.n_trace)

    def recover_fields(self, u_trace):
        """Second element pass: condensed fields and the residual indicator.

        Returns (fields, eta) with fields (n_elems, 6, ny) and eta the
        per-element residual norms ||L^{-1}(l - B u)||.
        """
        ne = self.mesh.n_elems
        fields = np.zeros((ne, 6, self.ny), dtype=np.complex128)
        eta = np.zeros(ne)
        for e in range(ne):
            G, B, Bhat, l, gcols = self.element_matrices(e)
            Lc = sla.cholesky(G, lower=True)
            uh = u_trace[gcols]
            W = sla.solve_triangular(Lc, np.column_stack([B, l - Bhat @ uh]),
                                     lower=True)
            Wb, wr = W[:, :-1], W[:, -1]
            uf = sla.solve(Wb.conj().T @ Wb, Wb.conj().T @ wr, assume_a="pos")
            fields[e] = uf.reshape(6, self.ny)
            eta[e] = np.linalg.norm(wr - Wb @ uf)
        return fields, eta

    def assemble_uncondensed(self):
        """Full normal-equation system with element fields kept as unknowns
        (testing aid): unknown vector [fields(all elements); traces]."""
        ne = self.mesh.n_elems
        nfe = self.n_field
        ntot = ne * nfe + self.n_trace
        rows, cols, vals = [], [], []
        rhs = np.zeros(ntot, dtype=np.complex128)
        for e in range(ne):
            G, B, Bhat, l, gcols = self.element_matrices(e)
            Lc = sla.cholesky(G, lower=True)
            W = sla.solve_triangular(Lc, np.column_stack([B, Bhat, l]),
                                     lower=True)
            Wb, Wh, wl = W[:, :nfe], W[:, nfe:-1], W[:, -1]
            gall = np.concatenate([e * nfe + np.arange(nfe),
                                   ne * nfe + gcols])
            Wa = np.column_stack([Wb, Wh])
            Ke = Wa.conj().T @ Wa
            np.add.at(rhs, gall, Wa.conj().T @ wl)
            R, C = np.meshgrid(gall, gall, indexing="ij")
            rows.append(R.ravel())
            cols.append(C.ravel())
            vals.append(Ke.ravel())
        K = sp.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(ntot, ntot)).tocsr()
        return K, rhs


def solve_with_dirichlet(K, rhs, dirichlet_dofs, dirichlet_values, n):
    """Eliminate prescribed dofs and solve the reduced Hermitian system."""
    dirichlet_dofs = np.asarray(dirichlet_dofs, dtype=np.int64)
    u = np.zeros(n, dtype=np.complex128)
    u[dirichlet_dofs] = dirichlet_values
    free = np.setdiff1d(np.arange(n), dirichlet_dofs)
    Kc = K.tocsr()
    if len(dirichlet_dofs):
        b = rhs[free] - Kc[free][:, dirichlet_dofs] @ u[dirichlet_dofs]
    else:
        b = rhs[free]
    u[free] = spla.spsolve(Kc[free][:, free].tocsc(), b)
    return u


def optimality_residual(K, rhs, u, dirichlet_dofs, n):
    """Relative norm of the normal-equation residual on the free dofs.

    For the condensed least-squares system this is the discrete optimality
    condition; it should be at solver precision after a direct solve."""
    dirichlet_dofs = np.asarray(dirichlet_dofs, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), dirichlet_dofs)
    r = (rhs - K @ u)[free]
    scale = max(np.linalg.norm(rhs), np.linalg.norm(K @ u), 1e-300)
    return float(np.linalg.norm(r) / scale)


def export_matrix(path, M):
    """Write a sparse or dense complex matrix as 'row,col,re,im' lines."""
    coo = sp.coo_matrix(M)
    with open(path, "w") as fh:
        fh.write("row,col,re,im\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r},{c},{v.real:.16e},{v.imag:.16e}\n")
