"""Tensor-product exact-sequence spaces on the reference hexahedron [0,1]^3.

Four spaces per order triple (p, q, r):

    W  scalar H1,           dim (p+1)(q+1)(r+1)
    Q  H(curl), Nedelec second type on the hex,
                            dim p(q+1)(r+1) + (p+1)q(r+1) + (p+1)(q+1)r
    V  H(div),              dim (p+1)qr + p(q+1)r + pq(r+1)
    Y  scalar L2,           dim pqr

built by tensorizing the 1D hierarchies of :mod:`dpgfiber.basis1d` so that
grad W c Q, curl Q c V, div V c Y hold exactly.

Shapes are kept in factorized ("tensor term") form for sum-factorized
integration; ``TensorFamily.tabulate`` flattens them when a plain
(shape, component, point) table is needed.

Face-trace machinery: tangential traces of Q (and normal traces of V) on the
six faces, plus the 8 quad-face orientation actions, which for this basis are
signed permutations of the trace dofs.
"""

from dataclasses import dataclass

import numpy as np

from . import basis1d

SPACES = ("W", "Q", "V", "Y")

# Face id f: axis = f // 2 is the frozen coordinate, side = f % 2 its value.
# Face coordinate axes are the two remaining axes in increasing order.
FACE_AXES = {0: (1, 2), 1: (1, 2), 2: (0, 2), 3: (0, 2), 4: (0, 1), 5: (0, 1)}


@dataclass(frozen=True)
class OrderTriple:
    p: int
    q: int
    r: int

    def __post_init__(self):
        if min(self.p, self.q, self.r) < 1:
            raise ValueError("polynomial orders must be >= 1")

    def __iter__(self):
        return iter((self.p, self.q, self.r))

    def __getitem__(self, i):
        return (self.p, self.q, self.r)[i]

    def bump(self, dp: int) -> "OrderTriple":
        return OrderTriple(self.p + dp, self.q + dp, self.r + dp)


@dataclass
class TensorTerm:
    """One tensor-product contribution of a block of shapes to a component.

    The block covers family dofs ``offset : offset + n0*n1*n2`` with the
    flattening ((i0 * n1) + i1) * n2 + i2, and contributes
    sign * t0[i0, g0] * t1[i1, g1] * t2[i2, g2] to vector component ``comp``.
    """

    comp: int
    offset: int
    dims: tuple[int, int, int]
    sign: float
    tabs: tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass
class TensorFamily:
    ndof: int
    ncomp: int
    terms: list[TensorTerm]

    def tabulate(self) -> np.ndarray:
        """Flatten to a dense (ndof, ncomp, n_points) table (tensor points,
        x slowest / z fastest)."""
        npts = 1
        for t in self.tabs_npts():
            npts *= t
        out = np.zeros((self.ndof, self.ncomp, npts))
        for term in self.terms:
            n0, n1, n2 = term.dims
            blk = np.einsum(
                "ax,by,cz->abcxyz", term.tabs[0], term.tabs[1], term.tabs[2]
            )
            blk = blk.reshape(n0 * n1 * n2, npts)
            out[term.offset : term.offset + n0 * n1 * n2, term.comp] += (
                term.sign * blk
            )
        return out

    def tabs_npts(self) -> tuple[int, int, int]:
        t = self.terms[0].tabs
        return (t[0].shape[1], t[1].shape[1], t[2].shape[1])


class Tab1D:
    """1D tabulations of the H1/L2 hierarchies per direction."""

    def __init__(self, orders: OrderTriple, pts1d):
        self.orders = tuple(orders)
        self.pts1d = tuple(np.asarray(p, dtype=float) for p in pts1d)
        self.h1_val, self.h1_der, self.l2_val = [], [], []
        for o, x in zip(self.orders, self.pts1d):
            v, d = basis1d.h1_tab(o, x)
            self.h1_val.append(v)
            self.h1_der.append(d)
            self.l2_val.append(basis1d.l2_tab(o, x))


def _block_dims(tabs):
    return tuple(t.shape[0] for t in tabs)


def w_value(tb: Tab1D) -> TensorFamily:
    tabs = tuple(tb.h1_val)
    dims = _block_dims(tabs)
    n = dims[0] * dims[1] * dims[2]
    return TensorFamily(n, 1, [TensorTerm(0, 0, dims, 1.0, tabs)])


def w_gradient(tb: Tab1D) -> TensorFamily:
    terms = []
    dims = _block_dims(tuple(tb.h1_val))
    n = dims[0] * dims[1] * dims[2]
    for d in range(3):
        tabs = tuple(tb.h1_der[k] if k == d else tb.h1_val[k] for k in range(3))
        terms.append(TensorTerm(d, 0, dims, 1.0, tabs))
    return TensorFamily(n, 3, terms)


def _q_block_tabs(tb: Tab1D, c: int, deriv_dir: int | None = None):
    tabs = []
    for k in range(3):
        if k == c:
            tabs.append(tb.l2_val[k])
        elif k == deriv_dir:
            tabs.append(tb.h1_der[k])
        else:
            tabs.append(tb.h1_val[k])
    return tuple(tabs)


def q_block_sizes(orders: OrderTriple) -> list[int]:
    o = tuple(orders)
    out = []
    for c in range(3):
        n = 1
        for k in range(3):
            n *= o[k] if k == c else o[k] + 1
        out.append(n)
    return out


def q_value(tb: Tab1D) -> TensorFamily:
    terms, off = [], 0
    for c in range(3):
        tabs = _q_block_tabs(tb, c)
        dims = _block_dims(tabs)
        terms.append(TensorTerm(c, off, dims, 1.0, tabs))
        off += dims[0] * dims[1] * dims[2]
    return TensorFamily(off, 3, terms)


def q_curl(tb: Tab1D) -> TensorFamily:
    """curl of the Q family; two tensor terms per component block."""
    terms, off = [], 0
    for c in range(3):
        dims = _block_dims(_q_block_tabs(tb, c))
        j1, k1 = (c + 1) % 3, (c + 2) % 3  # (curl F)_{j1} += d_{k1} F_c
        terms.append(TensorTerm(j1, off, dims, 1.0, _q_block_tabs(tb, c, k1)))
        terms.append(TensorTerm(k1, off, dims, -1.0, _q_block_tabs(tb, c, j1)))
        off += dims[0] * dims[1] * dims[2]
    return TensorFamily(off, 3, terms)


def _v_block_tabs(tb: Tab1D, c: int, deriv: bool = False):
    tabs = []
    for k in range(3):
        if k == c:
            tabs.append(tb.h1_der[k] if deriv else tb.h1_val[k])
        else:
            tabs.append(tb.l2_val[k])
    return tuple(tabs)


def v_value(tb: Tab1D) -> TensorFamily:
    terms, off = [], 0
    for c in range(3):
        tabs = _v_block_tabs(tb, c)
        dims = _block_dims(tabs)
        terms.append(TensorTerm(c, off, dims, 1.0, tabs))
        off += dims[0] * dims[1] * dims[2]
    return TensorFamily(off, 3, terms)


def v_divergence(tb: Tab1D) -> TensorFamily:
    terms, off = [], 0
    for c in range(3):
        tabs = _v_block_tabs(tb, c, deriv=True)
        dims = _block_dims(tabs)
        terms.append(TensorTerm(0, off, dims, 1.0, tabs))
        off += dims[0] * dims[1] * dims[2]
    return TensorFamily(off, 1, terms)


def y_value(tb: Tab1D) -> TensorFamily:
    tabs = tuple(tb.l2_val)
    dims = _block_dims(tabs)
    n = dims[0] * dims[1] * dims[2]
    return TensorFamily(n, 1, [TensorTerm(0, 0, dims, 1.0, tabs)])


def space_dim(space: str, orders: OrderTriple) -> int:
    p, q, r = orders
    if space == "W":
        return (p + 1) * (q + 1) * (r + 1)
    if space == "Q":
        return p * (q + 1) * (r + 1) + (p + 1) * q * (r + 1) + (p + 1) * (q + 1) * r
    if space == "V":
        return (p + 1) * q * r + p * (q + 1) * r + p * q * (r + 1)
    if space == "Y":
        return p * q * r
    raise ValueError(f"unknown space {space!r}; expected one of {SPACES}")


def shape_eval(space: str, orders: OrderTriple, points: np.ndarray):
    """Tabulate a space at arbitrary reference points.

    Returns (values, extra) where values has shape (ndof, ncomp, npts) and
    extra is the gradient for W (ndof, 3, npts), the curl for Q, the
    divergence for V (ndof, 1, npts), and None for Y.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError("points must be (n, 3)")
    # Arbitrary (non-tensor) points: per-direction 1D tabs at each point's
    # coordinate, combined pointwise via einsum with a diagonal trick.
    tb = Tab1D(orders, (points[:, 0], points[:, 1], points[:, 2]))
    if space == "W":
        return _eval_pointwise(w_value(tb)), _eval_pointwise(w_gradient(tb))
    if space == "Q":
        return _eval_pointwise(q_value(tb)), _eval_pointwise(q_curl(tb))
    if space == "V":
        return _eval_pointwise(v_value(tb)), _eval_pointwise(v_divergence(tb))
    if space == "Y":
        return _eval_pointwise(y_value(tb)), None
    raise ValueError(f"unknown space {space!r}; expected one of {SPACES}")


def _eval_pointwise(fam: TensorFamily) -> np.ndarray:
    """Collapse a family whose 1D tabs were built on per-point coordinate
    lists (not a tensor grid) to (ndof, ncomp, npts)."""
    npts = fam.terms[0].tabs[0].shape[1]
    out = np.zeros((fam.ndof, fam.ncomp, npts))
    for t in fam.terms:
        n0, n1, n2 = t.dims
        blk = np.einsum("ag,bg,cg->abcg", t.tabs[0], t.tabs[1], t.tabs[2])
        out[t.offset : t.offset + n0 * n1 * n2, t.comp] += t.sign * blk.reshape(
            n0 * n1 * n2, npts
        )
    return out


# ---------------------------------------------------------------------------
# Face traces and orientations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FaceTraceDof:
    """One tangential-trace dof of Q on a face.

    kind 'edge': attached to the face edge running along face axis ``family``
    (0 = first face axis, 1 = second) at side ``edge_side`` of the other face
    axis; ``i`` is the L2 index along the edge.
    kind 'face': interior dof of family ``family`` with L2 index ``i`` along
    the family axis and bubble index ``j`` (>= 2) across it.
    ``vol_index``/``comp`` locate the generating volume Q shape.
    """

    kind: str
    family: int
    i: int
    j: int
    edge_side: int
    vol_index: int
    comp: int


def _axis_index_flatten(orders, c, idx_by_axis):
    """Flatten per-axis indices of a Q block-c shape to its block-local id."""
    o = tuple(orders)
    dims = [o[k] if k == c else o[k] + 1 for k in range(3)]
    i0, i1, i2 = idx_by_axis
    return (i0 * dims[1] + i1) * dims[2] + i2


def q_face_trace_layout(orders: OrderTriple, face: int) -> list[FaceTraceDof]:
    """Enumerate the tangential-trace dofs of Q on a face.

    Ordering: family 0 (along the first face axis) then family 1, each with
    the cross index fastest.
    """
    axis, side = face // 2, face % 2
    a1, a2 = FACE_AXES[face]
    o = tuple(orders)
    out = []
    offs = list(q_block_sizes(orders))
    block_off = [0, offs[0], offs[0] + offs[1]]
    for fam, (ax_along, ax_across) in enumerate(((a1, a2), (a2, a1))):
        n_l2 = o[ax_along]
        n_h1 = o[ax_across] + 1
        for i in range(n_l2):
            for j in range(n_h1):
                idx = [0, 0, 0]
                idx[ax_along] = i
                idx[ax_across] = j
                idx[axis] = side  # hat with value 1 on this face
                vol = block_off[ax_along] + _axis_index_flatten(
                    orders, ax_along, tuple(idx)
                )
                if j < 2:
                    out.append(
                        FaceTraceDof("edge", fam, i, j, j, vol, ax_along)
                    )
                else:
                    out.append(FaceTraceDof("face", fam, i, j, -1, vol, ax_along))
    return out


def face_trace_counts(orders: OrderTriple, face: int) -> tuple[int, int]:
    """(n_total, n_interior) tangential-trace dofs on a face."""
    a1, a2 = FACE_AXES[face]
    o = tuple(orders)
    total = o[a1] * (o[a2] + 1) + o[a2] * (o[a1] + 1)
    interior = o[a1] * max(o[a2] - 1, 0) + o[a2] * max(o[a1] - 1, 0)
    return total, interior


def face_interior_index(orders_face: tuple[int, int], family: int, i: int, j: int):
    """Flat index of an interior trace dof on a face with along-axis orders
    (oa, ob); family 0 lists first. Bubble index j >= 2 maps to j - 2."""
    oa, ob = orders_face
    if family == 0:
        return i * (ob - 1) + (j - 2)
    n0 = oa * (ob - 1)
    return n0 + i * (oa - 1) + (j - 2)


def n_face_interior(orders_face: tuple[int, int]) -> int:
    oa, ob = orders_face
    return oa * (ob - 1) + ob * (oa - 1)


def orient_map_2d(code: int):
    """The 8 quad orientation actions: local face coords -> global.

    code = 4*swap + 2*flip_b + flip_a.  Returns (swap, flip_a, flip_b).
    Forward map: u = flip_a(a_l), v = flip_b(b_l); (a_g, b_g) = (v, u) if
    swap else (u, v).
    """
    if not 0 <= code <= 7:
        raise ValueError("orientation code must be in 0..7")
    return bool(code & 4), bool(code & 1), bool(code & 2)


def orient_points_to_local(code: int, a_g, b_g):
    """Map global face coordinates to local ones (inverse of the action)."""
    swap, fa, fb = orient_map_2d(code)
    u, v = (b_g, a_g) if swap else (a_g, b_g)
    a_l = 1.0 - u if fa else u
    b_l = 1.0 - v if fb else v
    return a_l, b_l


def orient_jacobian(code: int) -> np.ndarray:
    """J2[k, m] = d(local coord k)/d(global coord m); entries in {0, +-1}."""
    swap, fa, fb = orient_map_2d(code)
    J = np.zeros((2, 2))
    sa = -1.0 if fa else 1.0
    sb = -1.0 if fb else 1.0
    if swap:
        J[0, 1] = sa
        J[1, 0] = sb
    else:
        J[0, 0] = sa
        J[1, 1] = sb
    return J


def interior_orient_signed_perm(orders_face: tuple[int, int], code: int):
    """Signed permutation sending local face-interior trace dofs to the
    global (owner-frame) ones.

    Returns (perm, sign): local interior dof m equals sign[m] times global
    interior basis function perm[m].
    """
    oa, ob = orders_face
    swap, fa, fb = orient_map_2d(code)
    if swap and oa != ob:
        raise ValueError("axis-swapping face joins need equal face orders")
    n = n_face_interior(orders_face)
    perm = np.empty(n, dtype=np.int64)
    sign = np.empty(n)
    for fam in range(2):
        along_flip, across_flip = (fa, fb) if fam == 0 else (fb, fa)
        o_along, o_across = (oa, ob) if fam == 0 else (ob, oa)
        for i in range(o_along):
            for j in range(2, o_across + 1):
                m = face_interior_index((oa, ob), fam, i, j)
                s = 1.0
                if along_flip:
                    # P_i(1-u) d(1-u) = -(-1)^i P_i(u) du
                    s *= -((-1.0) ** i)
                if across_flip:
                    s *= (-1.0) ** j  # bubble parity
                g_fam = (1 - fam) if swap else fam
                perm[m] = face_interior_index((oa, ob), g_fam, i, j)
                sign[m] = s
    return perm, sign


def edge_dof_sign(i: int, flipped: bool) -> float:
    """Sign relating a local edge trace function P_i(s) ds to the global one
    when the local direction opposes the global edge direction."""
    return -((-1.0) ** i) if flipped else 1.0


def face_points_3d(face: int, a, b) -> np.ndarray:
    """Embed face coordinates into the reference cube."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    axis, side = face // 2, face % 2
    a1, a2 = FACE_AXES[face]
    pts = np.empty((len(a), 3))
    pts[:, axis] = float(side)
    pts[:, a1] = a
    pts[:, a2] = b
    return pts


def face_trace(space: str, orders: OrderTriple, face: int, orientation: int,
               points2d: tuple[np.ndarray, np.ndarray]):
    """Tabulate the face-trace basis at global-face points under an
    orientation code.

    For space 'Q' (tangential trace) returns (layout, table) with table of
    shape (n_trace, 2, npts): covariant components along the *global* face
    axes.  For space 'V' (normal trace) the table is (n_trace, 1, npts).
    """
    a_g, b_g = points2d
    a_l, b_l = orient_points_to_local(orientation, a_g, b_g)
    pts3 = face_points_3d(face, a_l, b_l)
    a1, a2 = FACE_AXES[face]
    if space == "Q":
        vals, _ = shape_eval("Q", orders, pts3)
        layout = q_face_trace_layout(orders, face)
        J2 = orient_jacobian(orientation)
        out = np.empty((len(layout), 2, len(a_l)))
        for m, dof in enumerate(layout):
            loc = np.stack([vals[dof.vol_index, a1], vals[dof.vol_index, a2]])
            out[m] = J2.T @ loc
        return layout, out
    if space == "V":
        vals, _ = shape_eval("V", orders, pts3)
        axis, side = face // 2, face % 2
        o = tuple(orders)
        # normal-trace dofs: V block `axis` shapes with the hat at this side
        block_off = [0]
        for c in range(3):
            dims = [o[k] + 1 if k == c else o[k] for k in range(3)]
            block_off.append(block_off[-1] + dims[0] * dims[1] * dims[2])
        dims = [o[k] + 1 if k == axis else o[k] for k in range(3)]
        idxs = []
        for i in range(o[a1]):
            for j in range(o[a2]):
                loc_idx = [0, 0, 0]
                loc_idx[axis] = side
                loc_idx[a1] = i
                loc_idx[a2] = j
                flat = (loc_idx[0] * dims[1] + loc_idx[1]) * dims[2] + loc_idx[2]
                idxs.append(block_off[axis] + flat)
        out = vals[np.asarray(idxs, dtype=int), axis][:, None, :]
        return idxs, out
    raise ValueError("face_trace supports spaces 'Q' and 'V'")
