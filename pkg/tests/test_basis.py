import numpy as np
import pytest

from dpgfiber import basis
from dpgfiber.basis import OrderTriple


def _lstsq_residual(table, target):
    """Max residual of expressing target rows in the span of table rows.

    table: (ndof, ncomp, npts), target: (m, ncomp, npts).
    """
    A = table.reshape(table.shape[0], -1).T
    B = target.reshape(target.shape[0], -1).T
    coef, *_ = np.linalg.lstsq(A, B, rcond=None)
    return np.max(np.abs(A @ coef - B))


@pytest.mark.parametrize("orders", [(1, 1, 1), (2, 3, 4), (3, 3, 3)])
def test_space_dimensions(orders):
    o = OrderTriple(*orders)
    p, q, r = orders
    vals_w, _ = basis.shape_eval("W", o, np.array([[0.3, 0.4, 0.5]]))
    vals_q, _ = basis.shape_eval("Q", o, np.array([[0.3, 0.4, 0.5]]))
    vals_v, _ = basis.shape_eval("V", o, np.array([[0.3, 0.4, 0.5]]))
    vals_y, _ = basis.shape_eval("Y", o, np.array([[0.3, 0.4, 0.5]]))
    assert vals_w.shape[0] == basis.space_dim("W", o) == (p + 1) * (q + 1) * (r + 1)
    assert vals_q.shape[0] == basis.space_dim("Q", o)
    assert vals_v.shape[0] == basis.space_dim("V", o)
    assert vals_y.shape[0] == basis.space_dim("Y", o) == p * q * r


@pytest.mark.parametrize("p", range(1, 7))
def test_exact_sequence_containments(p):
    """grad W c Q, curl Q c V, div V c Y, with residual <= 1e-12."""
    o = OrderTriple(p, p, p)
    rng = np.random.default_rng(42)
    npts = basis.space_dim("Q", o) + 20
    pts = rng.uniform(0.0, 1.0, (npts, 3))

    _, grad_w = basis.shape_eval("W", o, pts)
    q_vals, q_curl = basis.shape_eval("Q", o, pts)
    v_vals, v_div = basis.shape_eval("V", o, pts)
    y_vals, _ = basis.shape_eval("Y", o, pts)

    assert _lstsq_residual(q_vals, grad_w) < 1e-12
    assert _lstsq_residual(v_vals, q_curl) < 1e-12
    assert _lstsq_residual(y_vals, v_div) < 1e-12


@pytest.mark.parametrize("p", range(1, 7))
def test_polynomial_reproduction(p):
    """Each space reproduces the anisotropic monomials it is built from."""
    o = OrderTriple(p, p, p)
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.0, 1.0, (3 * basis.space_dim("W", o), 3))
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]

    w_vals, _ = basis.shape_eval("W", o, pts)
    mono = (x**p * y**p * z**p)[None, None, :]
    assert _lstsq_residual(w_vals, mono) < 1e-12

    q_vals, _ = basis.shape_eval("Q", o, pts)
    # x component of Q has degree (p-1, p, p)
    f = np.zeros((1, 3, len(x)))
    f[0, 0] = x ** (p - 1) * y**p * z**p
    assert _lstsq_residual(q_vals, f) < 1e-12

    y_tab, _ = basis.shape_eval("Y", o, pts)
    g = (x ** (p - 1) * y ** (p - 1) * z ** (p - 1))[None, None, :]
    assert _lstsq_residual(y_tab, g) < 1e-12


@pytest.mark.parametrize("p", range(1, 7))
def test_gram_positive_definite(p):
    from dpgfiber import quad

    o = OrderTriple(p, p, p)
    rule = quad.gauss_rule(p + 1)
    vals, _ = basis.shape_eval("Q", o, rule.points)
    w = rule.weights
    A = vals.reshape(vals.shape[0], -1)
    G = np.einsum("ak,bk,k->ab", vals[:, 0], vals[:, 0], w)
    for c in (1, 2):
        G += np.einsum("ak,bk,k->ab", vals[:, c], vals[:, c], w)
    ev = np.linalg.eigvalsh(G)
    assert ev.min() > 0.0
    del A


def test_tensor_family_matches_pointwise_eval():
    """Flattened tensor tabulation agrees with direct evaluation on a grid."""
    from dpgfiber import quad

    o = OrderTriple(2, 3, 2)
    rule = quad.gauss_rule(3, 4, 3)
    tb = basis.Tab1D(o, rule.points_1d)
    fam = basis.q_value(tb)
    dense = fam.tabulate()
    direct, _ = basis.shape_eval("Q", o, rule.points)
    assert dense.shape == direct.shape
    assert np.max(np.abs(dense - direct)) < 1e-13

    fam_c = basis.q_curl(tb)
    dense_c = fam_c.tabulate()
    _, direct_c = basis.shape_eval("Q", o, rule.points)
    assert np.max(np.abs(dense_c - direct_c)) < 1e-13


def _interior_decode(orders_face):
    """Map flat interior index -> (family, i, j)."""
    oa, ob = orders_face
    out = {}
    for fam in range(2):
        o_along, o_across = (oa, ob) if fam == 0 else (ob, oa)
        for i in range(o_along):
            for j in range(2, o_across + 1):
                out[basis.face_interior_index(orders_face, fam, i, j)] = (fam, i, j)
    return out


@pytest.mark.parametrize("face", range(6))
@pytest.mark.parametrize("code", range(8))
def test_face_trace_orientation_signed_permutation(face, code):
    """Tangential traces under any orientation code are signed permutations
    of the identity-orientation (owner frame) trace basis."""
    o = OrderTriple(3, 3, 3)
    a1, a2 = basis.FACE_AXES[face]
    orders_face = (tuple(o)[a1], tuple(o)[a2])
    rng = np.random.default_rng(1)
    pts2d = (rng.uniform(0, 1, 40), rng.uniform(0, 1, 40))

    layout, tab0 = basis.face_trace("Q", o, face, 0, pts2d)
    _, tabc = basis.face_trace("Q", o, face, code, pts2d)
    pos = {(d.family, d.i, d.j): m for m, d in enumerate(layout)}
    swap, fa, fb = basis.orient_map_2d(code)
    perm, sign = basis.interior_orient_signed_perm(orders_face, code)
    decode = _interior_decode(orders_face)

    for m, dof in enumerate(layout):
        if dof.kind == "face":
            flat = basis.face_interior_index(orders_face, dof.family, dof.i, dof.j)
            gfam, gi, gj = decode[perm[flat]]
            expect = sign[flat] * tab0[pos[(gfam, gi, gj)]]
        else:
            along_flip, across_flip = (fa, fb) if dof.family == 0 else (fb, fa)
            gfam = (1 - dof.family) if swap else dof.family
            gj = (1 - dof.j) if across_flip else dof.j
            s = basis.edge_dof_sign(dof.i, along_flip)
            expect = s * tab0[pos[(gfam, dof.i, gj)]]
        assert np.max(np.abs(tabc[m] - expect)) < 1e-12


def test_face_trace_matches_volume_tangential_components():
    """The trace table at identity orientation equals the tangential
    components of the generating volume shapes on the face."""
    o = OrderTriple(2, 3, 4)
    for face in range(6):
        a1, a2 = basis.FACE_AXES[face]
        rng = np.random.default_rng(face)
        a, b = rng.uniform(0, 1, 15), rng.uniform(0, 1, 15)
        layout, tab = basis.face_trace("Q", o, face, 0, (a, b))
        pts3 = basis.face_points_3d(face, a, b)
        vals, _ = basis.shape_eval("Q", o, pts3)
        for m, dof in enumerate(layout):
            assert np.allclose(tab[m, 0], vals[dof.vol_index, a1], atol=1e-13)
            assert np.allclose(tab[m, 1], vals[dof.vol_index, a2], atol=1e-13)
        n_tot, n_int = basis.face_trace_counts(o, face)
        assert len(layout) == n_tot
        assert sum(1 for d in layout if d.kind == "face") == n_int


def test_normal_trace_of_v():
    o = OrderTriple(2, 2, 3)
    for face in range(6):
        rng = np.random.default_rng(face + 10)
        a, b = rng.uniform(0, 1, 10), rng.uniform(0, 1, 10)
        idxs, tab = basis.face_trace("V", o, face, 0, (a, b))
        a1, a2 = basis.FACE_AXES[face]
        assert tab.shape == (tuple(o)[a1] * tuple(o)[a2], 1, 10)
        # traces span the 2D L2 tensor space on the face: check a monomial
        t = (a ** (tuple(o)[a1] - 1)) * (b ** (tuple(o)[a2] - 1))
        A = tab[:, 0, :].T
        coef, *_ = np.linalg.lstsq(A, t, rcond=None)
        assert np.max(np.abs(A @ coef - t)) < 1e-12
