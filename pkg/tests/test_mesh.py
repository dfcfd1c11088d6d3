import numpy as np
import pytest

from dpgfiber import basis, mesh, quad


def _volume(m, nq=4):
    rule = quad.gauss_rule(nq)
    total = 0.0
    for e in range(m.n_elems):
        _, _, detJ = m.geometry(e).eval(rule.points_1d)
        assert detJ.min() > 0.0
        total += np.sum(detJ * rule.weights_grid)
    return total


def test_fiber_mesh_counts():
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 2, 2))
    assert m.n_elems == 9
    assert len(m.vertices) == 24
    assert sorted(set(m.zone)) == ["clad", "core"]
    assert sum(z == "core" for z in m.zone) == 5


def test_fiber_mesh_volume_and_jacobians():
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 2, 3),
                              transverse_subdiv=2)
    vol = _volume(m)
    exact = np.pi * 1.5**2 * 2.0
    assert abs(vol - exact) / exact < 5e-3


def test_core_zone_volume():
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 1, 2),
                              transverse_subdiv=2)
    rule = quad.gauss_rule(4)
    vol = 0.0
    for e in range(m.n_elems):
        if m.zone[e] != "core":
            continue
        _, _, detJ = m.geometry(e).eval(rule.points_1d)
        vol += np.sum(detJ * rule.weights_grid)
    exact = np.pi * 0.5**2
    assert abs(vol - exact) / exact < 5e-3


@pytest.mark.parametrize("builder", ["fiber", "box"])
def test_interior_faces_geometrically_conforming(builder):
    """Both element maps agree pointwise on a shared face under the stored
    orientation code."""
    if builder == "fiber":
        m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 1, 3))
    else:
        m = mesh.build_box_mesh((1, 1, 2), (2, 2, 2))
    rng = np.random.default_rng(0)
    a_g, b_g = rng.uniform(0, 1, 8), rng.uniform(0, 1, 8)
    n_int = 0
    for f, els in enumerate(m.face_elems):
        assert len(els) in (1, 2)
        if len(els) == 1:
            continue
        n_int += 1
        Xs = []
        for e, lf in els:
            code = m.elem_faces[e, lf, 1]
            assert m.elem_faces[e, lf, 0] == f
            a_l, b_l = basis.orient_points_to_local(code, a_g, b_g)
            pts3 = basis.face_points_3d(lf, a_l, b_l)
            X, _ = m.geometry(e).eval_points(pts3)
            Xs.append(X)
        assert np.max(np.abs(Xs[0] - Xs[1])) < 1e-12
    assert n_int > 0


def test_edges_consistent_across_elements():
    """Shared edges have consistent global direction via the flip flags."""
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 1, 2))
    seen = {}
    for e in range(m.n_elems):
        for le in range(12):
            c0, c1 = mesh._EDGE_CORNERS[le]
            v0, v1 = m.elements[e, c0], m.elements[e, c1]
            gid, flip = m.elem_edges[e, le]
            ordered = (v1, v0) if flip else (v0, v1)
            assert ordered[0] < ordered[1]
            if gid in seen:
                assert seen[gid] == ordered
            else:
                seen[gid] = ordered


def test_box_mesh_structure():
    m = mesh.build_box_mesh((1.0, 2.0, 3.0), (2, 3, 4))
    assert m.n_elems == 24
    assert len(m.vertices) == 3 * 4 * 5
    assert abs(_volume(m, 2) - 6.0) < 1e-12
    # all orientation codes trivial on a consistently built structured box
    for e in range(m.n_elems):
        for lf in range(6):
            assert m.elem_faces[e, lf, 1] == 0


def test_refinement():
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 2, 3))
    mz = mesh.refine_z(m)
    assert mz.n_elems == 2 * m.n_elems
    assert np.allclose(mz.z_grid, np.linspace(0, 2, 5))
    mu = mesh.refine_uniform(m)
    assert mu.n_elems == 8 * m.n_elems
    exact = np.pi * 1.5**2 * 2.0
    assert abs(_volume(mu) - exact) / exact < 2e-3


def test_geometry_map_inversion():
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 1, 2))
    rng = np.random.default_rng(4)
    for e in (0, 3, 7):
        gm = m.geometry(e)
        xi_ref = rng.uniform(0.1, 0.9, (5, 3))
        X, _ = gm.eval_points(xi_ref)
        for k in range(5):
            xi, ok = gm.invert(X[k])
            assert ok
            assert np.max(np.abs(xi - xi_ref[k])) < 1e-10


def test_element_containing():
    m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0, 1, 2))
    e, xi = m.element_containing(np.array([0.0, 0.0, 0.5]))
    assert e is not None and m.zone[e] == "core"
    e, xi = m.element_containing(np.array([1.2, 0.0, 0.5]))
    assert e is not None and m.zone[e] == "clad"
    e, xi = m.element_containing(np.array([5.0, 0.0, 0.5]))
    assert e is None


def test_write_text(tmp_path):
    m = mesh.build_box_mesh((1, 1, 1), (1, 1, 1))
    p = tmp_path / "mesh.txt"
    m.write_text(p)
    text = p.read_text()
    assert text.startswith("hexmesh 1 elements 8 vertices")
    assert len([l for l in text.splitlines() if l.startswith("v ")]) == 8
