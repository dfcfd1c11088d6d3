import numpy as np
import pytest

from dpgfiber import dpg, maxwell, mesh, postprocess
from dpgfiber.basis import OrderTriple


def _plane_wave_problem(omega=2.0, nz=2):
    """x-polarized plane wave in a PEC-compatible unit-square duct."""
    m = mesh.build_box_mesh((1, 1, 1), (2, 2, nz))
    coeffs = maxwell.MaxwellCoefficients(omega, m, 1.0)
    prob = dpg.UltraweakProblem(m, OrderTriple(3, 3, 3), coeffs)
    beta = omega

    def E(X):
        out = np.zeros(X.shape[:-1] + (3,), dtype=np.complex128)
        out[..., 0] = np.exp(-1j * beta * X[..., 2])
        return out

    def H(X):
        out = np.zeros(X.shape[:-1] + (3,), dtype=np.complex128)
        out[..., 1] = (beta / omega) * np.exp(-1j * beta * X[..., 2])
        return out

    def exact6(X):
        return np.concatenate([E(X), H(X)], axis=-1)

    return prob, E, H, exact6


def _trace_vector(prob, E, H):
    """Trace coefficients of (E, H) on every mesh face."""
    m = prob.mesh
    u = np.zeros(prob.n_trace, dtype=np.complex128)
    faces = list(range(m.n_faces))
    dE, vE = maxwell.project_boundary_traces(prob, faces, E)
    dH, vH = maxwell.project_boundary_traces(prob, faces, H)
    u[dE] = vE
    u[prob.n_geo + dH] = vH
    return u


def test_z_station_faces_counts():
    m = mesh.build_box_mesh((1, 1, 1), (2, 3, 4))
    assert len(postprocess.z_station_faces(m, 0.5)) == 6
    assert len(postprocess.z_station_faces(m, 0.0)) == 6
    assert len(postprocess.z_station_faces(m, 0.4)) == 0


def test_plane_wave_power_is_analytic():
    prob, E, H, exact6 = _plane_wave_problem()
    u = _trace_vector(prob, E, H)
    zs, P = postprocess.power_trace(prob, u, [0.0, 0.5, 1.0])
    # P = Re(Ex conj(Hy)) * area = beta/omega = 1 on the unit square;
    # the order-3 trace projection of the oscillatory wave sets the tolerance
    assert np.allclose(P, 1.0, atol=1e-3)


def test_power_scales_quadratically():
    prob, E, H, exact6 = _plane_wave_problem()
    u = _trace_vector(prob, E, H)
    _, P1 = postprocess.power_trace(prob, u, [0.5])
    _, P2 = postprocess.power_trace(prob, 3.0 * u, [0.5])
    assert P2[0] == pytest.approx(9.0 * P1[0], rel=1e-12)


def test_irradiance_of_unit_plane_wave():
    prob, E, H, exact6 = _plane_wave_problem()
    fields = maxwell.project_fields(prob, exact6)
    I = postprocess.irradiance(prob, fields)
    assert I.shape == (prob.mesh.n_elems,) + prob.rule.shape
    assert np.all(I >= 0.0)
    assert np.max(np.abs(I - 1.0)) < 1e-2


def test_component_norms_match_exact_integrals():
    prob, E, H, exact6 = _plane_wave_problem()
    fields = maxwell.project_fields(prob, exact6)
    norms = postprocess.component_l2_norms(prob, fields)
    # |Ex| = 1 and |Hy| = 1 over the unit cube, other components zero
    assert norms[0] == pytest.approx(1.0, rel=1e-5)
    assert norms[4] == pytest.approx(1.0, rel=1e-5)
    assert np.max(norms[[1, 2, 3, 5]]) < 1e-8
    half = postprocess.component_l2_norms(
        prob, fields, [e for e in range(prob.mesh.n_elems)
                       if prob.mesh.layer[e] == 0])
    assert half[0] == pytest.approx(np.sqrt(0.5), rel=1e-5)


def test_csv_writers(tmp_path):
    z = np.array([0.0, 0.5, 1.0])
    Ps = np.array([1.0, 1.1, 1.2])
    Pp = np.array([2.0, 1.9, 1.8])
    f1 = tmp_path / "power.csv"
    postprocess.write_power_csv(f1, z, Ps, Pp)
    lines = f1.read_text().strip().split("\n")
    assert lines[0] == "z,P_signal,P_pump"
    assert len(lines) == 4

    f2 = tmp_path / "conv.csv"
    postprocess.write_convergence_csv(f2, [(2, 0, 9, 512, 0.1)])
    assert f2.read_text().startswith("p,level,n_elems,n_dofs,rel_error")

    f3 = tmp_path / "iters.csv"
    postprocess.write_iterations_csv(f3, [(1, 0.5, 1.0, 2.0)])
    assert len(f3.read_text().strip().split("\n")) == 2

    f4 = tmp_path / "fields.csv"
    pts = np.zeros((2, 3))
    vals = np.ones((2, 6), dtype=np.complex128)
    postprocess.write_fields_csv(f4, pts, vals)
    header = f4.read_text().split("\n")[0]
    assert header.startswith("x,y,z,ReEx,ImEx")
