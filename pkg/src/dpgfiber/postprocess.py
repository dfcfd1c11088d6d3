"""Power extraction, field sampling and CSV output.

Cross-section power is computed from the skeleton traces: on a z-normal face
the time-averaged axial Poynting flux of (Ehat, Hhat) reduces, in the face
parametrization, to

    P = Re  int  (E.x_a)(conj H.x_b) - (E.x_b)(conj H.x_a)  da db ,

i.e. a purely covariant expression with no metric factors, so the trace
coefficient vectors and the reference trace tabulations suffice.
"""

import numpy as np

from . import basis


def z_station_faces(m, z: float, tol: float = None):
    """Global ids of the z-normal faces lying at coordinate z."""
    if tol is None:
        dz = np.min(np.diff(m.z_grid))
        tol = 0.25 * dz
    out = []
    for f, els in enumerate(m.face_elems):
        e, lf = els[0]
        if lf // 2 != 2:
            continue
        if abs(m.face_center(f)[2] - z) < tol:
            out.append(f)
    return out


def cross_section_power(problem, u_E, u_H, z: float) -> float:
    """Signed axial power through the cross-section at z.

    u_E, u_H are the geometric trace coefficient vectors of the two fields
    (each length n_geo); for a single ultraweak solution pass
    u[:n_geo], u[n_geo:].
    """
    ts = problem.trace_space
    total = 0.0
    for f in z_station_faces(problem.mesh, z):
        e, lf = problem.mesh.face_elems[f][0]
        ref = problem._face_ref[lf]
        ttab, w = ref["ttab"], ref["w"]
        gdofs, signs = ts.face_scatter(e, lf)
        cE = signs * u_E[gdofs]
        cH = signs * u_H[gdofs]
        Ea = np.einsum("m,mg->g", cE, ttab[:, 0])
        Eb = np.einsum("m,mg->g", cE, ttab[:, 1])
        Ha = np.einsum("m,mg->g", cH, ttab[:, 0])
        Hb = np.einsum("m,mg->g", cH, ttab[:, 1])
        total += np.sum(w * np.real(Ea * np.conj(Hb) - Eb * np.conj(Ha)))
    return float(total)


def power_trace(problem, u_trace, stations=None):
    """Axial power at the given z stations (default: all layer interfaces).

    Returns (z, P) with P the signed flux in +z."""
    m = problem.mesh
    if stations is None:
        stations = np.asarray(m.z_grid)
    u_E = u_trace[:problem.n_geo]
    u_H = u_trace[problem.n_geo:]
    P = np.array([cross_section_power(problem, u_E, u_H, z)
                  for z in stations])
    return np.asarray(stations, dtype=float), P


def irradiance(problem, fields):
    """|Re(E x H*)_z| of a field solution at the volume quadrature grid.

    Returns an array (n_elems,) + rule.shape."""
    ytab = problem._yv.tabulate()[:, 0, :]
    ne = problem.mesh.n_elems
    out = np.empty((ne,) + problem.rule.shape)
    for e in range(ne):
        u = fields[e] @ ytab  # (6, npts)
        sz = np.real(u[0] * np.conj(u[4]) - u[1] * np.conj(u[3]))
        out[e] = np.abs(sz).reshape(problem.rule.shape)
    return out


def component_l2_norms(problem, fields, elems=None) -> np.ndarray:
    """L2 norm of each of the six field components, over the whole mesh or
    the listed elements."""
    ytab = problem._yv.tabulate()[:, 0, :]
    w = problem.rule.weights
    acc = np.zeros(6)
    if elems is None:
        elems = range(problem.mesh.n_elems)
    for e in elems:
        _, _, _, detJ = problem.element_geometry(e)
        dj = detJ.reshape(-1) * w
        u = fields[e] @ ytab
        acc += np.sum(np.abs(u) ** 2 * dj, axis=1)
    return np.sqrt(acc)


def write_power_csv(path, z, P_signal, P_pump=None):
    with open(path, "w") as fh:
        fh.write("z,P_signal,P_pump\n")
        if P_pump is None:
            P_pump = np.zeros_like(P_signal)
        for zi, ps, pp in zip(z, P_signal, P_pump):
            fh.write(f"{zi:.10g},{ps:.10e},{pp:.10e}\n")


def write_fields_csv(path, points, values):
    """values: (n, 6) complex Ex..Hz at the given physical points."""
    cols = ["Ex", "Ey", "Ez", "Hx", "Hy", "Hz"]
    with open(path, "w") as fh:
        fh.write("x,y,z," + ",".join(
            f"Re{c},Im{c}" for c in cols) + "\n")
        for p, v in zip(points, values):
            parts = [f"{p[0]:.10g}", f"{p[1]:.10g}", f"{p[2]:.10g}"]
            for c in range(6):
                parts.append(f"{v[c].real:.10e}")
                parts.append(f"{v[c].imag:.10e}")
            fh.write(",".join(parts) + "\n")


def write_convergence_csv(path, rows):
    """rows: iterable of (p, level, n_elems, n_dofs, rel_error)."""
    with open(path, "w") as fh:
        fh.write("p,level,n_elems,n_dofs,rel_error\n")
        for p, lev, ne, nd, err in rows:
            fh.write(f"{p},{lev},{ne},{nd},{err:.10e}\n")


def write_iterations_csv(path, rows):
    """rows: iterable of (iteration, delta, P_signal_out, P_pump_out)."""
    with open(path, "w") as fh:
        fh.write("iteration,delta,P_signal_out,P_pump_out\n")
        for it, d, ps, pp in rows:
            fh.write(f"{it},{d:.10e},{ps:.10e},{pp:.10e}\n")
