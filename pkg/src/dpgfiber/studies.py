"""End-to-end study drivers used by the command line interface and the
acceptance tests.

Each driver assembles a complete numerical experiment from the library
pieces and returns a plain dict of results:

* ``mms_convergence``  - manufactured-solution convergence on the
  curvilinear fiber mesh, reporting error-vs-dofs slopes.
* ``linear_fiber``     - single-mode step-index fiber with a launch beam
  and an absorbing layer; station powers, component dominance, and the
  terminal-face attenuation.
* ``pollution_study``  - rectangular waveguide transported over many
  wavelengths; compares the ultraweak and primal discretization errors
  against their respective best approximations under z refinement.
* ``raman_study``      - the coupled signal/pump gain run (co- or
  counter-pumped) with iteration history and station power traces.
"""

from dataclasses import dataclass

import numpy as np

from . import dpg, maxwell, mesh, postprocess, raman
from .basis import OrderTriple, shape_eval
from .pml import PmlStretch


@dataclass
class FiberParams:
    """Geometry and material of the desk-scale step-index fiber.

    The defaults give the V ~ 2.198 single-mode configuration: core radius
    0.25 sqrt(2), numerical aperture 0.0659 over a 1.45 cladding, signal
    frequency 30 pi (on the 1e15 rad/s scale).
    """

    r_core: float = 0.25 * np.sqrt(2.0)
    r_clad: float = 2.5 * np.sqrt(2.0)
    n_clad: float = 1.45
    numerical_aperture: float = 0.0659
    omega: float = raman.OMEGA_SIGNAL
    n_eff: float = 1.4507  # fundamental-mode effective index estimate
    radial_grading: float = 3.0
    clad_radial_cells: int = 2
    pml_target: float = 1.0e-4

    @property
    def n_core(self) -> float:
        return float(np.sqrt(self.n_clad**2 + self.numerical_aperture**2))

    @property
    def index(self) -> maxwell.StepIndex:
        return maxwell.StepIndex(self.n_core, self.n_clad)

    @property
    def beta(self) -> float:
        return self.n_eff * self.omega

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.beta

    @property
    def v_number(self) -> float:
        return self.omega * self.r_core * self.numerical_aperture

    @property
    def mode_radius(self) -> float:
        """Gaussian 1/e amplitude radius of the fundamental mode
        (Marcuse fit in the single-mode range)."""
        V = self.v_number
        return self.r_core * (0.65 + 1.619 / V**1.5 + 2.879 / V**6)

    def build_mesh(self, z_grid) -> mesh.HexMesh:
        return mesh.build_fiber_mesh(
            self.r_core, self.r_clad, z_grid,
            radial_grading=self.radial_grading,
            clad_radial_cells=self.clad_radial_cells)


def faces_at_z(m: mesh.HexMesh, z: float):
    return [f for f in m.boundary_faces()
            if abs(m.face_center(f)[2] - z) < 1e-9 * max(1.0, abs(z))
            or abs(m.face_center(f)[2] - z) < 1e-12]


# ---------------------------------------------------------------------------
# Manufactured-solution convergence
# ---------------------------------------------------------------------------

def mms_convergence(p_values=(1, 2, 3), levels=None, omega: float = 1.001,
                    scale: float = 1.3, verbose: bool = False):
    """h-convergence on the curvilinear 9-element fiber cross-section mesh
    (short cylinder, uniform refinement).

    Returns {"rows": [(p, level, n_elems, n_dofs, rel_err)],
             "slopes": {p: finest-pair slope of log err vs log dofs}}.
    """
    mms = maxwell.smooth_mms(omega, 1.0, scale=scale)
    if levels is None:
        levels = {1: 4, 2: 3, 3: 3}
    rows = []
    slopes = {}
    for p in p_values:
        nlev = levels[p] if isinstance(levels, dict) else levels
        m = mesh.build_fiber_mesh(0.5, 1.5, np.linspace(0.0, 2.0, 2))
        errs, dofs = [], []
        for lev in range(nlev):
            orders = OrderTriple(p, p, p)
            coeffs = maxwell.MaxwellCoefficients(omega, m, 1.0,
                                                 load_fn=mms.load)
            prob = dpg.UltraweakProblem(m, orders, coeffs)
            dE, vE = maxwell.project_boundary_traces(
                prob, m.boundary_faces(), mms.E)
            u = prob.solve(dE, vE)
            fields, _ = prob.recover_fields(u)
            err, ref = maxwell.field_l2_norms(prob, fields, mms.exact6)
            ndof = prob.n_field * m.n_elems + prob.n_trace
            rows.append((p, lev, m.n_elems, ndof, err / ref))
            errs.append(err / ref)
            dofs.append(ndof)
            if verbose:
                print(f"p={p} level={lev} ne={m.n_elems} ndof={ndof} "
                      f"err={err / ref:.4e}", flush=True)
            if lev + 1 < nlev:
                m = mesh.refine_uniform(m)
        slopes[p] = float(np.log(errs[-1] / errs[-2])
                          / np.log(dofs[-1] / dofs[-2]))
    return {"rows": rows, "slopes": slopes}


# ---------------------------------------------------------------------------
# Linear fiber
# ---------------------------------------------------------------------------

def linear_fiber(params: FiberParams = None, p: int = 3,
                 wavelengths: float = 8.0, pml_wavelengths: float = 2.0,
                 layers_per_wavelength: float = 3.2, amplitude: float = 1.0,
                 beam_radius: float = None, verbose: bool = False):
    """Single-mode fiber with a Gaussian launch and an absorbing terminal
    layer; no gain.  Reports station powers upstream of the layer, the
    component L2 norms there, and the terminal-face field ratio."""
    params = params or FiberParams()
    lam = params.wavelength
    L_phys = wavelengths * lam
    L = L_phys + pml_wavelengths * lam
    nlay = int(round(layers_per_wavelength * (wavelengths + pml_wavelengths)))
    m = params.build_mesh(np.linspace(0.0, L, nlay + 1))
    stretch = PmlStretch.calibrated(params.omega, params.beta, L_phys, L,
                                    params.pml_target)
    setup = raman.FieldSetup(
        omega=params.omega, upsilon=1.0,
        excitation_faces=faces_at_z(m, 0.0), amplitude=amplitude,
        beam_width=beam_radius or params.mode_radius, pml=stretch)
    if verbose:
        print(f"linear fiber: {m.n_elems} elements, L={L:.4f} "
              f"({wavelengths}+{pml_wavelengths} wavelengths)", flush=True)
    prob, u, fields, eta = raman.solve_carrier(
        m, OrderTriple(p, p, p), params.index, setup)

    stations = [z for z in m.z_grid if 0.99 * lam <= z <= L_phys + 1e-12]
    zs, P = postprocess.power_trace(prob, u, stations)
    phys_elems = [e for e in range(m.n_elems)
                  if m.geom_nodes[e][..., 2].mean() < L_phys]
    comps = postprocess.component_l2_norms(prob, fields, phys_elems)

    # pointwise field magnitudes: interior max vs terminal face max
    ytab = prob._yv.tabulate()[:, 0, :]
    interior_max = max(np.abs(fields[e] @ ytab).max() for e in phys_elems)
    a = np.linspace(0.0, 1.0, p + 3)
    fa, fb = np.meshgrid(a, a, indexing="ij")
    end_pts = np.column_stack([fa.ravel(), fb.ravel(),
                               np.ones(fa.size)])
    ytab_end, _ = shape_eval("Y", prob.orders, end_pts)
    terminal_max = max(
        np.abs(fields[e] @ ytab_end[:, 0, :]).max()
        for e in range(m.n_elems) if m.layer[e] == nlay - 1)

    return {
        "problem": prob, "u": u, "fields": fields, "eta": eta,
        "mesh": m, "pml": stretch, "stations": zs, "powers": P,
        "component_norms": comps,
        "power_spread": float((P.max() - P.min()) / np.mean(P)),
        "terminal_ratio": float(terminal_max / interior_max),
        "pml_attenuation": stretch.attenuation(params.beta),
    }


# ---------------------------------------------------------------------------
# Pollution / projection comparison
# ---------------------------------------------------------------------------

def te10_mode(omega: float):
    """Lowest transverse-electric mode of the [0,1]^2 guide: exact fields,
    propagation constant and matched impedance factor."""
    import sympy as sym

    beta = float(np.sqrt(omega**2 - np.pi**2))
    x, y, z = sym.symbols("x y z")
    mms = maxwell.ManufacturedSolution(
        omega, 1.0, (0, sym.sin(sym.pi * x) * sym.exp(-sym.I * beta * z), 0))
    gamma = omega / beta
    return mms, beta, gamma


def pollution_study(p: int = 5, L: float = 16.0,
                    elements_per_wavelength=(1, 2, 4),
                    omega: float = None, verbose: bool = False):
    """Transport a waveguide mode over many wavelengths and compare both
    formulations against their best approximations under anisotropic z
    refinement.

    Returns per-level dicts with the ultraweak L2 error / L2-projection
    error ratio and the primal H(curl) error / H(curl)-projection ratio.
    """
    omega = omega or float(np.sqrt(5.0) * np.pi)
    mms, beta, gamma = te10_mode(omega)
    lam = 2.0 * np.pi / beta
    n_waves = L / lam

    def curlE(X):
        return -1j * omega * mms.H(X)

    levels = []
    for epw in elements_per_wavelength:
        nz = int(round(epw * n_waves))
        m = mesh.build_box_mesh((1.0, 1.0, L), (1, 1, nz))
        bnd = m.boundary_faces()
        inlet = [f for f in bnd if abs(m.face_center(f)[2]) < 1e-9]
        outlet = [f for f in bnd if abs(m.face_center(f)[2] - L) < 1e-9]
        lateral = [f for f in bnd if f not in set(inlet) | set(outlet)]
        imp = {int(f): gamma for f in outlet}
        orders = OrderTriple(p, p, p)

        coeffs = maxwell.MaxwellCoefficients(omega, m, 1.0, load_fn=mms.load)
        prob = dpg.UltraweakProblem(m, orders, coeffs, impedance_faces=imp)
        dE, vE = maxwell.project_boundary_traces(prob, inlet, mms.E)
        d0 = np.setdiff1d(
            np.union1d(prob.trace_space.faces_geo_dofs(lateral),
                       prob.impedance_e_dofs()), dE)
        K, rhs = prob.assemble()
        dirs = np.concatenate([dE, d0])
        vals = np.concatenate([vE, np.zeros(len(d0), dtype=np.complex128)])
        u = dpg.solve_with_dirichlet(K, rhs, dirs, vals, prob.n_trace)
        opt_res = dpg.optimality_residual(K, rhs, u, dirs, prob.n_trace)
        fields, _ = prob.recover_fields(u)
        uw_err, uw_ref = maxwell.field_l2_norms(prob, fields, mms.exact6)
        proj = maxwell.project_fields(prob, mms.exact6)
        l2_err, _ = maxwell.field_l2_norms(prob, proj, mms.exact6)

        pp = maxwell.PrimalProblem(m, orders, omega, impedance_faces=imp,
                                   load_fn=mms.load)
        dEp, vEp = maxwell.project_boundary_traces(pp, inlet, mms.E)
        d0p = np.setdiff1d(pp.trace_space.faces_geo_dofs(lateral), dEp)
        dirsp = np.concatenate([dEp, d0p, pp.inactive_h_dofs()])
        valsp = np.concatenate(
            [vEp, np.zeros(len(dirsp) - len(dEp), dtype=np.complex128)])
        up = pp.solve(dirsp, valsp)
        pr_err, pr_ref = pp.e_field_hcurl_error(up, mms.E, curlE)
        hc_err, hc_ref = maxwell.hcurl_projection_error(m, orders, mms.E,
                                                        curlE)
        lev = {
            "elements_per_wavelength": epw, "nz": nz,
            "uw_rel_error": uw_err / uw_ref,
            "l2_projection_rel_error": l2_err / uw_ref,
            "uw_ratio": uw_err / l2_err,
            "primal_rel_error": pr_err / pr_ref,
            "hcurl_projection_rel_error": hc_err / hc_ref,
            "primal_ratio": pr_err / hc_err,
            "optimality_residual": opt_res,
        }
        levels.append(lev)
        if verbose:
            print(f"epw={epw} nz={nz} uw_ratio={lev['uw_ratio']:.3f} "
                  f"primal_ratio={lev['primal_ratio']:.3f}", flush=True)
    return {"omega": omega, "beta": beta, "gamma": gamma, "levels": levels}


# ---------------------------------------------------------------------------
# Raman gain runs
# ---------------------------------------------------------------------------

def raman_study(params: FiberParams = None, kappa_a: float = 1.0e-4,
                pumping: str = "co", p: int = 3,
                gain_wavelengths: float = 6.0, pml_wavelengths: float = 2.0,
                layers_per_wavelength: float = 3.0,
                signal_amplitude: float = 150.0,
                pump_amplitude: float = 150.0,
                tol: float = 1.0e-3, max_iters: int = 25,
                verbose: bool = False):
    """Coupled signal/pump run.  "co": both fields launched at z=0 with one
    shared absorbing layer at the far end.  "counter": the signal travels
    +z into its own layer at the end, the pump is launched at the far face
    and travels -z into a layer at the start; the gain acts on the window
    clear of both layers."""
    if pumping not in ("co", "counter"):
        raise ValueError("pumping must be 'co' or 'counter'")
    params = params or FiberParams()
    lam = params.wavelength
    Lg = gain_wavelengths * lam
    Lp = pml_wavelengths * lam
    omega_s, omega_p = raman.OMEGA_SIGNAL, raman.OMEGA_PUMP
    beta_s = params.n_eff * omega_s
    beta_p = params.n_eff * omega_p
    w0 = params.mode_radius

    if pumping == "co":
        L = Lg + Lp
        gain_z = (0.0, Lg)
        m = params.build_mesh(np.linspace(0.0, L, int(round(
            layers_per_wavelength * (gain_wavelengths + pml_wavelengths)))
            + 1))
        pml_s = PmlStretch.calibrated(omega_s, beta_s, Lg, L,
                                      params.pml_target)
        pml_p = PmlStretch.calibrated(omega_p, beta_p, Lg, L,
                                      params.pml_target)
        sig_faces = pump_faces = faces_at_z(m, 0.0)
    else:
        L = Lp + Lg + Lp
        gain_z = (Lp, Lp + Lg)
        m = params.build_mesh(np.linspace(0.0, L, int(round(
            layers_per_wavelength
            * (gain_wavelengths + 2 * pml_wavelengths))) + 1))
        pml_s = PmlStretch.calibrated(omega_s, beta_s, Lp + Lg, L,
                                      params.pml_target)
        # reversed layer: the pump travels toward -z and is absorbed near 0
        pml_p = PmlStretch.calibrated(omega_p, beta_p, Lp, 0.0,
                                      params.pml_target)
        sig_faces = faces_at_z(m, 0.0)
        pump_faces = faces_at_z(m, L)

    signal = raman.FieldSetup(omega=omega_s, upsilon=raman.UPSILON_SIGNAL,
                              excitation_faces=sig_faces,
                              amplitude=signal_amplitude, beam_width=w0,
                              pml=pml_s)
    pump = raman.FieldSetup(omega=omega_p, upsilon=raman.UPSILON_PUMP,
                            excitation_faces=pump_faces,
                            amplitude=pump_amplitude, beam_width=w0,
                            pml=pml_p)
    model = raman.RamanModel(m, OrderTriple(p, p, p), params.index, kappa_a,
                             signal, pump, gain_z)
    result = raman.simple_iterate(model, tol=tol, max_iters=max_iters,
                                  verbose=verbose)

    stations = [z for z in m.z_grid
                if gain_z[0] - 1e-12 <= z <= gain_z[1] + 1e-12]
    s_prob, s_u, _, _ = result["signal"]
    p_prob, p_u, _, _ = result["pump"]
    _, P_s = postprocess.power_trace(s_prob, s_u, stations)
    _, P_p = postprocess.power_trace(p_prob, p_u, stations)
    result.update({
        "mesh": m, "model": model, "pumping": pumping, "gain_z": gain_z,
        "stations": np.asarray(stations), "P_signal": P_s, "P_pump": P_p,
    })
    return result
