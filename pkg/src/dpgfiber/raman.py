"""Raman-coupled two-field fiber model and its fixed-point solver.

Signal and pump are independent time-harmonic solves coupled only through a
real gain conductivity proportional to the other field's irradiance:

    sigma_l = - n * kappa_a * Upsilon_l * I_other ,     l in {signal, pump}

with Upsilon_signal = 1 (gain) and Upsilon_pump = -omega_p / omega_s (loss;
the quantum defect makes the pump lose slightly more power than the signal
gains).  The gain is restricted to the doped core and switched off wherever
either field's PML is active.

The nonlinear system is solved by simple (Gauss-Seidel) iterations: solve
the signal with the previous pump irradiance, recompute, solve the pump with
the fresh signal irradiance, and repeat until the relative change of the
signal fields drops below tolerance.  Because the gain enters the first-order
coefficients, the adjoint-graph test norm (and hence the optimal test space)
is rebuilt with the updated gain in every iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import postprocess
from .basis import OrderTriple
from .dpg import UltraweakProblem
from .maxwell import MaxwellCoefficients, StepIndex, project_boundary_traces
from .mesh import HexMesh
from .pml import PmlStretch

OMEGA_SIGNAL = 30.0 * np.pi
# Raman shift of 13.2 THz against the 1e15 rad/s frequency scale
DOMEGA_RAMAN = 2.0 * np.pi * 13.2e12 / 1.0e15
OMEGA_PUMP = OMEGA_SIGNAL + DOMEGA_RAMAN
UPSILON_SIGNAL = 1.0
UPSILON_PUMP = -OMEGA_PUMP / OMEGA_SIGNAL


@dataclass
class FieldSetup:
    """One carrier field: frequency, excitation face set and its PML."""

    omega: float
    upsilon: float
    excitation_faces: list
    amplitude: float
    beam_width: float
    pml: PmlStretch

    def beam(self, X):
        """x-polarized Gaussian transverse profile."""
        r2 = X[:, 0] ** 2 + X[:, 1] ** 2
        out = np.zeros((len(X), 3), dtype=np.complex128)
        out[:, 0] = self.amplitude * np.exp(-r2 / self.beam_width**2)
        return out


@dataclass
class GainField:
    """Pointwise gain conductivity sampled on the volume quadrature grid."""

    values: np.ndarray  # (n_elems,) + rule.shape, real
    mask: np.ndarray    # (n_elems,) + rule.shape bool, where gain may act

    def __call__(self, e, X):
        return self.values[e]

    @classmethod
    def zero(cls, mask):
        return cls(np.zeros(mask.shape), mask)

    def updated(self, n_index, kappa_a, upsilon, irradiance_other):
        vals = np.where(self.mask,
                        -n_index[:, None, None, None] * kappa_a * upsilon
                        * irradiance_other, 0.0)
        return GainField(vals, self.mask)


def gain_mask(problem: UltraweakProblem, z_lo: float, z_hi: float):
    """True on quadrature points of core elements inside [z_lo, z_hi]."""
    shape = (problem.mesh.n_elems,) + problem.rule.shape
    mask = np.zeros(shape, dtype=bool)
    for e in range(problem.mesh.n_elems):
        if problem.mesh.zone[e] != "core":
            continue
        X, _, _, _ = problem.element_geometry(e)
        mask[e] = (X[..., 2] >= z_lo) & (X[..., 2] <= z_hi)
    return mask


@dataclass
class RamanModel:
    """Mesh, material and the two coupled field setups."""

    mesh: HexMesh
    orders: OrderTriple
    index: StepIndex
    kappa_a: float
    signal: FieldSetup
    pump: FieldSetup
    gain_z: tuple  # (z_lo, z_hi) where gain is active
    nquad: int = None

    def make_problem(self, setup: FieldSetup, gain: GainField):
        coeffs = MaxwellCoefficients(setup.omega, self.mesh, self.index,
                                     sigma_fn=gain, pml=setup.pml)
        return UltraweakProblem(self.mesh, self.orders, coeffs,
                                nquad=self.nquad)

    def solve_field(self, setup: FieldSetup, gain: GainField):
        return solve_carrier(self.mesh, self.orders, self.index, setup,
                             gain, self.nquad)


def solve_carrier(mesh, orders, index, setup: FieldSetup, gain=None,
                  nquad=None):
    """One linear solve of a carrier field: beam trace on the excitation
    faces, zero tangential E on the rest of the boundary.

    Returns (problem, u_trace, fields, eta)."""
    coeffs = MaxwellCoefficients(setup.omega, mesh, index,
                                 sigma_fn=gain, pml=setup.pml)
    prob = UltraweakProblem(mesh, orders, coeffs, nquad=nquad)
    bnd = mesh.boundary_faces()
    exc = set(setup.excitation_faces)
    dofs_exc, vals_exc = project_boundary_traces(
        prob, sorted(exc), setup.beam) if exc else (np.array([], int),
                                                    np.array([]))
    others = [f for f in bnd if f not in exc]
    dofs0 = prob.trace_space.faces_geo_dofs(others)
    dofs0 = np.setdiff1d(dofs0, dofs_exc)
    dir_dofs = np.concatenate([dofs_exc, dofs0])
    dir_vals = np.concatenate([vals_exc,
                               np.zeros(len(dofs0), dtype=np.complex128)])
    u = prob.solve(dir_dofs, dir_vals)
    fields, eta = prob.recover_fields(u)
    return prob, u, fields, eta


@dataclass
class IterationRecord:
    iteration: int
    delta: float
    P_signal_out: float
    P_pump_out: float


def _field_change(problem, f_new, f_old):
    from .maxwell import field_l2_norms

    diff, _ = field_l2_norms(problem, f_new - f_old)
    norm, _ = field_l2_norms(problem, f_new)
    return diff / max(norm, 1e-300)


def simple_iterate(model: RamanModel, tol: float = 1e-3, max_iters: int = 25,
                   verbose: bool = False):
    """Gauss-Seidel fixed point on the two-field Raman system.

    Returns a dict with the final problems, trace vectors, fields, the
    iteration history and a convergence flag.
    """
    probe = model.make_problem(model.signal, GainField.zero(
        np.zeros((model.mesh.n_elems, 1, 1, 1), dtype=bool)))
    mask = gain_mask(probe, *model.gain_z)
    n_index = np.array([model.index(z) for z in model.mesh.zone])

    gain0 = GainField.zero(mask)
    sig_fields = None
    I_signal = np.zeros(mask.shape)
    I_pump = np.zeros(mask.shape)
    history = []
    converged = False
    out = {}
    for it in range(1, max_iters + 1):
        g_sig = gain0.updated(n_index, model.kappa_a, UPSILON_SIGNAL, I_pump)
        s_prob, s_u, s_fields, s_eta = model.solve_field(model.signal, g_sig)
        I_signal = postprocess.irradiance(s_prob, s_fields)

        g_pmp = gain0.updated(n_index, model.kappa_a, UPSILON_PUMP, I_signal)
        p_prob, p_u, p_fields, p_eta = model.solve_field(model.pump, g_pmp)
        I_pump = postprocess.irradiance(p_prob, p_fields)

        delta = (1.0 if sig_fields is None
                 else _field_change(s_prob, s_fields, sig_fields))
        sig_fields = s_fields

        zs = model.gain_z[1]
        Ps = abs(postprocess.cross_section_power(
            s_prob, s_u[:s_prob.n_geo], s_u[s_prob.n_geo:], zs))
        Pp = abs(postprocess.cross_section_power(
            p_prob, p_u[:p_prob.n_geo], p_u[p_prob.n_geo:], zs))
        history.append(IterationRecord(it, delta, Ps, Pp))
        if verbose:
            print(f"iter {it}: delta={delta:.3e} Ps={Ps:.5g} Pp={Pp:.5g}",
                  flush=True)
        out = {"signal": (s_prob, s_u, s_fields, s_eta),
               "pump": (p_prob, p_u, p_fields, p_eta)}
        if delta <= tol:
            converged = True
            break
    out["history"] = history
    out["converged"] = converged
    out["iterations"] = len(history)
    return out
