"""Command line run driver.

Usage:
    dpgfiber run <config.ini>
    dpgfiber --print-defaults
    dpgfiber --version

The configuration is an INI file (flat key = value pairs grouped in
sections); unset keys fall back to the defaults printed by
``--print-defaults``.  Every run writes its artifacts (CSV tables and a
``run.json`` manifest echoing the fully resolved configuration) into the
configured output directory.

Studies:
    mms                   manufactured-solution convergence ladder
    linear_fiber          lossless single-mode fiber with absorbing layer
    compare_formulations  waveguide pollution/projection comparison
    raman_co              co-pumped Raman gain run
    raman_counter         counter-pumped Raman gain run
    oracle_only           power-exchange ODE oracle, no mesh
"""

import argparse
import ast
import configparser
import json
import os
import sys

import numpy as np

from . import __version__, oracle, postprocess, raman, studies

STUDIES = ("mms", "linear_fiber", "compare_formulations", "raman_co",
           "raman_counter", "oracle_only")


def default_config():
    fp = studies.FiberParams()
    return {
        "run": {
            "study": "linear_fiber",
            "output_dir": "dpgfiber_out",
            "seed": 0,
        },
        "fiber": {
            "r_core": fp.r_core,
            "r_clad": fp.r_clad,
            "n_clad": fp.n_clad,
            "numerical_aperture": fp.numerical_aperture,
            "omega": fp.omega,
            "n_eff": fp.n_eff,
            "radial_grading": fp.radial_grading,
            "clad_radial_cells": fp.clad_radial_cells,
            "pml_target": fp.pml_target,
        },
        "mms": {
            "p_values": (1, 2, 3),
            "levels": 3,
            "omega": 1.001,
            "scale": 1.3,
        },
        "linear_fiber": {
            "p": 3,
            "wavelengths": 8.0,
            "pml_wavelengths": 2.0,
            "layers_per_wavelength": 3.2,
            "amplitude": 1.0,
        },
        "compare_formulations": {
            "p": 5,
            "length": 16.0,
            "elements_per_wavelength": (1, 2, 4),
        },
        "raman": {
            "kappa_a": 1.0e-4,
            "p": 3,
            "gain_wavelengths": 6.0,
            "pml_wavelengths": 2.0,
            "layers_per_wavelength": 3.0,
            "signal_amplitude": 150.0,
            "pump_amplitude": 150.0,
            "tol": 1.0e-3,
            "max_iters": 25,
        },
        "oracle": {
            "g_over_a": 2.0,
            "p_pump": 5.0,
            "p_signal": 0.5,
            "length": 1.0,
            "steps": 200,
        },
    }


def _parse_value(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def load_config(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    cfg = default_config()
    for section in parser.sections():
        if section not in cfg:
            raise KeyError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in cfg[section]:
                raise KeyError(f"unknown config key [{section}] {key}")
            cfg[section][key] = _parse_value(raw)
    study = cfg["run"]["study"]
    if study not in STUDIES:
        raise ValueError(f"unknown study '{study}' "
                         f"(choose from {', '.join(STUDIES)})")
    return cfg


def _fiber_params(cfg):
    f = cfg["fiber"]
    return studies.FiberParams(
        r_core=float(f["r_core"]), r_clad=float(f["r_clad"]),
        n_clad=float(f["n_clad"]),
        numerical_aperture=float(f["numerical_aperture"]),
        omega=float(f["omega"]), n_eff=float(f["n_eff"]),
        radial_grading=float(f["radial_grading"]),
        clad_radial_cells=int(f["clad_radial_cells"]),
        pml_target=float(f["pml_target"]))


def _run_mms(cfg, outdir, summary):
    s = cfg["mms"]
    res = studies.mms_convergence(
        p_values=tuple(s["p_values"]), levels=s["levels"],
        omega=float(s["omega"]), scale=float(s["scale"]), verbose=True)
    postprocess.write_convergence_csv(
        os.path.join(outdir, "convergence.csv"), res["rows"])
    summary["slopes"] = {str(p): v for p, v in res["slopes"].items()}


def _run_linear_fiber(cfg, outdir, summary):
    s = cfg["linear_fiber"]
    res = studies.linear_fiber(
        _fiber_params(cfg), p=int(s["p"]),
        wavelengths=float(s["wavelengths"]),
        pml_wavelengths=float(s["pml_wavelengths"]),
        layers_per_wavelength=float(s["layers_per_wavelength"]),
        amplitude=float(s["amplitude"]), verbose=True)
    postprocess.write_power_csv(os.path.join(outdir, "power.csv"),
                                res["stations"], res["powers"])
    _write_axis_fields(res, outdir)
    summary.update({
        "power_spread": res["power_spread"],
        "component_norms": list(map(float, res["component_norms"])),
        "terminal_ratio": res["terminal_ratio"],
        "pml_attenuation": res["pml_attenuation"],
    })


def _write_axis_fields(res, outdir, n=60):
    from .maxwell import eval_fields_at

    m = res["mesh"]
    zs = np.linspace(m.z_grid[0], m.z_grid[-1], n + 1)
    eps = 1e-6 * (m.z_grid[-1] - m.z_grid[0])
    pts = np.column_stack([np.full_like(zs, 1e-3), np.full_like(zs, 1e-3),
                           np.clip(zs, m.z_grid[0] + eps,
                                   m.z_grid[-1] - eps)])
    vals, ok = eval_fields_at(res["problem"], res["fields"], pts)
    postprocess.write_fields_csv(os.path.join(outdir, "fields_axis.csv"),
                                 pts[ok], vals[ok])


def _run_compare(cfg, outdir, summary):
    s = cfg["compare_formulations"]
    res = studies.pollution_study(
        p=int(s["p"]), L=float(s["length"]),
        elements_per_wavelength=tuple(s["elements_per_wavelength"]),
        verbose=True)
    path = os.path.join(outdir, "convergence.csv")
    with open(path, "w") as fh:
        fh.write("level,elements_per_wavelength,uw_error,l2_proj_error,"
                 "primal_error,hcurl_proj_error\n")
        for k, lev in enumerate(res["levels"]):
            fh.write(f"{k},{lev['elements_per_wavelength']},"
                     f"{lev['uw_rel_error']:.10e},"
                     f"{lev['l2_projection_rel_error']:.10e},"
                     f"{lev['primal_rel_error']:.10e},"
                     f"{lev['hcurl_projection_rel_error']:.10e}\n")
    summary["levels"] = [
        {k: float(v) for k, v in lev.items()} for lev in res["levels"]]


def _run_raman(cfg, outdir, summary, pumping):
    s = cfg["raman"]
    res = studies.raman_study(
        _fiber_params(cfg), kappa_a=float(s["kappa_a"]), pumping=pumping,
        p=int(s["p"]), gain_wavelengths=float(s["gain_wavelengths"]),
        pml_wavelengths=float(s["pml_wavelengths"]),
        layers_per_wavelength=float(s["layers_per_wavelength"]),
        signal_amplitude=float(s["signal_amplitude"]),
        pump_amplitude=float(s["pump_amplitude"]),
        tol=float(s["tol"]), max_iters=int(s["max_iters"]), verbose=True)
    postprocess.write_power_csv(os.path.join(outdir, "power.csv"),
                                res["stations"], res["P_signal"],
                                res["P_pump"])
    postprocess.write_iterations_csv(
        os.path.join(outdir, "iterations.csv"),
        [(h.iteration, h.delta, h.P_signal_out, h.P_pump_out)
         for h in res["history"]])
    rep = oracle.compare_with_power_trace(
        res["stations"], np.abs(res["P_pump"]), np.abs(res["P_signal"]),
        raman.OMEGA_PUMP, raman.OMEGA_SIGNAL)
    summary.update({
        "converged": res["converged"],
        "iterations": res["iterations"],
        "delta_history": [h.delta for h in res["history"]],
        "oracle_comparison": {
            k: (float(v) if np.isscalar(v) else bool(v))
            for k, v in rep.items() if k != "ode_powers"},
    })


def _run_oracle(cfg, outdir, summary):
    s = cfg["oracle"]
    model = oracle.PowerModel(float(s["g_over_a"]), raman.OMEGA_PUMP,
                              raman.OMEGA_SIGNAL)
    z = np.linspace(0.0, float(s["length"]), int(s["steps"]) + 1)
    P = oracle.integrate_power_odes(model, (float(s["p_pump"]),
                                            float(s["p_signal"])), z)
    Pex = oracle.closed_form_co_pumped(model, (float(s["p_pump"]),
                                               float(s["p_signal"])), z)
    postprocess.write_power_csv(os.path.join(outdir, "power.csv"),
                                z, P[:, 1], P[:, 0])
    Q = P[:, 0] / model.omega_p + P[:, 1] / model.omega_s
    summary.update({
        "photon_flux_drift": float(np.max(np.abs(Q - Q[0])) / Q[0]),
        "closed_form_deviation": float(np.max(np.abs(P - Pex))
                                       / np.max(Pex)),
    })


def run_config(path):
    cfg = load_config(path)
    study = cfg["run"]["study"]
    outdir = cfg["run"]["output_dir"]
    os.makedirs(outdir, exist_ok=True)
    np.random.seed(int(cfg["run"]["seed"]))
    summary = {}
    if study == "mms":
        _run_mms(cfg, outdir, summary)
    elif study == "linear_fiber":
        _run_linear_fiber(cfg, outdir, summary)
    elif study == "compare_formulations":
        _run_compare(cfg, outdir, summary)
    elif study == "raman_co":
        _run_raman(cfg, outdir, summary, "co")
    elif study == "raman_counter":
        _run_raman(cfg, outdir, summary, "counter")
    else:
        _run_oracle(cfg, outdir, summary)
    manifest = {"version": __version__, "study": study, "config": cfg,
                "summary": summary}
    with open(os.path.join(outdir, "run.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    return 0


def print_defaults():
    cfg = default_config()
    for section, items in cfg.items():
        print(f"[{section}]")
        for key, val in items.items():
            print(f"{key} = {val}")
        print()


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="dpgfiber",
        description="Ultraweak DPG fiber amplifier study driver")
    parser.add_argument("--version", action="version",
                        version=f"dpgfiber {__version__}")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default configuration and exit")
    sub = parser.add_subparsers(dest="command")
    runp = sub.add_parser("run", help="execute a study from a config file")
    runp.add_argument("config", help="path to the INI configuration file")
    args = parser.parse_args(argv)
    if args.print_defaults:
        print_defaults()
        return 0
    if args.command != "run":
        parser.print_help()
        return 2
    try:
        return run_config(args.config)
    except (FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
