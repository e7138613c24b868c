"""Command-line front end.

Subcommands: simulate-single, calibrate, simulate-cnot, sweep, validate.
Options can come from a ``--config`` file (flat ``key = value`` lines, same
keys as the long flags) with command-line flags taking precedence.  Every
run that exits 0 writes a ``report.json`` echoing the fully resolved
configuration; trajectory and sweep data land in CSV files next to it, and
matplotlib figures are rendered alongside unless ``--no-figures`` is given.

Exit codes: 0 success; 1 validation assertion failure (``validate`` only);
2 invalid input; 3 numeric contract violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import ContractViolation, as_state
from .device import DeviceParams
from .phases import NonCyclicTrajectory, PhaseReport, bloch_loop
from .protocols import (
    GateReport,
    SingleQubitPlan,
    TwoQubitPlan,
    calibrate_delta,
    predict_gamma,
    protocol_tau,
    run_conditional_gate,
    run_single_qubit,
)
from .reporting import (
    BadInput,
    fnum,
    load_config_file,
    matrix_document,
    parse_angle,
    parse_bool,
    state_document,
    write_csv,
    write_report,
    write_trajectory_csv,
)
from .validation import discrepancies_monotone, validity_sweep

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERIC = 3

_DEFAULTS = {
    "e_ch": "50",
    "e_j0": "1",
    "coupling": "1",
    "out": "out",
    "samples": "1001",
    "method": "closed",
    "figures": "true",
    "delta": "0.04",
    "mode": "",
    "compensation": "derived",
    "theta": "pi/8",
    "target_gamma": "",
    "initial": "0,0,1,0",
    "parameter": "delta",
    "values": "",
    "start": "",
    "stop": "",
    "count": "0",
    "spacing": "linear",
    "ratios": "0.2,0.1,0.05,0.025",
    "levels": "-2,3",
}

_MODE_DEFAULT = {"simulate-single": "symmetric", "sweep": "", "simulate-cnot": "instantaneous"}


def _resolve(args) -> dict[str, str]:
    cfg = dict(_DEFAULTS)
    if args.config:
        file_cfg = load_config_file(args.config)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise BadInput(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = str(flag)
    if not cfg["mode"]:
        cfg["mode"] = _MODE_DEFAULT.get(args.command, "")
    cfg["command"] = args.command
    return cfg


def _device(cfg) -> DeviceParams:
    try:
        return DeviceParams(e_j0=float(cfg["e_j0"]), e_ch=float(cfg["e_ch"]),
                            delta_coupling=float(cfg["coupling"]))
    except (ValueError, ContractViolation) as exc:
        raise BadInput(f"invalid device parameters: {exc}") from exc


def _method(cfg) -> str:
    name = cfg["method"].strip().lower()
    if name in ("closed", "closed_form"):
        return "closed_form"
    if name == "rk4":
        return "rk4"
    raise BadInput(f"unknown method {cfg['method']!r} (expected closed or rk4)")


def _samples(cfg) -> int:
    try:
        n = int(cfg["samples"])
    except ValueError as exc:
        raise BadInput(f"invalid samples {cfg['samples']!r}") from exc
    if n < 2:
        raise BadInput("samples must be at least 2")
    return n


def _initial_state(cfg) -> np.ndarray:
    parts = [p for p in cfg["initial"].split(",") if p.strip()]
    if len(parts) != 4:
        raise BadInput("initial state needs 4 numbers: up_re,up_im,dn_re,dn_im")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise BadInput(f"invalid initial amplitudes {cfg['initial']!r}") from exc
    psi = np.array([vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]])
    try:
        return as_state(psi, dim=2)
    except ContractViolation as exc:
        raise BadInput(f"invalid initial state: {exc}") from exc


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _warn(lines):
    for line in lines:
        print(f"warning: {line}", file=sys.stderr)


def _phase_report_doc(report: PhaseReport | None) -> dict | None:
    if report is None:
        return None
    return {
        "total_phase": report.total_phase,
        "dynamic_phase": report.dynamic_phase,
        "geometric_phase": report.geometric_phase,
        "geometric_phase_wrapped": report.geometric_phase_wrapped,
        "cyclicity_defect": report.cyclicity_defect,
    }


def _base_document(cfg, device: DeviceParams) -> dict:
    return {
        "tool": "squidphase",
        "version": __version__,
        "command": cfg["command"],
        "config": {k: v for k, v in sorted(cfg.items())},
        "device": {"e_j0": device.e_j0, "e_ch": device.e_ch,
                   "delta_coupling": device.delta_coupling},
        "warnings": device.warnings(),
    }


def cmd_simulate_single(cfg) -> int:
    device = _device(cfg)
    if cfg["mode"] not in ("symmetric", "literal"):
        raise BadInput(f"unknown mode {cfg['mode']!r} (expected symmetric or literal)")
    delta = float(cfg["delta"])
    try:
        plan = SingleQubitPlan.for_device(device, delta, cfg["mode"])
    except ContractViolation as exc:
        raise BadInput(str(exc)) from exc
    initial = _initial_state(cfg)
    result = run_single_qubit(device, plan, initial, _method(cfg), _samples(cfg))

    out = _outdir(cfg)
    doc = _base_document(cfg, device)
    doc["warnings"] += list(result.warnings)
    doc["plan"] = {"delta": plan.delta, "step3_mode": plan.step3_mode, "tau": plan.tau}
    doc["prediction"] = {
        "gamma": result.gamma_predicted,
        "flip_probability": math.sin(result.gamma_predicted) ** 2,
    }
    doc["result"] = {
        "final_state": state_document(result.final),
        "populations": list(result.populations),
        "residual_vs_ideal": result.residual_vs_ideal,
        "gamma_measured": result.gamma_measured,
        "solid_angle": result.solid_angle,
        "phase_area_mismatch": result.phase_area_mismatch,
        "eigenstate_cyclicity_defect": result.eigenstate_defect,
        "phase_report_y_plus": _phase_report_doc(result.report_plus),
        "phase_report_y_minus": _phase_report_doc(result.report_minus),
    }
    write_trajectory_csv(out / "trajectory.csv", result.trajectory)
    write_report(out / "report.json", doc)
    _warn(doc["warnings"])

    if parse_bool(cfg["figures"]):
        from . import plots
        traj = result.trajectory
        plots.bloch_loop_figure(bloch_loop(traj), out / "bloch_loop.png")
        plots.populations_figure(traj.times, traj.states, out / "populations.png")

    print(f"final populations: P(up) = {fnum(result.populations[0])}, "
          f"P(dn) = {fnum(result.populations[1])}")
    if result.gamma_measured is not None:
        print(f"gamma: predicted {fnum(result.gamma_predicted)}, "
              f"measured {fnum(result.gamma_measured)}")
    print(f"report: {out / 'report.json'}")
    return EXIT_OK


def cmd_calibrate(cfg) -> int:
    device = _device(cfg)
    if not cfg["target_gamma"]:
        raise BadInput("calibrate requires --target-gamma")
    target = parse_angle(cfg["target_gamma"])
    if not (0.0 < target < math.pi):
        raise BadInput("target gamma must lie strictly between 0 and pi")
    delta = calibrate_delta(device, target)
    tau = protocol_tau(device, delta)
    residual = abs(predict_gamma(device, delta) - target)

    out = _outdir(cfg)
    doc = _base_document(cfg, device)
    doc["calibration"] = {
        "target_gamma": target,
        "delta": delta,
        "tau": tau,
        "verification_residual": residual,
    }
    write_report(out / "report.json", doc)
    _warn(doc["warnings"])
    print(f"delta = {fnum(delta)}")
    print(f"tau = {fnum(tau)}")
    print(f"verification residual = {fnum(residual)}")
    return EXIT_OK


def _gate_document(report: GateReport) -> dict:
    return {
        "unitary": matrix_document(report.unitary),
        "basis_order": ["dd", "du", "ud", "uu"],
        "gamma_predicted": -2.0 * report.theta,
        "gamma_measured": report.gamma_measured,
        "fidelity_vs_target": report.fidelity_vs_target,
        "cnot_fidelity_raw": report.cnot_fidelity_raw,
        "conditional_identity_defect": report.conditional_identity_defect,
        "leakage": report.leakage,
        "block_phase_passive": report.block_phase_passive,
        "block_phase_active": report.block_phase_active,
        "active_block": matrix_document(report.active_block),
        "tau": report.tau,
        "theta": report.theta,
        "rotation_mode": report.rotation_mode,
        "compensation_mode": report.compensation_mode,
    }


def cmd_simulate_cnot(cfg) -> int:
    device = _device(cfg)
    if device.delta_coupling <= 0:
        raise BadInput("no coupling: simulate-cnot needs coupling > 0")
    if cfg["mode"] not in ("instantaneous", "finite"):
        raise BadInput(f"unknown mode {cfg['mode']!r} (expected instantaneous or finite)")
    if cfg["compensation"] not in ("derived", "literal"):
        raise BadInput(f"unknown compensation {cfg['compensation']!r}")
    theta = parse_angle(cfg["theta"])
    try:
        plan = TwoQubitPlan.for_device(device, theta, cfg["mode"], cfg["compensation"])
    except ContractViolation as exc:
        raise BadInput(str(exc)) from exc
    report = run_conditional_gate(device, plan)

    out = _outdir(cfg)
    doc = _base_document(cfg, device)
    doc["gate"] = _gate_document(report)
    write_report(out / "report.json", doc)
    _warn(doc["warnings"])

    if parse_bool(cfg["figures"]):
        from . import plots
        plots.gate_magnitude_figure(report.unitary, out / "gate_magnitudes.png")

    print(f"gamma: predicted {fnum(-2.0 * theta)}, measured {fnum(report.gamma_measured)}")
    print(f"cnot fidelity: raw {fnum(report.cnot_fidelity_raw)}, "
          f"completed {fnum(report.fidelity_vs_target)}")
    print(f"report: {out / 'report.json'}")
    return EXIT_OK


def _sweep_values(cfg) -> list[float]:
    if cfg["values"]:
        vals = [parse_angle(v) for v in cfg["values"].split(",") if v.strip()]
    else:
        count = int(cfg["count"])
        if count <= 0 or not cfg["start"] or not cfg["stop"]:
            raise BadInput("sweep needs --values or --start/--stop/--count")
        lo, hi = parse_angle(cfg["start"]), parse_angle(cfg["stop"])
        if cfg["spacing"] == "log":
            if lo <= 0 or hi <= 0:
                raise BadInput("log spacing needs positive bounds")
            vals = list(np.geomspace(lo, hi, count))
        elif cfg["spacing"] == "linear":
            vals = list(np.linspace(lo, hi, count))
        else:
            raise BadInput(f"unknown spacing {cfg['spacing']!r}")
    if not vals:
        raise BadInput("empty grid")
    return [float(v) for v in vals]


_SINGLE_SWEEP_COLUMNS = [
    "delta", "tau", "gamma_predicted", "gamma_measured", "p_up", "p_dn",
    "residual_vs_ideal", "dynamic_phase_plus", "dynamic_phase_minus",
    "geometric_phase_plus", "geometric_phase_minus", "solid_angle",
    "phase_area_mismatch",
]

_THETA_SWEEP_COLUMNS = [
    "theta", "tau", "gamma_predicted", "gamma_measured", "leakage",
    "conditional_identity_defect", "block_phase_passive", "block_phase_active",
    "cnot_fidelity_raw", "fidelity_vs_target",
]


def _single_row(cfg, device, delta) -> list[float]:
    plan = SingleQubitPlan.for_device(device, delta, cfg["mode"] or "symmetric")
    result = run_single_qubit(device, plan, _initial_state(cfg),
                              _method(cfg), _samples(cfg))
    return [
        delta, plan.tau, result.gamma_predicted, result.gamma_measured,
        result.populations[0], result.populations[1], result.residual_vs_ideal,
        result.report_plus.dynamic_phase, result.report_minus.dynamic_phase,
        result.report_plus.geometric_phase_wrapped,
        result.report_minus.geometric_phase_wrapped,
        result.solid_angle, result.phase_area_mismatch,
    ]


def _theta_row(cfg, device, theta) -> list[float]:
    plan = TwoQubitPlan.for_device(device, theta, cfg["mode"] or "instantaneous",
                                   cfg["compensation"])
    r = run_conditional_gate(device, plan)
    return [
        theta, r.tau, -2.0 * theta, r.gamma_measured, r.leakage,
        r.conditional_identity_defect, r.block_phase_passive,
        r.block_phase_active, r.cnot_fidelity_raw, r.fidelity_vs_target,
    ]


def cmd_sweep(cfg) -> int:
    device = _device(cfg)
    parameter = cfg["parameter"]
    values = _sweep_values(cfg)
    if parameter == "delta":
        if cfg["mode"] not in ("", "symmetric"):
            raise BadInput("delta sweeps need symmetric mode (phase reports required)")
        header = _SINGLE_SWEEP_COLUMNS
        rows = [_single_row(cfg, device, v) for v in values]
    elif parameter == "theta":
        if device.delta_coupling <= 0:
            raise BadInput("no coupling: theta sweeps need coupling > 0")
        header = _THETA_SWEEP_COLUMNS
        rows = [_theta_row(cfg, device, v) for v in values]
    else:
        raise BadInput(f"unknown sweep parameter {parameter!r}")

    out = _outdir(cfg)
    write_csv(out / "sweep.csv", header, rows)
    doc = _base_document(cfg, device)
    doc["sweep"] = {"parameter": parameter, "values": values,
                    "columns": header, "rows": rows}
    write_report(out / "report.json", doc)
    _warn(doc["warnings"])

    if parse_bool(cfg["figures"]):
        from . import plots
        xs = [row[0] for row in rows]
        if parameter == "delta":
            series = {"gamma_measured": [row[3] for row in rows],
                      "gamma_predicted": [row[2] for row in rows]}
            ylabel = "loop phase (rad)"
        else:
            series = {"fidelity_vs_target": [row[9] for row in rows],
                      "cnot_fidelity_raw": [row[8] for row in rows]}
            ylabel = "fidelity"
        plots.curve_figure(xs, series, out / "sweep.png", parameter, ylabel)

    print(f"{len(rows)} grid points -> {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_validate(cfg) -> int:
    device = _device(cfg)
    try:
        ratios = [float(v) for v in cfg["ratios"].split(",") if v.strip()]
        n_min, n_max = (int(v) for v in cfg["levels"].split(","))
    except ValueError as exc:
        raise BadInput(f"invalid ratios/levels: {exc}") from exc
    if not ratios:
        raise BadInput("empty ratio list")
    if n_max <= n_min or n_min > 0 or n_max < 1:
        raise BadInput("invalid truncation window: need n_min <= 0 < 1 <= n_max")

    rows = validity_sweep(e_ch=device.e_ch, ratios=ratios, n_min=n_min, n_max=n_max)
    monotone = discrepancies_monotone(rows)

    out = _outdir(cfg)
    header = ["ratio", "delta", "tau", "leakage", "discrepancy"]
    table = [[r.ratio, r.delta, r.tau, r.leakage, r.discrepancy] for r in rows]
    write_csv(out / "validation.csv", header, table)
    doc = _base_document(cfg, device)
    doc["validation"] = {
        "window": [n_min, n_max],
        "columns": header,
        "rows": table,
        "discrepancy_monotone_decreasing": monotone,
    }
    write_report(out / "report.json", doc)
    _warn(doc["warnings"])

    if parse_bool(cfg["figures"]):
        from . import plots
        plots.validation_figure([r.ratio for r in rows], [r.leakage for r in rows],
                                [r.discrepancy for r in rows], out / "validation.png")

    for r in rows:
        print(f"ratio {fnum(r.ratio)}: leakage {fnum(r.leakage)}, "
              f"discrepancy {fnum(r.discrepancy)}")
    if not monotone:
        print("validation FAILED: discrepancy not monotone decreasing", file=sys.stderr)
        return EXIT_ASSERTION
    print("validation passed: discrepancy decreases monotonically")
    return EXIT_OK


_COMMANDS = {
    "simulate-single": cmd_simulate_single,
    "calibrate": cmd_calibrate,
    "simulate-cnot": cmd_simulate_cnot,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squidphase",
        description="Geometric-phase loop protocols for flux-tunable charge qubits",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--e-ch", dest="e_ch", help="charging energy (default: 50)")
        p.add_argument("--e-j0", dest="e_j0", help="single-junction coupling (default: 1)")
        p.add_argument("--coupling", help="qubit-qubit coupling energy (default: 1)")
        p.add_argument("--samples", help="samples per segment (default: 1001)")
        p.add_argument("--method", help="closed or rk4 (default: closed)")
        p.add_argument("--figures", dest="figures", action="store_const", const="true",
                       help="render figures (default)")
        p.add_argument("--no-figures", dest="figures", action="store_const", const="false",
                       help="skip figure rendering")

    p = sub.add_parser("simulate-single", help="run the single-qubit loop")
    common(p)
    p.add_argument("--delta", help="bias offset (default: 0.04)")
    p.add_argument("--mode", help="third-step reading: symmetric or literal")
    p.add_argument("--initial", help="up_re,up_im,dn_re,dn_im (default: 0,0,1,0)")

    p = sub.add_parser("calibrate", help="bias offset for a target loop phase")
    common(p)
    p.add_argument("--target-gamma", dest="target_gamma",
                   help="target phase in (0, pi); accepts pi expressions")

    p = sub.add_parser("simulate-cnot", help="run the conditional-phase gate")
    common(p)
    p.add_argument("--theta", help="tilt angle (default: pi/8)")
    p.add_argument("--mode", help="rotation realization: instantaneous or finite")
    p.add_argument("--compensation", help="pulse offset: derived or literal")

    p = sub.add_parser("sweep", help="grid sweep over delta or theta")
    common(p)
    p.add_argument("--parameter", help="delta or theta (default: delta)")
    p.add_argument("--values", help="comma-separated grid values")
    p.add_argument("--start", help="grid start (with --stop/--count)")
    p.add_argument("--stop", help="grid stop")
    p.add_argument("--count", help="grid size")
    p.add_argument("--spacing", help="linear or log (default: linear)")
    p.add_argument("--mode", help="mode passed through to the runs")
    p.add_argument("--compensation", help="compensation for theta sweeps")
    p.add_argument("--initial", help="initial state for delta sweeps")

    p = sub.add_parser("validate", help="charge-basis check of the two-level model")
    common(p)
    p.add_argument("--ratios", help="e_j0/e_ch values (default: 0.2,0.1,0.05,0.025)")
    p.add_argument("--levels", help="charge window n_min,n_max (default: -2,3)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except (BadInput, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ContractViolation, NonCyclicTrajectory) as exc:
        print(f"numeric contract violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry():
    raise SystemExit(main())
