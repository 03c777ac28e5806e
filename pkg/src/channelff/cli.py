"""Scenario-driven command line front end.

    channelff run CONFIG [CONFIG ...] [--out DIR] [--cells N] [--cfl X]
                  [--require-certificate] [--jobs K]

A config is one JSON file per scenario with an ``experiment`` kind of
``linear-analysis``, ``single-pool``, ``cascade`` or ``certificate``.
Unknown keys are rejected.  Outputs (CSV files plus a structured text
summary) are deterministic: the same config always produces byte-identical
files.  Exit codes: 0 success, 2 config error, 3 simulation error,
4 certificate failure under --require-certificate.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import cascade as cascade_mod
from . import certificate as cert_mod
from . import controller as ctrl_mod
from . import linear as linear_mod
from . import solver as solver_mod
from . import steady as steady_mod
from .errors import ChannelError, ConfigError
from .model import (
    Grid,
    FieldState,
    Signal,
    gate_boundary_maps,
    gate_head_signal,
    linear_boundary_maps,
    linear_model,
    saint_venant_model,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_CERTIFICATE = 4

_EXPERIMENTS = ("linear-analysis", "single-pool", "cascade", "certificate")


def _fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _require_keys(cfg: dict, allowed: dict, context: str) -> None:
    """allowed maps key -> required flag; unknown keys are fatal."""
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"{context}: unknown keys {unknown}")
    missing = sorted(k for k, required in allowed.items() if required and k not in cfg)
    if missing:
        raise ConfigError(f"{context}: missing keys {missing}")


def _number(cfg: dict, key: str, context: str, positive: bool = False) -> float:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}: {key} must be a number")
    if positive and value <= 0:
        raise ConfigError(f"{context}: {key} must be positive")
    return float(value)


def _integer(cfg: dict, key: str, context: str) -> int:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context}: {key} must be an integer")
    return value


_SIGNAL_KEYS = {
    "constant": {"kind": True, "value": True},
    "smooth-step": {
        "kind": True,
        "base": True,
        "target": True,
        "ramp_start": True,
        "ramp_duration": True,
    },
    "pulse": {
        "kind": True,
        "base": True,
        "peak": True,
        "settle": True,
        "ramp_start": True,
        "rise_duration": True,
        "hold_duration": True,
        "fall_duration": False,
    },
    "samples": {"kind": True, "points": True},
}


def parse_signal(cfg, context: str) -> Signal:
    """Build a Signal from its JSON description."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError(f"{context}: signal must be an object with a 'kind'")
    kind = cfg["kind"]
    if kind not in _SIGNAL_KEYS:
        raise ConfigError(f"{context}: unknown signal kind {kind!r}")
    _require_keys(cfg, _SIGNAL_KEYS[kind], context)
    if kind == "constant":
        return Signal.constant(_number(cfg, "value", context))
    if kind == "smooth-step":
        return Signal.smooth_step(
            _number(cfg, "base", context),
            _number(cfg, "target", context),
            _number(cfg, "ramp_start", context),
            _number(cfg, "ramp_duration", context),
        )
    if kind == "pulse":
        return Signal.pulse(
            _number(cfg, "base", context),
            _number(cfg, "peak", context),
            _number(cfg, "settle", context),
            _number(cfg, "ramp_start", context),
            _number(cfg, "rise_duration", context),
            _number(cfg, "hold_duration", context),
            None if "fall_duration" not in cfg else _number(cfg, "fall_duration", context),
        )
    points = cfg["points"]
    if not isinstance(points, list) or not all(
        isinstance(p, list) and len(p) == 2 for p in points
    ):
        raise ConfigError(f"{context}: samples need a list of [t, v] pairs")
    try:
        return Signal.from_samples(points)
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


@dataclass
class ScenarioOutput:
    """Everything one scenario produces, emitted to disk in one pass."""

    summary: list[tuple[str, object]]
    csv_writers: list  # list of (filename, callable(path))
    certificate: cert_mod.Certificate | None = None


def _summary_text(summary: list[tuple[str, object]]) -> str:
    return "".join(f"{key} = {_fmt(value)}\n" for key, value in summary)


def load_config(path: str) -> dict:
    """Read a scenario file; bundled names resolve to packaged configs."""
    p = Path(path)
    if not p.exists():
        bundled = resources.files("channelff").joinpath(f"configs/{path}")
        if not path.endswith(".json"):
            bundled = resources.files("channelff").joinpath(f"configs/{path}.json")
        if bundled.is_file():
            text = bundled.read_text()
        else:
            raise ConfigError(f"config not found: {path}")
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if cfg.get("experiment") not in _EXPERIMENTS:
        raise ConfigError(f"{path}: experiment must be one of {_EXPERIMENTS}")
    return cfg


_SINGLE_POOL_KEYS = {
    "experiment": True,
    "length_m": True,
    "cells": True,
    "cfl": False,
    "gravity": False,
    "friction": True,
    "gate_coefficient": True,
    "steady_flow": True,
    "set_point": True,
    "disturbance_flow": True,
    "duration": True,
    "cadence": True,
    "controller": False,
    "runs": False,
}

_CONTROLLER_KEYS = {"cells": False, "friction": False}

_CASCADE_KEYS = {
    "experiment": True,
    "pools": True,
    "set_points": True,
    "length_m": True,
    "cells": True,
    "cfl": False,
    "gravity": False,
    "friction": True,
    "gate_coefficient": True,
    "steady_flow": True,
    "controller_friction": False,
    "disturbance_flow": True,
    "duration": True,
    "cadence": True,
}

_CERTIFICATE_KEYS = {
    "experiment": True,
    "length_m": True,
    "cells": True,
    "gravity": False,
    "friction": True,
    "gate_coefficient": True,
    "steady_flow": True,
    "set_point": True,
    "weights": False,
    "epsilon": False,
}

_LINEAR_KEYS = {
    "experiment": True,
    "a": True,
    "b": True,
    "gamma": True,
    "length_m": True,
    "set_point": True,
    "disturbance_base": True,
    "omega_min": True,
    "omega_max": True,
    "omega_count": True,
    "time_domain": False,
}

_LINEAR_TD_KEYS = {
    "cells": True,
    "cfl": False,
    "disturbance": True,
    "duration": True,
    "cadence": True,
}


def _run_single_pool(cfg: dict, overrides: dict, require_certificate: bool) -> ScenarioOutput:
    ctx = "single-pool"
    _require_keys(cfg, _SINGLE_POOL_KEYS, ctx)
    length = _number(cfg, "length_m", ctx, positive=True)
    cells = overrides.get("cells") or _integer(cfg, "cells", ctx)
    cfl = overrides.get("cfl") or (cfg.get("cfl", 0.9))
    gravity = _number(cfg, "gravity", ctx, positive=True) if "gravity" in cfg else 9.81
    c_f = _number(cfg, "friction", ctx)
    c_g = _number(cfg, "gate_coefficient", ctx, positive=True)
    q_star = _number(cfg, "steady_flow", ctx, positive=True)
    set_point = _number(cfg, "set_point", ctx, positive=True)
    duration = _number(cfg, "duration", ctx, positive=True)
    cadence = _number(cfg, "cadence", ctx, positive=True)
    flow_signal = parse_signal(cfg["disturbance_flow"], f"{ctx}.disturbance_flow")
    runs = cfg.get("runs", ["no-control", "controlled"])
    if not isinstance(runs, list) or not runs or any(
        r not in ("no-control", "controlled") for r in runs
    ):
        raise ConfigError(f"{ctx}: runs must be a non-empty list from ['no-control','controlled']")

    ctrl_cfg = cfg.get("controller", {})
    _require_keys(ctrl_cfg, _CONTROLLER_KEYS, f"{ctx}.controller")
    ctrl_cells = ctrl_cfg.get("cells", cells)
    ctrl_c_f = ctrl_cfg.get("friction")
    if ctrl_c_f is not None:
        if isinstance(ctrl_c_f, bool) or not isinstance(ctrl_c_f, (int, float)):
            raise ConfigError(f"{ctx}.controller: friction must be a number or null")
        ctrl_c_f = float(ctrl_c_f)

    model = saint_venant_model(c_f, gravity)
    bmaps = gate_boundary_maps(c_g)
    grid = Grid(length, cells)
    solver_cfg = solver_mod.SolverConfig(cfl=cfl)
    profile = steady_mod.solve_steady_profile(model, grid, q_star, set_point)
    disturbance = gate_head_signal(flow_signal, c_g)
    u_star = float(bmaps.beta(set_point, q_star))

    summary: list[tuple[str, object]] = [
        ("experiment", "single-pool"),
        ("cells", cells),
        ("cfl", float(cfl)),
        ("H_star_upstream", float(profile.H_star[0])),
        ("steady_gate_position", u_star),
    ]
    writers = [("steady_profile.csv", lambda p, pr=profile: steady_mod.write_profile_csv(pr, p))]

    def initial_state() -> FieldState:
        return FieldState(0.0, profile.H_star.copy(), np.full(grid.n_nodes, q_star))

    if "no-control" in runs:
        traj = solver_mod.simulate(
            model,
            bmaps,
            grid,
            solver_cfg,
            initial_state(),
            disturbance,
            Signal.constant(u_star),
            duration,
            cadence,
            set_point=set_point,
        )
        summary.append(("nocontrol_max_rise", float(np.max(traj.Y))))
        summary.append(("nocontrol_terminal_rise", float(traj.Y[-1])))
        writers.append(
            ("nocontrol_trajectory.csv", lambda p, tr=traj: solver_mod.write_trajectory_csv(tr, p))
        )

    if "controlled" in runs:
        ctrl_grid = grid if ctrl_cells == cells else Grid(length, ctrl_cells)
        ctrl_model = model if ctrl_c_f is None or ctrl_c_f == c_f else saint_venant_model(ctrl_c_f, gravity)
        if ctrl_model is model and ctrl_grid is grid:
            ctrl_profile = profile
        else:
            ctrl_profile = steady_mod.solve_steady_profile(ctrl_model, ctrl_grid, q_star, set_point)
        ctrl = ctrl_mod.FeedforwardController.from_steady_profile(ctrl_profile, bmaps, solver_cfg)
        loop = ctrl_mod.closed_run(
            model, bmaps, grid, solver_cfg, initial_state(), disturbance, ctrl, duration, cadence
        )
        summary.append(("controlled_max_abs_y", loop.max_abs_y))
        summary.append(("controlled_terminal_abs_y", loop.terminal_abs_y))
        writers.append(
            (
                "controlled_trajectory.csv",
                lambda p, tr=loop.plant: solver_mod.write_trajectory_csv(tr, p),
            )
        )
        writers.append(
            (
                "controller_trajectory.csv",
                lambda p, tr=loop.controller: ctrl_mod.write_controller_csv(tr, p),
            )
        )

    certificate = None
    if require_certificate:
        certificate = cert_mod.saint_venant_certificate(profile, c_g)
        summary.extend(_certificate_summary(certificate))
        writers.append(
            ("certificate.json", lambda p, c=certificate: cert_mod.write_certificate_json(c, p))
        )
    return ScenarioOutput(summary=summary, csv_writers=writers, certificate=certificate)


def _run_cascade(cfg: dict, overrides: dict, require_certificate: bool) -> ScenarioOutput:
    ctx = "cascade"
    _require_keys(cfg, _CASCADE_KEYS, ctx)
    pools = _integer(cfg, "pools", ctx)
    set_points = cfg["set_points"]
    if not isinstance(set_points, list) or len(set_points) != pools:
        raise ConfigError(f"{ctx}: set_points must list one level per pool")
    c_g = _number(cfg, "gate_coefficient", ctx, positive=True)
    flow_signal = parse_signal(cfg["disturbance_flow"], f"{ctx}.disturbance_flow")
    scenario = cascade_mod.CascadeScenario(
        n_pools=pools,
        set_points=tuple(float(v) for v in set_points),
        length=_number(cfg, "length_m", ctx, positive=True),
        c_f=_number(cfg, "friction", ctx),
        c_g=c_g,
        q_star=_number(cfg, "steady_flow", ctx, positive=True),
        disturbance=gate_head_signal(flow_signal, c_g),
        duration=_number(cfg, "duration", ctx, positive=True),
        gravity=_number(cfg, "gravity", ctx, positive=True) if "gravity" in cfg else 9.81,
        ctrl_c_f=(
            _number(cfg, "controller_friction", ctx) if "controller_friction" in cfg else None
        ),
        n_cells=overrides.get("cells") or _integer(cfg, "cells", ctx),
        cfl=overrides.get("cfl") or cfg.get("cfl", 0.9),
        cadence=_number(cfg, "cadence", ctx, positive=True),
    )
    result = cascade_mod.simulate_cascade(scenario)

    summary: list[tuple[str, object]] = [
        ("experiment", "cascade"),
        ("pools", pools),
        ("cells", scenario.n_cells),
    ]
    for i, traj in enumerate(result.pools):
        summary.append((f"pool{i + 1}_max_abs_y", traj.max_abs_y))
        summary.append((f"pool{i + 1}_flow_peak_to_peak", float(result.amplification.peak_to_peak[i])))
    for i, ratio in enumerate(result.amplification.ratios):
        summary.append((f"amplification_ratio_r{i + 1}", float(ratio)))

    writers = []
    for i, traj in enumerate(result.pools):
        writers.append(
            (
                f"pool_{i + 1}_trajectory.csv",
                lambda p, tr=traj: solver_mod.write_trajectory_csv(tr, p),
            )
        )
    for i, traj in enumerate(result.controllers):
        writers.append(
            (
                f"controller_{i + 1}_trajectory.csv",
                lambda p, tr=traj: ctrl_mod.write_controller_csv(tr, p),
            )
        )

    certificate = None
    if require_certificate:
        model = saint_venant_model(scenario.c_f, scenario.gravity)
        grid = Grid(scenario.length, scenario.n_cells)
        profile = steady_mod.solve_steady_profile(
            model, grid, scenario.q_star, scenario.set_points[0]
        )
        certificate = cert_mod.saint_venant_certificate(profile, scenario.c_g)
        summary.extend(_certificate_summary(certificate))
        writers.append(
            ("certificate.json", lambda p, c=certificate: cert_mod.write_certificate_json(c, p))
        )
    return ScenarioOutput(summary=summary, csv_writers=writers, certificate=certificate)


def _certificate_summary(cert: cert_mod.Certificate) -> list[tuple[str, object]]:
    rows = [
        ("certificate_passed", cert.passed),
        ("condition_a1", cert.a1),
        ("condition_a2", cert.a2),
        ("condition_a3", cert.a3),
        ("condition_b_interior", cert.b_interior),
        ("mu0", cert.mu0),
        ("mu1", cert.mu1),
        ("gamma0", cert.gamma0),
        ("gamma1", cert.gamma1),
        ("gamma2", cert.gamma2),
    ]
    if cert.beta_L is not None:
        rows.append(("beta_L", cert.beta_L))
        rows.append(("margin_2betaL_minus_VstarL", cert.margin_2betaL))
    if cert.epsilon_bound is not None:
        rows.append(("cascade_epsilon_bound", cert.epsilon_bound))
    return rows


def _run_certificate(cfg: dict, overrides: dict, require_certificate: bool) -> ScenarioOutput:
    ctx = "certificate"
    _require_keys(cfg, _CERTIFICATE_KEYS, ctx)
    gravity = _number(cfg, "gravity", ctx, positive=True) if "gravity" in cfg else 9.81
    model = saint_venant_model(_number(cfg, "friction", ctx), gravity)
    grid = Grid(_number(cfg, "length_m", ctx, positive=True), overrides.get("cells") or _integer(cfg, "cells", ctx))
    c_g = _number(cfg, "gate_coefficient", ctx, positive=True)
    profile = steady_mod.solve_steady_profile(
        model, grid, _number(cfg, "steady_flow", ctx, positive=True), _number(cfg, "set_point", ctx, positive=True)
    )
    weights_cfg = cfg.get("weights")
    if weights_cfg is None:
        weights = cert_mod.LyapunovWeights.saint_venant_default(grid.n_nodes)
    else:
        _require_keys(weights_cfg, {"p1": True, "p2": True}, f"{ctx}.weights")
        weights = cert_mod.LyapunovWeights.constant(
            _number(weights_cfg, "p1", ctx, positive=True),
            _number(weights_cfg, "p2", ctx, positive=True),
            grid.n_nodes,
        )
    bmaps = gate_boundary_maps(c_g)
    linsys = cert_mod.linearize(model, bmaps, profile)
    beta_L = cert_mod.downstream_gate_gain(profile.q_star, c_g)
    certificate = cert_mod.build_certificate(
        linsys,
        weights,
        beta_L=beta_L,
        v_star_L=float(profile.V_star[-1]),
        epsilon_bound=cert_mod.cascade_epsilon_bound(profile),
    )
    summary = [("experiment", "certificate"), ("cells", grid.n_cells)]
    summary.extend(_certificate_summary(certificate))
    summary.append(("min_interior_eigenvalue", float(np.min(certificate.per_node_min_eig))))
    if "epsilon" in cfg:
        eps = _number(cfg, "epsilon", ctx, positive=True)
        omega = cert_mod.geometric_pool_weights(3, eps)
        report = cert_mod.check_omega_matrices(profile, omega)
        summary.append(("epsilon", eps))
        summary.append(("omega_matrices_positive_definite", report.all_positive_definite))
    writers = [
        ("steady_profile.csv", lambda p, pr=profile: steady_mod.write_profile_csv(pr, p)),
        ("certificate.json", lambda p, c=certificate: cert_mod.write_certificate_json(c, p)),
        (
            "interior_min_eigenvalue.csv",
            lambda p, c=certificate, g=grid: cert_mod.write_interior_csv(c, g, p),
        ),
    ]
    return ScenarioOutput(summary=summary, csv_writers=writers, certificate=certificate)


def _run_linear(cfg: dict, overrides: dict, require_certificate: bool) -> ScenarioOutput:
    ctx = "linear-analysis"
    _require_keys(cfg, _LINEAR_KEYS, ctx)
    plant = linear_mod.LinearPlant(
        a=_number(cfg, "a", ctx, positive=True),
        b=_number(cfg, "b", ctx),
        gamma=_number(cfg, "gamma", ctx),
        length=_number(cfg, "length_m", ctx, positive=True),
        set_point=_number(cfg, "set_point", ctx),
        d0=_number(cfg, "disturbance_base", ctx),
    )
    w_min = _number(cfg, "omega_min", ctx, positive=True)
    w_max = _number(cfg, "omega_max", ctx, positive=True)
    count = _integer(cfg, "omega_count", ctx)
    if count < 2 or w_max <= w_min:
        raise ConfigError(f"{ctx}: need omega_max > omega_min and omega_count >= 2")
    omegas = np.logspace(np.log10(w_min), np.log10(w_max), count)

    residual = max(
        abs(
            transfer_product_residual(plant, 1j * w)
        )
        for w in omegas
    )
    summary: list[tuple[str, object]] = [
        ("experiment", "linear-analysis"),
        ("lambda1", plant.lambda1),
        ("lambda2", plant.lambda2),
        ("tau1", plant.tau1),
        ("tau2", plant.tau2),
        ("plant_poles_stable", linear_mod.plant_poles_stable(plant)),
        ("controller_poles_stable", linear_mod.controller_poles_stable(plant)),
        ("max_identity_residual", float(residual)),
    ]
    writers = [
        (
            f"transfer_{kind}.csv",
            lambda p, k=kind: linear_mod.write_frequency_csv(plant, k, omegas, p),
        )
        for kind in ("Po", "Pd", "Pc")
    ]

    if "time_domain" in cfg:
        td = cfg["time_domain"]
        _require_keys(td, _LINEAR_TD_KEYS, f"{ctx}.time_domain")
        cells = overrides.get("cells") or _integer(td, "cells", ctx)
        cfl = overrides.get("cfl") or td.get("cfl", 0.9)
        grid = Grid(plant.length, cells)
        model = linear_model(plant.a, plant.b)
        bmaps = linear_boundary_maps(plant.gamma)
        disturbance = parse_signal(td["disturbance"], f"{ctx}.time_domain.disturbance")
        ff = linear_mod.LinearFeedforward(plant)
        state = FieldState(
            0.0,
            np.full(grid.n_nodes, plant.set_point),
            np.full(grid.n_nodes, plant.d0),
        )
        traj = solver_mod.simulate(
            model,
            bmaps,
            grid,
            solver_mod.SolverConfig(cfl=cfl),
            state,
            disturbance,
            lambda t, d, dt: ff.step(d, t),
            _number(td, "duration", ctx, positive=True),
            _number(td, "cadence", ctx, positive=True),
            set_point=plant.set_point,
        )
        summary.append(("time_domain_max_abs_y", traj.max_abs_y))
        summary.append(("time_domain_terminal_abs_y", traj.terminal_abs_y))
        writers.append(
            ("linear_closedloop.csv", lambda p, tr=traj: solver_mod.write_trajectory_csv(tr, p))
        )
    return ScenarioOutput(summary=summary, csv_writers=writers)


def transfer_product_residual(plant: linear_mod.LinearPlant, s: complex) -> complex:
    """P_c(s) P_o(s) + P_d(s); identically zero for a correct implementation."""
    return (
        linear_mod.transfer_eval(plant, "Pc", s) * linear_mod.transfer_eval(plant, "Po", s)
        + linear_mod.transfer_eval(plant, "Pd", s)
    )


_RUNNERS = {
    "single-pool": _run_single_pool,
    "cascade": _run_cascade,
    "certificate": _run_certificate,
    "linear-analysis": _run_linear,
}


def emit_outputs(output: ScenarioOutput, out_dir) -> list[str]:
    """Write every artifact of one finished scenario; returns the file names.

    Files carry no timestamps and all floats use 12 significant digits, so
    identical results serialize byte-identically.  I/O failures surface
    with the offending path attached.
    """
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name, writer in output.csv_writers + [("summary.txt", None)]:
        path = target / name
        try:
            if writer is None:
                path.write_text(_summary_text(output.summary))
            else:
                writer(str(path))
        except OSError as exc:
            raise ChannelError(f"cannot write {path}: {exc}") from exc
        written.append(name)
    return written


def run_scenario(
    config_path: str,
    out_dir: str | None = None,
    cells: int | None = None,
    cfl: float | None = None,
    require_certificate: bool = False,
) -> int:
    """Execute one scenario; returns the process exit code.

    All results are computed before any file is written, so a failing run
    leaves no partial outputs.
    """
    try:
        cfg = load_config(config_path)
        overrides = {"cells": cells, "cfl": cfl}
        output = _RUNNERS[cfg["experiment"]](cfg, overrides, require_certificate)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChannelError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION

    target = Path(out_dir) if out_dir else Path.cwd() / "channelff-out" / Path(config_path).stem
    try:
        emit_outputs(output, target)
    except ChannelError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    sys.stdout.write(_summary_text(output.summary))

    if require_certificate and output.certificate is not None and not output.certificate.passed:
        print("certificate failed", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="channelff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one or more scenario configs")
    run.add_argument("configs", nargs="+", help="config paths or bundled config names")
    run.add_argument("--out", default=None, help="output directory (single config only)")
    run.add_argument("--cells", type=int, default=None, help="override the grid cell count")
    run.add_argument("--cfl", type=float, default=None, help="override the Courant number")
    run.add_argument("--require-certificate", action="store_true")
    run.add_argument("--jobs", type=int, default=1, help="parallel workers for multiple configs")
    args = parser.parse_args(argv)

    if args.out is not None and len(args.configs) > 1:
        print("--out is only valid with a single config", file=sys.stderr)
        return EXIT_CONFIG

    if len(args.configs) == 1 or args.jobs <= 1:
        status = EXIT_OK
        for cfg in args.configs:
            status = max(
                status,
                run_scenario(
                    cfg,
                    out_dir=args.out,
                    cells=args.cells,
                    cfl=args.cfl,
                    require_certificate=args.require_certificate,
                ),
            )
        return status

    with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
        futures = [
            pool.submit(
                run_scenario,
                cfg,
                None,
                args.cells,
                args.cfl,
                args.require_certificate,
            )
            for cfg in args.configs
        ]
        return max(f.result() for f in futures)


if __name__ == "__main__":
    sys.exit(main())
