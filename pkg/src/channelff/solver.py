"""Explicit time integration of the nonlinear plant.

Interior nodes advance with the two-step (Richtmyer) Lax-Wendroff scheme
applied to the conservative pair (H, Q) with flux (Q, f(H,Q)); the
derivative-free source (0, g(H,Q)) is applied at both the half and the
full step.  Each boundary node is closed by pairing the physical boundary
relation with the outgoing Riemann-invariant value transported from the
interior along the local characteristic, solved with a damped Newton
iteration.  Subcritical flow guarantees exactly one outgoing invariant
per boundary.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import (
    BoundaryDomainError,
    CflViolation,
    DepthUnderflow,
    NewtonDivergence,
    NonHyperbolicError,
)
from .model import BoundaryMap, FieldState, Grid, PhysicalModel, Signal, eval_signal


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of the explicit scheme."""

    cfl: float = 0.9
    newton_tol: float = 1e-10
    newton_max_iter: int = 50

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must lie in (0, 1]")


#: Boundary condition kinds accepted by :func:`advance`.
#:   alpha        -- alpha(H, Q) = value   (upstream disturbance)
#:   beta         -- beta(H, Q) = value    (downstream actuation)
#:   dirichlet_h  -- H = value             (controller copy, x = L)
#:   dirichlet_q  -- Q = value             (cascade junction, x = 0)
_BC_KINDS = ("alpha", "beta", "dirichlet_h", "dirichlet_q")


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in _BC_KINDS:
            raise ValueError(f"kind must be one of {_BC_KINDS}")


def _wave_speeds(model: PhysicalModel, H, Q):
    a = np.asarray(model.flux_dh(H, Q), dtype=float)
    b = np.asarray(model.flux_dq(H, Q), dtype=float)
    disc = b * b + 4.0 * a
    if np.any(disc <= 0.0):
        raise NonHyperbolicError("state lost hyperbolicity")
    root = np.sqrt(disc)
    return 0.5 * (b + root), 0.5 * (root - b)


def max_stable_dt(state: FieldState, model: PhysicalModel, grid: Grid, cfl: float) -> float:
    """Largest explicit step: cfl * dx / max over nodes of max(l1, l2)."""
    lam1, lam2 = _wave_speeds(model, state.H, state.Q)
    speed = float(np.max(np.maximum(np.abs(lam1), np.abs(lam2))))
    if speed <= 0.0:
        raise NonHyperbolicError("no propagation speed at the current state")
    return cfl * grid.dx / speed


def _boundary_relation(bmaps: BoundaryMap, bc: BoundaryCondition):
    """Residual and gradient of the boundary relation for the Newton solve."""
    if bc.kind == "alpha":
        return (
            lambda H, Q: float(bmaps.alpha(H, Q)) - bc.value,
            lambda H, Q: (float(bmaps.alpha_dh(H, Q)), float(bmaps.alpha_dq(H, Q))),
        )
    if bc.kind == "beta":
        return (
            lambda H, Q: float(bmaps.beta(H, Q)) - bc.value,
            lambda H, Q: (float(bmaps.beta_dh(H, Q)), float(bmaps.beta_dq(H, Q))),
        )
    if bc.kind == "dirichlet_h":
        return (lambda H, Q: H - bc.value, lambda H, Q: (1.0, 0.0))
    return (lambda H, Q: Q - bc.value, lambda H, Q: (0.0, 1.0))


def _solve_boundary(
    side: str,
    bc: BoundaryCondition,
    model: PhysicalModel,
    bmaps: BoundaryMap,
    H_b: float,
    Q_b: float,
    H_nb: float,
    Q_nb: float,
    dx: float,
    dt: float,
    cfg: SolverConfig,
) -> tuple[float, float]:
    """Close one boundary node at the new time level.

    The outgoing characteristic (speed -l2 at x=0, +l1 at x=L) is traced
    back to its foot inside the first cell; the transported invariant,
    corrected by the source over dt, supplies the second scalar equation
    next to the boundary relation.
    """
    lam1_b, lam2_b = _wave_speeds(model, H_b, Q_b)
    speed = float(lam2_b if side == "left" else lam1_b)
    theta = min(max(speed * dt / dx, 0.0), 1.0)
    # one fixed-point refinement of the foot location
    for _ in range(2):
        H_f = H_b + theta * (H_nb - H_b)
        Q_f = Q_b + theta * (Q_nb - Q_b)
        lam1_f, lam2_f = _wave_speeds(model, H_f, Q_f)
        speed = float(lam2_f if side == "left" else lam1_f)
        theta = min(max(speed * dt / dx, 0.0), 1.0)

    g_f = float(model.source(H_f, Q_f))
    if side == "left":
        coef_h = -float(lam1_f)  # left eigenvector (-l1, 1) of the -l2 family
    else:
        coef_h = float(lam2_f)  # left eigenvector (l2, 1) of the +l1 family
    rhs_inv = coef_h * H_f + Q_f - dt * g_f

    rel, rel_grad = _boundary_relation(bmaps, bc)
    scale_rel = max(1.0, abs(bc.value))
    scale_inv = max(1.0, abs(rhs_inv))

    H, Q = float(H_b), float(Q_b)

    def residual(Hv, Qv):
        r1 = rel(Hv, Qv)
        r2 = coef_h * Hv + Qv - rhs_inv
        return r1, r2, max(abs(r1) / scale_rel, abs(r2) / scale_inv)

    try:
        r1, r2, norm = residual(H, Q)
    except (DepthUnderflow, BoundaryDomainError) as exc:
        raise NewtonDivergence(f"boundary closure start invalid: {exc}") from exc

    for _ in range(cfg.newton_max_iter):
        if norm < cfg.newton_tol:
            return H, Q
        j11, j12 = rel_grad(H, Q)
        det = j11 * 1.0 - j12 * coef_h
        if det == 0.0 or not np.isfinite(det):
            raise NewtonDivergence("singular boundary Jacobian")
        dH = -(r1 * 1.0 - j12 * r2) / det
        dQ = -(j11 * r2 - coef_h * r1) / det
        step = 1.0
        for _ in range(30):
            H_new, Q_new = H + step * dH, Q + step * dQ
            try:
                n1, n2, n_norm = residual(H_new, Q_new)
            except (DepthUnderflow, BoundaryDomainError):
                step *= 0.5
                continue
            if n_norm < norm or step < 1e-6:
                H, Q, r1, r2, norm = H_new, Q_new, n1, n2, n_norm
                break
            step *= 0.5
        else:
            raise NewtonDivergence("boundary Newton could not make progress")
    if norm < cfg.newton_tol:
        return H, Q
    raise NewtonDivergence(f"boundary Newton stalled at residual {norm:.3e}")


def advance(
    state: FieldState,
    model: PhysicalModel,
    bmaps: BoundaryMap,
    left_bc: BoundaryCondition,
    right_bc: BoundaryCondition,
    grid: Grid,
    cfg: SolverConfig,
    dt: float,
) -> FieldState:
    """One explicit step of size dt; raises CflViolation if dt is too large."""
    bound = max_stable_dt(state, model, grid, cfg.cfl)
    if dt > bound * (1.0 + 1e-12):
        raise CflViolation(f"dt = {dt:.6g} exceeds stable step {bound:.6g}")

    H, Q = state.H, state.Q
    dx = grid.dx
    r = dt / dx

    F = np.asarray(model.flux(H, Q), dtype=float)
    H_avg = 0.5 * (H[:-1] + H[1:])
    Q_avg = 0.5 * (Q[:-1] + Q[1:])
    g_half = np.asarray(model.source(H_avg, Q_avg), dtype=float)

    H_mid = H_avg - 0.5 * r * (Q[1:] - Q[:-1])
    Q_mid = Q_avg - 0.5 * r * (F[1:] - F[:-1]) - 0.5 * dt * g_half
    if np.any(H_mid <= 0.0):
        raise DepthUnderflow("half-step state lost positivity")

    F_mid = np.asarray(model.flux(H_mid, Q_mid), dtype=float)
    g_full = np.asarray(
        model.source(0.5 * (H_mid[:-1] + H_mid[1:]), 0.5 * (Q_mid[:-1] + Q_mid[1:])),
        dtype=float,
    )

    H_new = np.empty_like(H)
    Q_new = np.empty_like(Q)
    H_new[1:-1] = H[1:-1] - r * (Q_mid[1:] - Q_mid[:-1])
    Q_new[1:-1] = Q[1:-1] - r * (F_mid[1:] - F_mid[:-1]) - dt * g_full

    H_new[0], Q_new[0] = _solve_boundary(
        "left", left_bc, model, bmaps, H[0], Q[0], H[1], Q[1], dx, dt, cfg
    )
    H_new[-1], Q_new[-1] = _solve_boundary(
        "right", right_bc, model, bmaps, H[-1], Q[-1], H[-2], Q[-2], dx, dt, cfg
    )

    if np.any(H_new <= 0.0):
        raise DepthUnderflow("depth became non-positive during the step")
    return FieldState(state.t + dt, H_new, Q_new)


@dataclass
class Trajectory:
    """Per-step boundary series plus cadence snapshots of the full fields."""

    set_point: float
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    H_at_0: np.ndarray = field(default_factory=lambda: np.empty(0))
    H_at_L: np.ndarray = field(default_factory=lambda: np.empty(0))
    Q_at_0: np.ndarray = field(default_factory=lambda: np.empty(0))
    Q_at_L: np.ndarray = field(default_factory=lambda: np.empty(0))
    U: np.ndarray = field(default_factory=lambda: np.empty(0))
    D: np.ndarray = field(default_factory=lambda: np.empty(0))
    sample_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    samples: list[FieldState] = field(default_factory=list)

    @property
    def Y(self) -> np.ndarray:
        return self.H_at_L - self.set_point

    @property
    def max_abs_y(self) -> float:
        return float(np.max(np.abs(self.Y)))

    @property
    def terminal_abs_y(self) -> float:
        return float(abs(self.Y[-1]))


class _TrajectoryRecorder:
    """Accumulates per-step rows and lag-free cadence snapshots."""

    def __init__(self, set_point: float, t0: float, duration: float, cadence: float | None):
        self.set_point = set_point
        self.rows: list[tuple[float, float, float, float, float, float, float]] = []
        self.sample_times: list[float] = []
        self.samples: list[FieldState] = []
        if cadence is not None:
            if cadence <= 0.0:
                raise ValueError("cadence must be positive")
            count = int(math.floor(duration / cadence + 1e-9)) + 1
            self._pending = [t0 + k * cadence for k in range(count)]
        else:
            self._pending = []

    def record_step(self, state: FieldState, d_value: float, u_value: float) -> None:
        self.rows.append(
            (state.t, state.H[0], state.H[-1], state.Q[0], state.Q[-1], u_value, d_value)
        )

    def record_samples(self, state: FieldState, t_next: float | None) -> None:
        # snapshot carries the last completed step <= sample time
        while self._pending and (t_next is None or self._pending[0] < t_next - 1e-12):
            self.sample_times.append(self._pending.pop(0))
            self.samples.append(state.copy())

    def finish(self) -> Trajectory:
        arr = np.array(self.rows, dtype=float)
        return Trajectory(
            set_point=self.set_point,
            times=arr[:, 0],
            H_at_0=arr[:, 1],
            H_at_L=arr[:, 2],
            Q_at_0=arr[:, 3],
            Q_at_L=arr[:, 4],
            U=arr[:, 5],
            D=arr[:, 6],
            sample_times=np.array(self.sample_times),
            samples=self.samples,
        )


ControlSource = Union[Signal, Callable[[float, float, float], float]]


def _control_value(control: ControlSource, t_new: float, d_new: float, dt: float) -> float:
    if isinstance(control, Signal):
        return eval_signal(control, t_new)
    return float(control(t_new, d_new, dt))


def simulate(
    model: PhysicalModel,
    bmaps: BoundaryMap,
    grid: Grid,
    cfg: SolverConfig,
    initial_state: FieldState,
    disturbance: Signal,
    control: ControlSource,
    duration: float,
    cadence: float | None = None,
    set_point: float | None = None,
) -> Trajectory:
    """Drive the plant from its initial state over ``duration`` seconds.

    The time step is recomputed from the CFL bound every step.  ``control``
    is either a fixed Signal (open loop) or a callable
    ``(t_new, d_new, dt) -> U`` evaluated once per step.  Cadence snapshots
    record the last completed step at or before each sample time.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    state = initial_state
    sp = state.H[-1] if set_point is None else set_point
    rec = _TrajectoryRecorder(float(sp), state.t, duration, cadence)
    rec.record_step(state, eval_signal(disturbance, state.t), float(bmaps.beta(state.H[-1], state.Q[-1])))

    t0 = state.t
    eps = 1e-9 * max(duration, 1.0)
    while state.t - t0 < duration - eps:
        dt = min(max_stable_dt(state, model, grid, cfg.cfl), duration - (state.t - t0))
        t_new = state.t + dt
        d_new = eval_signal(disturbance, t_new)
        u_new = _control_value(control, t_new, d_new, dt)
        rec.record_samples(state, t_new)
        state = advance(
            state,
            model,
            bmaps,
            BoundaryCondition("alpha", d_new),
            BoundaryCondition("beta", u_new),
            grid,
            cfg,
            dt,
        )
        rec.record_step(state, d_new, u_new)
    rec.record_samples(state, None)
    return rec.finish()


def run_mass_audit(
    model: PhysicalModel,
    bmaps: BoundaryMap,
    grid: Grid,
    cfg: SolverConfig,
    initial_state: FieldState,
    disturbance: Signal,
    control: ControlSource,
    duration: float,
) -> np.ndarray:
    """Rerun a scenario collecting the per-step mass-balance residual.

    Residual per step: trapezoidal mass increment minus dt times the
    time-centered boundary flux difference.
    """
    state = initial_state
    w = np.full(grid.n_nodes, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    residuals = []
    t0 = state.t
    eps = 1e-9 * max(duration, 1.0)
    while state.t - t0 < duration - eps:
        dt = min(max_stable_dt(state, model, grid, cfg.cfl), duration - (state.t - t0))
        t_new = state.t + dt
        d_new = eval_signal(disturbance, t_new)
        u_new = _control_value(control, t_new, d_new, dt)
        new_state = advance(
            state,
            model,
            bmaps,
            BoundaryCondition("alpha", d_new),
            BoundaryCondition("beta", u_new),
            grid,
            cfg,
            dt,
        )
        dm = float(np.dot(w, new_state.H - state.H))
        q_in = 0.5 * (state.Q[0] + new_state.Q[0])
        q_out = 0.5 * (state.Q[-1] + new_state.Q[-1])
        residuals.append(dm / dt - (q_in - q_out))
        state = new_state
    return np.array(residuals)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Emit (t, H_at_L, Q_at_0, Q_at_L, U, D, Y) rows at the cadence times."""
    idx = np.searchsorted(traj.times, traj.sample_times + 1e-12, side="right") - 1
    idx = np.clip(idx, 0, len(traj.times) - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "H_at_L", "Q_at_0", "Q_at_L", "U", "D", "Y"])
        for st, i in zip(traj.sample_times, idx):
            writer.writerow(
                [
                    f"{st:.12g}",
                    f"{traj.H_at_L[i]:.12g}",
                    f"{traj.Q_at_0[i]:.12g}",
                    f"{traj.Q_at_L[i]:.12g}",
                    f"{traj.U[i]:.12g}",
                    f"{traj.D[i]:.12g}",
                    f"{traj.Y[i]:.12g}",
                ]
            )


def write_snapshot_csv(traj: Trajectory, grid: Grid, directory, stem: str) -> list[str]:
    """Emit one (x, H, Q) file per cadence snapshot; returns the file names."""
    names = []
    x = grid.x
    for k, (st, snap) in enumerate(zip(traj.sample_times, traj.samples)):
        name = f"{stem}_snapshot_{k:04d}.csv"
        names.append(name)
        with open(f"{directory}/{name}", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"# t = {st:.12g}"])
            writer.writerow(["x", "H", "Q"])
            for j in range(grid.n_nodes):
                writer.writerow([f"{x[j]:.12g}", f"{snap.H[j]:.12g}", f"{snap.Q[j]:.12g}"])
    return names
