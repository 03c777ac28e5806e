"""Nonlinear feedforward controller realized as a copy of the plant.

The controller integrates its own replica of the PDE, fed by the measured
disturbance at the upstream boundary and pinned to the set point by a
Dirichlet condition at the downstream one:

    H^_t + Q^_x = 0,   Q^_t + (f(H^,Q^))_x + g(H^,Q^) = 0,
    alpha(H^, Q^)(t,0) = D(t),   H^(t,L) = H*_L,

and emits the actuation U(t) = beta(H*_L, Q^(t,L)).  With identical
discretizations and initial states the closed loop cancels the
disturbance at the output exactly, step by step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import BoundaryMap, FieldState, Grid, PhysicalModel, Signal, eval_signal
from .solver import (
    BoundaryCondition,
    SolverConfig,
    Trajectory,
    _TrajectoryRecorder,
    advance,
    max_stable_dt,
)
from .steady import SteadyProfile


class FeedforwardController:
    """Internal plant copy with a downstream Dirichlet set point.

    The copy may run on its own grid and with its own model (the cascade
    filter overrides the friction coefficient); it is advanced by the
    caller's clock one step at a time.
    """

    def __init__(
        self,
        model: PhysicalModel,
        bmaps: BoundaryMap,
        grid: Grid,
        cfg: SolverConfig,
        set_point: float,
        initial_state: FieldState,
    ):
        if abs(float(initial_state.H[-1]) - set_point) > 1e-9 * max(1.0, abs(set_point)):
            raise ValueError("controller initial state must satisfy H(0, L) = set point")
        self.model = model
        self.bmaps = bmaps
        self.grid = grid
        self.cfg = cfg
        self.set_point = float(set_point)
        self.state = initial_state.copy()
        self.last_u = float(bmaps.beta(self.state.H[-1], self.state.Q[-1]))

    @classmethod
    def from_steady_profile(
        cls, profile: SteadyProfile, bmaps: BoundaryMap, cfg: SolverConfig
    ) -> "FeedforwardController":
        """Start the copy at rest on a steady profile.

        The profile must belong to the controller's own model: a friction
        filter (c^_f != c_f) therefore initializes from the profile solved
        with the overestimated coefficient, which keeps the copy free of
        internal startup transients.
        """
        state = FieldState(
            0.0, profile.H_star.copy(), np.full(profile.grid.n_nodes, profile.q_star)
        )
        return cls(
            model=profile.model,
            bmaps=bmaps,
            grid=profile.grid,
            cfg=cfg,
            set_point=profile.set_point,
            initial_state=state,
        )

    def stable_dt(self) -> float:
        return max_stable_dt(self.state, self.model, self.grid, self.cfg.cfl)

    def step(self, d_value: float, dt: float) -> float:
        """Advance the copy by dt under the measured disturbance; return U."""
        self.state = advance(
            self.state,
            self.model,
            self.bmaps,
            BoundaryCondition("alpha", d_value),
            BoundaryCondition("dirichlet_h", self.set_point),
            self.grid,
            self.cfg,
            dt,
        )
        self.last_u = float(self.bmaps.beta(self.set_point, self.state.Q[-1]))
        return self.last_u


def controller_step(ctrl: FeedforwardController, d_value: float, dt: float) -> float:
    """Functional alias of :meth:`FeedforwardController.step`."""
    return ctrl.step(d_value, dt)


@dataclass
class ClosedLoopResult:
    """Plant and controller trajectories of one closed-loop run."""

    plant: Trajectory
    controller: Trajectory
    l2_distance: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def max_abs_y(self) -> float:
        return self.plant.max_abs_y

    @property
    def terminal_abs_y(self) -> float:
        return self.plant.terminal_abs_y


def _state_l2_distance(
    plant_state: FieldState, plant_grid: Grid, ctrl_state: FieldState, ctrl_grid: Grid
) -> float:
    """L2 norm of (H - H^, Q - Q^); the copy is interpolated if grids differ."""
    x = plant_grid.x
    if ctrl_grid.n_nodes == plant_grid.n_nodes:
        dh = plant_state.H - ctrl_state.H
        dq = plant_state.Q - ctrl_state.Q
    else:
        xc = ctrl_grid.x
        dh = plant_state.H - np.interp(x, xc, ctrl_state.H)
        dq = plant_state.Q - np.interp(x, xc, ctrl_state.Q)
    return float(np.sqrt(np.trapezoid(dh * dh + dq * dq, x)))


def closed_run(
    model: PhysicalModel,
    bmaps: BoundaryMap,
    grid: Grid,
    cfg: SolverConfig,
    initial_state: FieldState,
    disturbance: Signal,
    ctrl: FeedforwardController,
    duration: float,
    cadence: float | None = None,
) -> ClosedLoopResult:
    """Run plant and controller in lockstep on a shared clock.

    Every step uses the common dt = min of the two CFL bounds, so matched
    discretizations evolve identically and the exact-cancellation property
    holds discretely.  The plant's downstream actuation is the controller
    output of the same step.
    """
    state = initial_state
    set_point = ctrl.set_point
    rec = _TrajectoryRecorder(set_point, state.t, duration, cadence)
    ctrl_rec = _TrajectoryRecorder(set_point, state.t, duration, cadence)
    d0 = eval_signal(disturbance, state.t)
    rec.record_step(state, d0, float(bmaps.beta(state.H[-1], state.Q[-1])))
    ctrl_rec.record_step(ctrl.state, d0, ctrl.last_u)
    distances = [_state_l2_distance(state, grid, ctrl.state, ctrl.grid)]

    t0 = state.t
    eps = 1e-9 * max(duration, 1.0)
    while state.t - t0 < duration - eps:
        dt = min(
            max_stable_dt(state, model, grid, cfg.cfl),
            ctrl.stable_dt(),
            duration - (state.t - t0),
        )
        t_new = state.t + dt
        d_new = eval_signal(disturbance, t_new)
        rec.record_samples(state, t_new)
        ctrl_rec.record_samples(ctrl.state, t_new)
        u_new = ctrl.step(d_new, dt)
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
        ctrl_rec.record_step(ctrl.state, d_new, u_new)
        distances.append(_state_l2_distance(state, grid, ctrl.state, ctrl.grid))
    rec.record_samples(state, None)
    ctrl_rec.record_samples(ctrl.state, None)
    return ClosedLoopResult(
        plant=rec.finish(),
        controller=ctrl_rec.finish(),
        l2_distance=np.array(distances),
    )


def write_controller_csv(traj: Trajectory, path) -> None:
    """Controller trajectory CSV: (t, H_hat_at_L, Q_hat_at_L, U, D)."""
    idx = np.searchsorted(traj.times, traj.sample_times + 1e-12, side="right") - 1
    idx = np.clip(idx, 0, len(traj.times) - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "H_hat_at_L", "Q_hat_at_L", "U", "D"])
        for st, i in zip(traj.sample_times, idx):
            writer.writerow(
                [
                    f"{st:.12g}",
                    f"{traj.H_at_L[i]:.12g}",
                    f"{traj.Q_at_L[i]:.12g}",
                    f"{traj.U[i]:.12g}",
                    f"{traj.D[i]:.12g}",
                ]
            )
