"""Shared fixtures: the heavyweight reference runs are computed once per session."""

from __future__ import annotations

import time
from types import SimpleNamespace

import numpy as np
import pytest

import channelff as cf

# paper-scale single pool: L = 5000 m, c_f = 0.01, c_g = 2, Q* = 2, H*_L = 5
S5 = SimpleNamespace(
    length=5000.0,
    cells=200,
    c_f=0.01,
    c_g=2.0,
    gravity=9.81,
    q_star=2.0,
    set_point=5.0,
    duration=10800.0,
)

# two-pool cascade: c_f = 0.008, set points 5 / 4.9, pulse 2 -> 2.5 -> 2.2
S6 = SimpleNamespace(
    length=5000.0,
    cells=200,
    c_f=0.008,
    c_g=2.0,
    gravity=9.81,
    q_star=2.0,
    set_points=(5.0, 4.9),
    duration=7200.0,
    filtered_friction=0.024,
)


@pytest.fixture(scope="session")
def sv_model():
    return cf.saint_venant_model(S5.c_f, S5.gravity)


@pytest.fixture(scope="session")
def gates():
    return cf.gate_boundary_maps(S5.c_g)


@pytest.fixture(scope="session")
def grid200():
    return cf.Grid(S5.length, S5.cells)


@pytest.fixture(scope="session")
def solver_cfg():
    return cf.SolverConfig(cfl=0.9)


@pytest.fixture(scope="session")
def profile_s5(sv_model, grid200):
    return cf.solve_steady_profile(sv_model, grid200, S5.q_star, S5.set_point)


@pytest.fixture(scope="session")
def s5_disturbance():
    flow = cf.Signal.smooth_step(2.0, 2.5, 900.0, 120.0)
    return cf.gate_head_signal(flow, S5.c_g)


def _s5_initial_state(profile):
    return cf.FieldState(0.0, profile.H_star.copy(), np.full(profile.grid.n_nodes, S5.q_star))


@pytest.fixture(scope="session")
def s5_nocontrol(sv_model, gates, grid200, solver_cfg, profile_s5, s5_disturbance):
    """Open-loop section-5 run: gate frozen at U*, inflow steps 2 -> 2.5."""
    u_star = float(gates.beta(S5.set_point, S5.q_star))
    start = time.perf_counter()
    traj = cf.simulate(
        sv_model,
        gates,
        grid200,
        solver_cfg,
        _s5_initial_state(profile_s5),
        s5_disturbance,
        cf.Signal.constant(u_star),
        S5.duration,
        cadence=60.0,
        set_point=S5.set_point,
    )
    walltime = time.perf_counter() - start
    return SimpleNamespace(trajectory=traj, walltime=walltime, u_star=u_star)


@pytest.fixture(scope="session")
def s5_controlled(sv_model, gates, grid200, solver_cfg, profile_s5, s5_disturbance):
    """Closed loop with matched plant/controller discretization and states."""
    ctrl = cf.FeedforwardController.from_steady_profile(profile_s5, gates, solver_cfg)
    start = time.perf_counter()
    loop = cf.closed_run(
        sv_model,
        gates,
        grid200,
        solver_cfg,
        _s5_initial_state(profile_s5),
        s5_disturbance,
        ctrl,
        S5.duration,
        cadence=60.0,
    )
    walltime = time.perf_counter() - start
    return SimpleNamespace(loop=loop, walltime=walltime)


@pytest.fixture(scope="session")
def s5_controlled_halfres(sv_model, gates, grid200, solver_cfg, profile_s5, s5_disturbance):
    """Same closed loop with the controller copy at half resolution."""
    grid100 = cf.Grid(S5.length, 100)
    profile100 = cf.solve_steady_profile(sv_model, grid100, S5.q_star, S5.set_point)
    ctrl = cf.FeedforwardController.from_steady_profile(profile100, gates, solver_cfg)
    loop = cf.closed_run(
        sv_model,
        gates,
        grid200,
        solver_cfg,
        _s5_initial_state(profile_s5),
        s5_disturbance,
        ctrl,
        S5.duration,
        cadence=60.0,
    )
    return SimpleNamespace(loop=loop)


@pytest.fixture(scope="session")
def theorem2_run(sv_model, gates, grid200, solver_cfg, profile_s5, s5_disturbance):
    """Controller started 2 cm high (except the pinned Dirichlet node)."""
    n = grid200.n_nodes
    perturbed_h = profile_s5.H_star.copy()
    perturbed_h[:-1] += 0.02  # H^(0, L) must stay at the set point
    ctrl = cf.FeedforwardController(
        sv_model,
        gates,
        grid200,
        solver_cfg,
        S5.set_point,
        cf.FieldState(0.0, perturbed_h, np.full(n, S5.q_star)),
    )
    loop = cf.closed_run(
        sv_model,
        gates,
        grid200,
        solver_cfg,
        _s5_initial_state(profile_s5),
        s5_disturbance,
        ctrl,
        S5.duration,
        cadence=60.0,
    )
    return SimpleNamespace(loop=loop)


def _cascade_scenario(ctrl_c_f):
    flow_pulse = cf.Signal.pulse(2.0, 2.5, 2.2, 900.0, 120.0, 240.0, 240.0)
    return cf.CascadeScenario(
        n_pools=2,
        set_points=S6.set_points,
        length=S6.length,
        c_f=S6.c_f,
        c_g=S6.c_g,
        q_star=S6.q_star,
        disturbance=cf.gate_head_signal(flow_pulse, S6.c_g),
        duration=S6.duration,
        gravity=S6.gravity,
        ctrl_c_f=ctrl_c_f,
        n_cells=S6.cells,
        cfl=0.9,
        cadence=60.0,
    )


@pytest.fixture(scope="session")
def cascade_nominal():
    start = time.perf_counter()
    result = cf.simulate_cascade(_cascade_scenario(None))
    walltime = time.perf_counter() - start
    return SimpleNamespace(result=result, walltime=walltime)


@pytest.fixture(scope="session")
def cascade_filtered():
    start = time.perf_counter()
    result = cf.simulate_cascade(_cascade_scenario(S6.filtered_friction))
    walltime = time.perf_counter() - start
    return SimpleNamespace(result=result, walltime=walltime)


# constant-coefficient plant shared by the linear-module tests:
# a = 2, b = 1 gives lambda1 = 2, lambda2 = 1, tau1 = 50, tau = 150
@pytest.fixture(scope="session")
def linear_plant():
    return cf.LinearPlant(a=2.0, b=1.0, gamma=1.0, length=100.0, set_point=2.0, d0=1.0)


@pytest.fixture(scope="session")
def linear_pulse_run(linear_plant):
    """Open-loop pulse through the linear plant on 200 cells."""
    plant = linear_plant
    model = cf.linear_model(plant.a, plant.b)
    bmaps = cf.linear_boundary_maps(plant.gamma)
    grid = cf.Grid(plant.length, 200)
    state0 = cf.uniform_state(grid, plant.set_point, plant.d0)
    pulse = cf.Signal.pulse(plant.d0, plant.d0 + 0.2, plant.d0, 10.0, 20.0, 40.0, 20.0)
    u_star = float(bmaps.beta(plant.set_point, plant.d0))
    traj = cf.simulate(
        model,
        bmaps,
        grid,
        cf.SolverConfig(cfl=0.9),
        state0,
        pulse,
        cf.Signal.constant(u_star),
        130.0,
        cadence=10.0,
        set_point=plant.set_point,
    )
    return SimpleNamespace(trajectory=traj, grid=grid, plant=plant, pulse=pulse)


@pytest.fixture(scope="session")
def linear_closedloop_run(linear_plant):
    """Delay-recursion feedforward closing the loop around the linear plant."""
    plant = linear_plant
    model = cf.linear_model(plant.a, plant.b)
    bmaps = cf.linear_boundary_maps(plant.gamma)
    grid = cf.Grid(plant.length, 200)
    state0 = cf.uniform_state(grid, plant.set_point, plant.d0)
    step = cf.Signal.smooth_step(plant.d0, plant.d0 + 0.2, 50.0, 30.0)
    ff = cf.LinearFeedforward(plant)
    traj = cf.simulate(
        model,
        bmaps,
        grid,
        cf.SolverConfig(cfl=0.9),
        state0,
        step,
        lambda t, d, dt: ff.step(d, t),
        1500.0,
        cadence=30.0,
        set_point=plant.set_point,
    )
    return SimpleNamespace(trajectory=traj, amplitude=0.2, ramp_end=80.0)
