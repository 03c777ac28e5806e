"""Feedforward boundary control of 2x2 hyperbolic systems.

Library layout:

- :mod:`channelff.model` -- plants (Saint-Venant, linear), gates, grids,
  states and drive signals
- :mod:`channelff.linear` -- frequency-domain design and the delay-recursion
  feedforward law for the constant-coefficient case
- :mod:`channelff.steady` -- non-uniform steady profiles
- :mod:`channelff.solver` -- explicit two-step Lax-Wendroff integration with
  characteristic boundary closure
- :mod:`channelff.controller` -- the plant-copy feedforward controller
- :mod:`channelff.certificate` -- numerical Lyapunov stability certificates
- :mod:`channelff.cascade` -- serial pool cascades with per-pool controllers
- :mod:`channelff.cli` -- scenario-driven command line front end
"""

from .errors import (
    BoundaryDomainError,
    CflViolation,
    ChannelError,
    ConfigError,
    CriticalFlow,
    DepthUnderflow,
    NewtonDivergence,
    NonHyperbolicError,
    NonPositiveDepth,
    PoleProximityError,
)
from .model import (
    BoundaryMap,
    FieldState,
    GateBoundaryMap,
    Grid,
    LinearModel,
    PhysicalModel,
    SaintVenantModel,
    Signal,
    eval_signal,
    gate_boundary_maps,
    gate_head_signal,
    linear_boundary_maps,
    linear_model,
    saint_venant_model,
    uniform_state,
)
from .linear import (
    DelayLine,
    LinearFeedforward,
    LinearPlant,
    characteristic_speeds,
    controller_poles_stable,
    plant_poles_stable,
    riemann_forward,
    riemann_inverse,
    transfer_eval,
)
from .steady import SteadyProfile, solve_steady_profile, subcritical_check
from .solver import (
    BoundaryCondition,
    SolverConfig,
    Trajectory,
    advance,
    max_stable_dt,
    simulate,
)
from .controller import ClosedLoopResult, FeedforwardController, closed_run, controller_step
from .certificate import (
    Certificate,
    LinearizedSystem,
    LyapunovWeights,
    cascade_epsilon_bound,
    check_boundary_conditions,
    check_interior_condition_b,
    check_omega_matrices,
    downstream_gate_gain,
    geometric_pool_weights,
    linearize,
    saint_venant_certificate,
)
from .cascade import (
    AmplificationReport,
    CascadeResult,
    CascadeScenario,
    amplification_metric,
    simulate_cascade,
)

__version__ = "0.1.0"
