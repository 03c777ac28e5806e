"""Plant definitions for 2x2 hyperbolic balance laws.

The physical system is

    H_t + Q_x = 0
    Q_t + (f(H,Q))_x + g(H,Q) = 0

on x in [0, L], closed by two scalar boundary relations

    alpha(H(t,0), Q(t,0)) = D(t)      (measured disturbance, upstream)
    beta(H(t,L), Q(t,L))  = U(t)      (control actuation, downstream)

This module holds the abstract flux/source and boundary-map containers,
the concrete shallow-water (Saint-Venant) and overshot-gate instances,
the constant-coefficient linear instance, plus grids, field states and
time signals used to drive experiments.

All callables are vectorized: they accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BoundaryDomainError, DepthUnderflow, NonHyperbolicError

GRAVITY_DEFAULT = 9.81

ArrayLike = float | np.ndarray


@dataclass(frozen=True)
class PhysicalModel:
    """Flux/source pair (f, g) with analytic partial derivatives.

    ``flux_dh`` / ``flux_dq`` are a = df/dH and b = df/dQ; ``source_dh`` /
    ``source_dq`` are the partials of the source term.  Analytic partials
    are part of the contract; finite differences are test oracles only.
    """

    flux: Callable[[ArrayLike, ArrayLike], ArrayLike]
    source: Callable[[ArrayLike, ArrayLike], ArrayLike]
    flux_dh: Callable[[ArrayLike, ArrayLike], ArrayLike]
    flux_dq: Callable[[ArrayLike, ArrayLike], ArrayLike]
    source_dh: Callable[[ArrayLike, ArrayLike], ArrayLike]
    source_dq: Callable[[ArrayLike, ArrayLike], ArrayLike]

    def hyperbolicity(self, H: ArrayLike, Q: ArrayLike) -> ArrayLike:
        """Discriminant b^2 + 4a; must be positive at every valid state."""
        return self.flux_dq(H, Q) ** 2 + 4.0 * self.flux_dh(H, Q)

    def check_hyperbolic(self, H: ArrayLike, Q: ArrayLike) -> None:
        if np.any(np.asarray(self.hyperbolicity(H, Q)) <= 0.0):
            raise NonHyperbolicError("b^2 + 4a <= 0 at an evaluated state")


@dataclass(frozen=True)
class SaintVenantModel(PhysicalModel):
    """Saint-Venant instance; keeps its physical coefficients around."""

    c_f: float = 0.0
    gravity: float = GRAVITY_DEFAULT


@dataclass(frozen=True)
class LinearModel(PhysicalModel):
    """Constant-coefficient conservation law f = a H + b Q, g = 0."""

    a: float = 1.0
    b: float = 0.0


@dataclass(frozen=True)
class BoundaryMap:
    """Boundary relation pair (alpha, beta) with analytic partials."""

    alpha: Callable[[ArrayLike, ArrayLike], ArrayLike]
    beta: Callable[[ArrayLike, ArrayLike], ArrayLike]
    alpha_dh: Callable[[ArrayLike, ArrayLike], ArrayLike]
    alpha_dq: Callable[[ArrayLike, ArrayLike], ArrayLike]
    beta_dh: Callable[[ArrayLike, ArrayLike], ArrayLike]
    beta_dq: Callable[[ArrayLike, ArrayLike], ArrayLike]


@dataclass(frozen=True)
class GateBoundaryMap(BoundaryMap):
    """Overshot-gate relations at both ends of a pool."""

    c_g: float = 1.0


def _require_positive_depth(H: ArrayLike) -> None:
    if np.any(np.asarray(H) <= 0.0):
        raise DepthUnderflow("water depth must be positive")


def _require_positive_flow(Q: ArrayLike) -> None:
    if np.any(np.asarray(Q) <= 0.0):
        raise BoundaryDomainError("gate relation undefined for Q <= 0")


def saint_venant_model(c_f: float, gravity: float = GRAVITY_DEFAULT) -> SaintVenantModel:
    """Horizontal rectangular channel of unit width.

    f(H,Q) = Q^2/H + g H^2/2,  g(H,Q) = c_f Q^2 / H^2.

    All quantities are per unit channel width, so Q carries m^3/s-per-meter
    semantics.  Evaluation at H <= 0 raises ``DepthUnderflow``.
    """
    if c_f < 0.0:
        raise ValueError("friction coefficient must be non-negative")
    if gravity <= 0.0:
        raise ValueError("gravity must be positive")

    def flux(H, Q):
        _require_positive_depth(H)
        return Q * Q / H + 0.5 * gravity * H * H

    def source(H, Q):
        _require_positive_depth(H)
        return c_f * Q * Q / (H * H)

    def flux_dh(H, Q):
        _require_positive_depth(H)
        return gravity * H - (Q * Q) / (H * H)

    def flux_dq(H, Q):
        _require_positive_depth(H)
        return 2.0 * Q / H

    def source_dh(H, Q):
        _require_positive_depth(H)
        return -2.0 * c_f * Q * Q / (H * H * H)

    def source_dq(H, Q):
        _require_positive_depth(H)
        return 2.0 * c_f * Q / (H * H)

    return SaintVenantModel(
        flux=flux,
        source=source,
        flux_dh=flux_dh,
        flux_dq=flux_dq,
        source_dh=source_dh,
        source_dq=source_dq,
        c_f=c_f,
        gravity=gravity,
    )


def linear_model(a: float, b: float) -> LinearModel:
    """Linear conservation law with f = a H + b Q and no source."""
    if b * b + 4.0 * a <= 0.0:
        raise NonHyperbolicError("b^2 + 4a must be positive")

    def flux(H, Q):
        return a * H + b * Q

    zero = lambda H, Q: np.zeros_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float))
    const = lambda v: (lambda H, Q: np.full_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float), v))

    return LinearModel(
        flux=flux,
        source=zero,
        flux_dh=const(a),
        flux_dq=const(b),
        source_dh=zero,
        source_dq=zero,
        a=a,
        b=b,
    )


def gate_boundary_maps(c_g: float) -> GateBoundaryMap:
    """Overshot gates at both boundaries.

    alpha(H,Q) = (Q/c_g)^(2/3) is the head over the upstream gate,
    beta(H,Q)  = H - (Q/c_g)^(2/3) is the downstream gate elevation.
    Both relations require Q > 0.
    """
    if c_g <= 0.0:
        raise ValueError("discharge coefficient must be positive")

    def head(Q):
        _require_positive_flow(Q)
        return (Q / c_g) ** (2.0 / 3.0)

    def head_dq(Q):
        _require_positive_flow(Q)
        return (2.0 / 3.0) * c_g ** (-2.0 / 3.0) * Q ** (-1.0 / 3.0)

    def alpha(H, Q):
        return head(Q)

    def beta(H, Q):
        return H - head(Q)

    zeros = lambda H, Q: np.zeros_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float))
    ones = lambda H, Q: np.ones_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float))

    return GateBoundaryMap(
        alpha=alpha,
        beta=beta,
        alpha_dh=zeros,
        alpha_dq=lambda H, Q: head_dq(Q),
        beta_dh=ones,
        beta_dq=lambda H, Q: -head_dq(Q),
        c_g=c_g,
    )


def linear_boundary_maps(gamma: float) -> BoundaryMap:
    """Boundary relations of the constant-coefficient case.

    alpha(H,Q) = Q, beta(H,Q) = Q - gamma H.
    """

    def alpha(H, Q):
        return np.asarray(Q, dtype=float) + 0.0 * np.asarray(H, dtype=float)

    def beta(H, Q):
        return Q - gamma * H

    zeros = lambda H, Q: np.zeros_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float))
    ones = lambda H, Q: np.ones_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float))
    const = lambda v: (lambda H, Q: np.full_like(np.asarray(H, dtype=float) + np.asarray(Q, dtype=float), v))

    return BoundaryMap(
        alpha=alpha,
        beta=beta,
        alpha_dh=zeros,
        alpha_dq=ones,
        beta_dh=const(-gamma),
        beta_dq=ones,
    )


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on [0, L] including both boundary nodes."""

    length: float
    n_cells: int

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("domain length must be positive")
        if self.n_cells < 2:
            raise ValueError("need at least two cells")

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_nodes)


@dataclass(frozen=True)
class FieldState:
    """Snapshot (H, Q) over the grid nodes at time t."""

    t: float
    H: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", np.asarray(self.H, dtype=float))
        object.__setattr__(self, "Q", np.asarray(self.Q, dtype=float))
        if self.H.shape != self.Q.shape:
            raise ValueError("H and Q must have the same shape")
        if np.any(~np.isfinite(self.H)) or np.any(~np.isfinite(self.Q)):
            raise ValueError("non-finite field values")
        if np.any(self.H <= 0.0):
            raise DepthUnderflow("field state requires H > 0 everywhere")

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.H.copy(), self.Q.copy())


def uniform_state(grid: Grid, H: float, Q: float, t: float = 0.0) -> FieldState:
    n = grid.n_nodes
    return FieldState(t, np.full(n, float(H)), np.full(n, float(Q)))


@dataclass(frozen=True)
class Signal:
    """Piecewise-smooth scalar signal of time.

    Kinds: ``constant``, ``smooth-step`` (cosine ramp base -> target),
    ``pulse`` (ramp-hold-ramp base -> peak -> settle) and ``samples``
    (piecewise-linear table).  Evaluation is continuous in t and holds
    the nearest endpoint value outside the defined range.
    """

    kind: str
    base: float = 0.0
    target: float = 0.0
    settle: float | None = None
    ramp_start: float = 0.0
    ramp_duration: float = 0.0
    hold_duration: float = 0.0
    fall_duration: float | None = None
    samples: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    @staticmethod
    def constant(value: float) -> "Signal":
        return Signal(kind="constant", base=value)

    @staticmethod
    def smooth_step(base: float, target: float, ramp_start: float, ramp_duration: float) -> "Signal":
        return Signal(
            kind="smooth-step",
            base=base,
            target=target,
            ramp_start=ramp_start,
            ramp_duration=ramp_duration,
        )

    @staticmethod
    def pulse(
        base: float,
        peak: float,
        settle: float,
        ramp_start: float,
        rise_duration: float,
        hold_duration: float,
        fall_duration: float | None = None,
    ) -> "Signal":
        return Signal(
            kind="pulse",
            base=base,
            target=peak,
            settle=settle,
            ramp_start=ramp_start,
            ramp_duration=rise_duration,
            hold_duration=hold_duration,
            fall_duration=fall_duration,
        )

    @staticmethod
    def from_samples(pairs) -> "Signal":
        pts = tuple((float(t), float(v)) for t, v in pairs)
        if len(pts) == 0:
            raise ValueError("samples signal needs at least one point")
        if any(pts[i + 1][0] <= pts[i][0] for i in range(len(pts) - 1)):
            raise ValueError("sample times must be strictly increasing")
        return Signal(kind="samples", samples=pts)

    def __call__(self, t: float) -> float:
        return eval_signal(self, t)

    def mapped(self, fn: Callable[[float], float]) -> "Signal":
        """Apply ``fn`` to every level parameter, preserving the timing.

        Used to convert a flow-rate signal into the gate-head signal
        (Q/c_g)^(2/3); the ramp shape stays cosine in the mapped units.
        """
        if self.kind == "samples":
            return Signal.from_samples((t, fn(v)) for t, v in self.samples)
        return Signal(
            kind=self.kind,
            base=fn(self.base),
            target=fn(self.target),
            settle=None if self.settle is None else fn(self.settle),
            ramp_start=self.ramp_start,
            ramp_duration=self.ramp_duration,
            hold_duration=self.hold_duration,
            fall_duration=self.fall_duration,
        )


def _cosine_ramp(progress: float) -> float:
    return 0.5 - 0.5 * math.cos(math.pi * progress)


def eval_signal(sig: Signal, t: float) -> float:
    """Evaluate a signal; clamps to the nearest endpoint outside its range."""
    if sig.kind == "constant":
        return sig.base

    if sig.kind == "smooth-step":
        if t < sig.ramp_start:
            return sig.base
        if sig.ramp_duration <= 0.0 or t >= sig.ramp_start + sig.ramp_duration:
            return sig.target
        return sig.base + (sig.target - sig.base) * _cosine_ramp((t - sig.ramp_start) / sig.ramp_duration)

    if sig.kind == "pulse":
        rise = max(sig.ramp_duration, 0.0)
        fall = rise if sig.fall_duration is None else max(sig.fall_duration, 0.0)
        settle = sig.base if sig.settle is None else sig.settle
        t1 = sig.ramp_start
        t2 = t1 + rise
        t3 = t2 + max(sig.hold_duration, 0.0)
        t4 = t3 + fall
        if t < t1:
            return sig.base
        if t < t2:
            return sig.base + (sig.target - sig.base) * _cosine_ramp((t - t1) / rise)
        if t < t3:
            return sig.target
        if t < t4:
            return sig.target + (settle - sig.target) * _cosine_ramp((t - t3) / fall)
        return settle

    if sig.kind == "samples":
        times = [p[0] for p in sig.samples]
        values = [p[1] for p in sig.samples]
        if t <= times[0]:
            return values[0]
        if t >= times[-1]:
            return values[-1]
        return float(np.interp(t, times, values))

    raise ValueError(f"unknown signal kind: {sig.kind!r}")


def gate_head_signal(flow_signal: Signal, c_g: float) -> Signal:
    """Convert a flow-rate signal into the matching gate-head signal."""
    if c_g <= 0.0:
        raise ValueError("discharge coefficient must be positive")

    def to_head(q: float) -> float:
        if q <= 0.0:
            raise BoundaryDomainError("gate head undefined for non-positive flow")
        return (q / c_g) ** (2.0 / 3.0)

    return flow_signal.mapped(to_head)
