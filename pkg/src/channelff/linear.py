"""Frequency- and time-domain feedforward design for the constant-coefficient case.

The plant is

    H_t + Q_x = 0,   Q_t + (a H + b Q)_x = 0,
    Q(t,0) = D(t),   Q(t,L) - gamma H(t,L) = U(t),

with wave speeds lambda1 = (b + sqrt(b^2+4a))/2 and
-lambda2 = (b - sqrt(b^2+4a))/2.  In Riemann coordinates the dynamics
reduce to two pure transport delays tau1 = L/lambda1 and tau2 = L/lambda2,
which gives closed-form transfer functions from the control and the
disturbance to the output Y = H(t,L) - H*_L, and an exactly invertible
feedforward law realized in the time domain by the delay recursion

    U(t) = -(l2/l1) U(t - tau) + (1 + l2/l1) D(t - tau1)
           - gamma (1 + l2/l1) H*_L,        tau = tau1 + tau2.
"""

from __future__ import annotations

import cmath
import csv
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NonHyperbolicError, PoleProximityError


def characteristic_speeds(a: float, b: float) -> tuple[float, float]:
    """Wave speeds (lambda1, lambda2) of the 2x2 system.

    lambda1 is the right-running speed, -lambda2 the left-running one.
    Both are positive when a > 0.
    """
    disc = b * b + 4.0 * a
    if disc <= 0.0:
        raise NonHyperbolicError("b^2 + 4a must be positive")
    root = math.sqrt(disc)
    return 0.5 * (b + root), 0.5 * (root - b)


@dataclass(frozen=True)
class LinearPlant:
    """Constant-coefficient plant with its boundary data.

    ``set_point`` is the downstream target H*_L and ``d0`` the disturbance
    value D(0) about which the Riemann coordinates are centered.
    """

    a: float
    b: float
    gamma: float
    length: float
    set_point: float = 0.0
    d0: float = 0.0

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("length must be positive")
        if self.a <= 0.0:
            raise ValueError("a must be positive so both delays are defined")
        characteristic_speeds(self.a, self.b)  # validates hyperbolicity

    @property
    def lambda1(self) -> float:
        return characteristic_speeds(self.a, self.b)[0]

    @property
    def lambda2(self) -> float:
        return characteristic_speeds(self.a, self.b)[1]

    @property
    def tau1(self) -> float:
        return self.length / self.lambda1

    @property
    def tau2(self) -> float:
        return self.length / self.lambda2

    @property
    def tau(self) -> float:
        return self.tau1 + self.tau2

    @property
    def steady_control(self) -> float:
        """Fixed point of the recursion: U* = D(0) - gamma H*_L."""
        return self.d0 - self.gamma * self.set_point


def riemann_forward(plant: LinearPlant, H, Q):
    """Map (H, Q) to the Riemann coordinates (R1, R2)."""
    dh = np.asarray(H, dtype=float) - plant.set_point
    dq = np.asarray(Q, dtype=float) - plant.d0
    return dq + plant.lambda2 * dh, dq - plant.lambda1 * dh


def riemann_inverse(plant: LinearPlant, R1, R2):
    """Inverse of :func:`riemann_forward`."""
    r1 = np.asarray(R1, dtype=float)
    r2 = np.asarray(R2, dtype=float)
    s = plant.lambda1 + plant.lambda2
    H = plant.set_point + (r1 - r2) / s
    Q = plant.d0 + (plant.lambda1 * r1 + plant.lambda2 * r2) / s
    return H, Q


_TRANSFER_KINDS = ("Po", "Pd", "Pc")


def transfer_eval(plant: LinearPlant, kind: str, s: complex) -> complex:
    """Evaluate P_o, P_d or P_c at the Laplace variable s.

    P_o and P_d share the denominator l1(gamma+l2) + l2(gamma-l1) e^(-s tau);
    the feedforward controller is P_c = -P_d / P_o.  Raises
    ``PoleProximityError`` when the relevant denominator is below 1e-12.
    """
    if kind not in _TRANSFER_KINDS:
        raise ValueError(f"kind must be one of {_TRANSFER_KINDS}")
    l1, l2, g = plant.lambda1, plant.lambda2, plant.gamma
    e_tau = cmath.exp(-s * plant.tau)
    e_tau1 = cmath.exp(-s * plant.tau1)

    if kind == "Pc":
        den = l1 + l2 * e_tau
        if abs(den) < 1e-12:
            raise PoleProximityError("P_c evaluated too close to a pole")
        return (l1 + l2) * e_tau1 / den

    den = l1 * (g + l2) + l2 * (g - l1) * e_tau
    if abs(den) < 1e-12:
        raise PoleProximityError(f"{kind} evaluated too close to a pole")
    if kind == "Po":
        return -(l1 + l2 * e_tau) / den
    return (l1 + l2) * e_tau1 / den


def plant_poles_stable(plant: LinearPlant) -> bool:
    """Common poles of P_o and P_d are stable iff |(g-l1)/(g+l2)| < l1/l2."""
    l1, l2, g = plant.lambda1, plant.lambda2, plant.gamma
    if g + l2 == 0.0:
        raise ValueError("gamma = -lambda2 leaves the pole condition undefined")
    return abs((g - l1) / (g + l2)) < l1 / l2


def controller_poles_stable(plant: LinearPlant) -> bool:
    """P_c has stable poles iff lambda2/lambda1 < 1."""
    return plant.lambda2 / plant.lambda1 < 1.0


class DelayLine:
    """Time-stamped sample history with linear interpolation.

    Samples are appended with strictly increasing times; lookups at or
    after the newest sample return it (lag 0), lookups before the oldest
    retained sample return the initialization value.  ``horizon`` bounds
    how far back samples are kept.
    """

    def __init__(self, init_value: float, horizon: float):
        if horizon <= 0.0:
            raise ValueError("horizon must be positive")
        self.init_value = float(init_value)
        self.horizon = float(horizon)
        self._samples: deque[tuple[float, float]] = deque()

    def append(self, t: float, value: float) -> None:
        if self._samples and t <= self._samples[-1][0]:
            raise ValueError("sample times must be strictly increasing")
        self._samples.append((float(t), float(value)))
        cutoff = t - self.horizon
        # keep one sample at/before the cutoff so interpolation stays exact
        while len(self._samples) > 2 and self._samples[1][0] <= cutoff:
            self._samples.popleft()

    def value_at(self, t: float) -> float:
        if not self._samples or t < self._samples[0][0]:
            return self.init_value
        if t >= self._samples[-1][0]:
            return self._samples[-1][1]
        lo, hi = 0, len(self._samples) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._samples[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        t0, v0 = self._samples[lo]
        t1, v1 = self._samples[hi]
        w = (t - t0) / (t1 - t0)
        return v0 + w * (v1 - v0)


class LinearFeedforward:
    """Time-domain realization of P_c as a delay recursion.

    History before t = 0 is initialized at the steady values implied by
    uniform initial conditions: U = U* = D(0) - gamma H*_L and D = D(0).
    """

    def __init__(self, plant: LinearPlant, history_slack: float = 10.0):
        self.plant = plant
        self.ratio = plant.lambda2 / plant.lambda1
        self.gain = 1.0 + self.ratio
        self.offset = plant.gamma * self.gain * plant.set_point
        horizon = plant.tau + history_slack
        self.u_line = DelayLine(plant.steady_control, horizon)
        self.d_line = DelayLine(plant.d0, horizon)
        self.last_t: float | None = None
        self.last_u = plant.steady_control

    def step(self, d_value: float, t: float) -> float:
        """Record D(t) and emit U(t); t must advance strictly."""
        if self.last_t is not None and t <= self.last_t:
            raise ValueError("controller time must be strictly increasing")
        self.d_line.append(t, d_value)
        u = (
            -self.ratio * self.u_line.value_at(t - self.plant.tau)
            + self.gain * self.d_line.value_at(t - self.plant.tau1)
            - self.offset
        )
        self.u_line.append(t, u)
        self.last_t = t
        self.last_u = u
        return u


def linear_feedforward_step(ctrl: LinearFeedforward, d_now: float, t: float) -> float:
    """Functional alias of :meth:`LinearFeedforward.step`."""
    return ctrl.step(d_now, t)


def frequency_response(plant: LinearPlant, kind: str, omegas) -> np.ndarray:
    """Evaluate a transfer function along s = i omega; returns complex array."""
    return np.array([transfer_eval(plant, kind, 1j * float(w)) for w in omegas])


def write_frequency_csv(plant: LinearPlant, kind: str, omegas, path) -> None:
    """Emit (omega, re, im) rows for one transfer kind."""
    values = frequency_response(plant, kind, omegas)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega", "re", "im"])
        for w, v in zip(omegas, values):
            writer.writerow([f"{float(w):.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
