"""Numerical Lyapunov certificates for the linearized error and controller systems.

About a steady profile, the deviation dynamics read

    z_t + A(x) z_x + B(x) z = 0,
    A = [[0, 1], [a(x), b(x)]],
    B = [[0, 0], [a_x + a~, b_x + b~]],

with a, b the flux partials and a~, b~ the source partials along the
profile.  With N(x) = [[l2, 1], [-l1, 1]] diagonalizing A and weights
Delta = diag(p1, p2), the quadratic functional int z^T P(x) z dx with
P = N^T Delta N decays when

    (a1)  p1 l1(0) (alpha_h - alpha_q l2(0))^2 < p2 l2(0) (alpha_h + alpha_q l1(0))^2
    (a2)  p2 l2(L) (beta_h + beta_q l1(L))^2  < p1 l1(L) (beta_h - beta_q l2(L))^2
    (a3)  p2(L) l2(L) < p1(L) l1(L)
    (b)   -M_x + B^T P + P B  positive definite on [0, L],  M = P A.

The checks below evaluate exactly these conditions node by node, along
with the boundary quadratic-form coefficients gamma0..gamma2 and the
infima mu0 (interior matrix) and mu1 (of P) used in the ISS estimate.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import CriticalFlow, NonHyperbolicError
from .model import BoundaryMap, Grid, PhysicalModel
from .steady import SteadyProfile

_DEGENERATE_RTOL = 1e-13


@dataclass(frozen=True)
class LinearizedSystem:
    """Coefficients of the deviation dynamics along a steady profile."""

    grid: Grid
    a: np.ndarray
    b: np.ndarray
    a_tilde: np.ndarray
    b_tilde: np.ndarray
    a_x: np.ndarray
    b_x: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    alpha_h: float
    alpha_q: float
    beta_h: float
    beta_q: float

    @property
    def n_nodes(self) -> int:
        return self.grid.n_nodes

    def A_matrices(self) -> np.ndarray:
        n = self.n_nodes
        A = np.zeros((n, 2, 2))
        A[:, 0, 1] = 1.0
        A[:, 1, 0] = self.a
        A[:, 1, 1] = self.b
        return A

    def B_matrices(self) -> np.ndarray:
        n = self.n_nodes
        B = np.zeros((n, 2, 2))
        B[:, 1, 0] = self.a_x + self.a_tilde
        B[:, 1, 1] = self.b_x + self.b_tilde
        return B

    def N_matrices(self) -> np.ndarray:
        n = self.n_nodes
        N = np.zeros((n, 2, 2))
        N[:, 0, 0] = self.lam2
        N[:, 0, 1] = 1.0
        N[:, 1, 0] = -self.lam1
        N[:, 1, 1] = 1.0
        return N


@dataclass(frozen=True)
class LyapunovWeights:
    """Per-node positive weights (p1, p2) of the diagonal matrix Delta."""

    p1: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float))
        object.__setattr__(self, "p2", np.asarray(self.p2, dtype=float))
        if self.p1.shape != self.p2.shape:
            raise ValueError("p1 and p2 must have the same shape")
        if np.any(self.p1 <= 0.0) or np.any(self.p2 <= 0.0):
            raise ValueError("Lyapunov weights must be positive")

    @staticmethod
    def constant(p1: float, p2: float, n_nodes: int) -> "LyapunovWeights":
        return LyapunovWeights(np.full(n_nodes, float(p1)), np.full(n_nodes, float(p2)))

    @staticmethod
    def saint_venant_default(n_nodes: int) -> "LyapunovWeights":
        return LyapunovWeights.constant(0.5, 0.5, n_nodes)


def linearize(
    model: PhysicalModel,
    bmaps: BoundaryMap,
    profile: SteadyProfile,
    grid: Grid | None = None,
) -> LinearizedSystem:
    """Evaluate the deviation-system coefficients along the profile.

    a_x and b_x are x-derivatives of the profile-evaluated flux partials,
    computed by centered differences (second-order one-sided at the ends).
    """
    grid = profile.grid if grid is None else grid
    H = profile.H_star
    q = profile.q_star
    a = np.asarray(model.flux_dh(H, q), dtype=float)
    b = np.asarray(model.flux_dq(H, q), dtype=float)
    a_t = np.asarray(model.source_dh(H, q), dtype=float)
    b_t = np.asarray(model.source_dq(H, q), dtype=float)
    disc = b * b + 4.0 * a
    if np.any(disc <= 0.0):
        raise NonHyperbolicError("profile loses hyperbolicity")
    if np.any(a <= 0.0):
        raise CriticalFlow("certificate requires a strictly subcritical profile")
    root = np.sqrt(disc)
    lam1 = 0.5 * (b + root)
    lam2 = 0.5 * (root - b)
    a_x = np.gradient(a, grid.dx, edge_order=2)
    b_x = np.gradient(b, grid.dx, edge_order=2)
    H0, HL = float(H[0]), float(H[-1])
    alpha_h = float(bmaps.alpha_dh(H0, q))
    alpha_q = float(bmaps.alpha_dq(H0, q))
    if alpha_h == 0.0 and alpha_q == 0.0:
        raise ValueError("(alpha_h, alpha_q) = (0, 0) leaves the system without a disturbance channel")
    return LinearizedSystem(
        grid=grid,
        a=a,
        b=b,
        a_tilde=a_t,
        b_tilde=b_t,
        a_x=a_x,
        b_x=b_x,
        lam1=lam1,
        lam2=lam2,
        alpha_h=alpha_h,
        alpha_q=alpha_q,
        beta_h=float(bmaps.beta_dh(HL, q)),
        beta_q=float(bmaps.beta_dq(HL, q)),
    )


def weight_matrices(linsys: LinearizedSystem, weights: LyapunovWeights) -> tuple[np.ndarray, np.ndarray]:
    """Per-node P = N^T Delta N and M = P A (symmetric by construction)."""
    l1, l2 = linsys.lam1, linsys.lam2
    p1, p2 = weights.p1, weights.p2
    n = linsys.n_nodes
    P = np.zeros((n, 2, 2))
    P[:, 0, 0] = p1 * l2 * l2 + p2 * l1 * l1
    P[:, 0, 1] = P[:, 1, 0] = p1 * l2 - p2 * l1
    P[:, 1, 1] = p1 + p2
    M = np.zeros((n, 2, 2))
    M[:, 0, 0] = l1 * l2 * (p1 * l2 - p2 * l1)
    M[:, 0, 1] = M[:, 1, 0] = l1 * l2 * (p1 + p2)
    M[:, 1, 1] = p1 * l1 - p2 * l2
    return P, M


def _sym_eigvals(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvalues (min, max) of symmetric 2x2 matrices."""
    mean = 0.5 * (S[:, 0, 0] + S[:, 1, 1])
    radius = np.sqrt((0.5 * (S[:, 0, 0] - S[:, 1, 1])) ** 2 + S[:, 0, 1] ** 2)
    return mean - radius, mean + radius


@dataclass(frozen=True)
class InteriorReport:
    """Condition (b): positive definiteness of -M_x + B^T P + P B."""

    positive_definite: bool
    per_node_min_eig: np.ndarray
    mu0: float
    mu1: float
    symmetry_residual: float
    matrices: np.ndarray

    @property
    def per_node_pass(self) -> np.ndarray:
        return self.per_node_min_eig > 0.0


def check_interior_condition_b(linsys: LinearizedSystem, weights: LyapunovWeights) -> InteriorReport:
    """Positive definiteness of -M_x + B^T P + P B at every node.

    Verdicts come from leading principal minors; the per-node smaller
    eigenvalue is reported as the margin, with mu0 its infimum and mu1
    the infimum eigenvalue of P.
    """
    if weights.p1.shape[0] != linsys.n_nodes:
        raise ValueError("weights must be sampled on the profile grid")
    P, M = weight_matrices(linsys, weights)
    A = linsys.A_matrices()
    PA = np.einsum("nij,njk->nik", P, A)
    sym_res = float(np.max(np.abs(PA - np.swapaxes(PA, 1, 2))))
    sym_scale = float(np.max(np.abs(PA)))

    M_x = np.gradient(M, linsys.grid.dx, axis=0, edge_order=2)
    B = linsys.B_matrices()
    PB = np.einsum("nij,njk->nik", P, B)
    S = -M_x + np.swapaxes(PB, 1, 2) + PB

    minors_ok = np.all((S[:, 0, 0] > 0.0) & (S[:, 0, 0] * S[:, 1, 1] - S[:, 0, 1] ** 2 > 0.0))
    eig_min, _ = _sym_eigvals(S)
    p_min, _ = _sym_eigvals(P)
    return InteriorReport(
        positive_definite=bool(minors_ok),
        per_node_min_eig=eig_min,
        mu0=float(np.min(eig_min)),
        mu1=float(np.min(p_min)),
        symmetry_residual=sym_res / max(sym_scale, 1e-300),
        matrices=S,
    )


@dataclass(frozen=True)
class BoundaryReport:
    """Conditions (a1), (a2), (a3) and the gamma coefficients at x = 0.

    Verdicts are ``None`` when the squared-ratio form of a condition is
    degenerate (its denominator vanishes).
    """

    a1: bool | None
    a2: bool | None
    a3: bool
    gamma0: float
    gamma1: float
    gamma2: float


def check_boundary_conditions(linsys: LinearizedSystem, weights: LyapunovWeights) -> BoundaryReport:
    """Evaluate the three boundary sign conditions and the gamma coefficients.

    gamma0 > 0 is equivalent to condition (a1); an internal consistency
    assertion enforces the equivalence whenever (a1) is determinate.
    """
    p1_0, p2_0 = float(weights.p1[0]), float(weights.p2[0])
    p1_L, p2_L = float(weights.p1[-1]), float(weights.p2[-1])
    l1_0, l2_0 = float(linsys.lam1[0]), float(linsys.lam2[0])
    l1_L, l2_L = float(linsys.lam1[-1]), float(linsys.lam2[-1])
    ah, aq = linsys.alpha_h, linsys.alpha_q
    bh, bq = linsys.beta_h, linsys.beta_q

    den1 = ah + aq * l1_0
    if abs(den1) <= _DEGENERATE_RTOL * (abs(ah) + abs(aq * l1_0)):
        a1 = None
    else:
        a1 = bool(p1_0 * l1_0 * (ah - aq * l2_0) ** 2 < p2_0 * l2_0 * (ah + aq * l1_0) ** 2)

    den2 = bh - bq * l2_L
    if abs(den2) <= _DEGENERATE_RTOL * (abs(bh) + abs(bq * l2_L)):
        a2 = None
    else:
        a2 = bool(p2_L * l2_L * (bh + bq * l1_L) ** 2 < p1_L * l1_L * (bh - bq * l2_L) ** 2)

    a3 = bool(p2_L * l2_L < p1_L * l1_L)

    if aq != 0.0:
        k = ah / aq
        gamma0 = -p1_0 * l1_0 * (l2_0 - k) ** 2 + p2_0 * l2_0 * (l1_0 + k) ** 2
        gamma1 = (2.0 / aq) * (p1_0 * l1_0 * (l2_0 - k) + p2_0 * l2_0 * (l1_0 + k))
        gamma2 = (p1_0 * l1_0 - p2_0 * l2_0) / (aq * aq)
    else:
        gamma0 = -p1_0 * l1_0 + p2_0 * l2_0
        gamma1 = 2.0 * l1_0 * l2_0 * (p1_0 + p2_0) / ah
        gamma2 = l1_0 * l2_0 * (p1_0 * l2_0 - p2_0 * l1_0) / (ah * ah)

    if a1 is not None and (gamma0 > 0.0) != a1:
        raise AssertionError("gamma0 sign is inconsistent with condition (a1)")
    return BoundaryReport(a1=a1, a2=a2, a3=a3, gamma0=gamma0, gamma1=gamma1, gamma2=gamma2)


@dataclass(frozen=True)
class Certificate:
    """Aggregated stability verdicts and diagnostics for one configuration."""

    a1: bool | None
    a2: bool | None
    a3: bool
    b_interior: bool
    mu0: float
    mu1: float
    gamma0: float
    gamma1: float
    gamma2: float
    per_node_min_eig: np.ndarray
    beta_L: float | None = None
    margin_2betaL: float | None = None
    epsilon_bound: float | None = None

    @property
    def passed(self) -> bool:
        return bool(self.a1 and self.a2 and self.a3 and self.b_interior and self.mu0 > 0.0)


def build_certificate(
    linsys: LinearizedSystem,
    weights: LyapunovWeights,
    beta_L: float | None = None,
    v_star_L: float | None = None,
    epsilon_bound: float | None = None,
) -> Certificate:
    interior = check_interior_condition_b(linsys, weights)
    boundary = check_boundary_conditions(linsys, weights)
    margin = None
    if beta_L is not None and v_star_L is not None:
        margin = 2.0 * beta_L - v_star_L
    return Certificate(
        a1=boundary.a1,
        a2=boundary.a2,
        a3=boundary.a3,
        b_interior=interior.positive_definite,
        mu0=interior.mu0,
        mu1=interior.mu1,
        gamma0=boundary.gamma0,
        gamma1=boundary.gamma1,
        gamma2=boundary.gamma2,
        per_node_min_eig=interior.per_node_min_eig,
        beta_L=beta_L,
        margin_2betaL=margin,
        epsilon_bound=epsilon_bound,
    )


def downstream_gate_gain(q_star: float, c_g: float) -> float:
    """beta_L = (3/2) (c_g^2 Q*)^(1/3), the linearized gate feedback gain."""
    if q_star <= 0.0 or c_g <= 0.0:
        raise ValueError("gate gain requires positive Q* and c_g")
    return 1.5 * (c_g * c_g * q_star) ** (1.0 / 3.0)


def saint_venant_certificate(profile: SteadyProfile, c_g: float) -> Certificate:
    """Full certificate of the open-channel configuration with p1 = p2 = 1/2."""
    from .model import gate_boundary_maps  # local to avoid cycle at import time

    bmaps = gate_boundary_maps(c_g)
    linsys = linearize(profile.model, bmaps, profile)
    weights = LyapunovWeights.saint_venant_default(profile.grid.n_nodes)
    beta_L = downstream_gate_gain(profile.q_star, c_g)
    return build_certificate(
        linsys,
        weights,
        beta_L=beta_L,
        v_star_L=float(profile.V_star[-1]),
        epsilon_bound=cascade_epsilon_bound(profile),
    )


def cascade_epsilon_bound(profile: SteadyProfile) -> float:
    """Largest pool-weight ratio keeping every junction matrix definite.

    For geometric Lyapunov weights omega_{i+1}/omega_i = eps the bound is
    eps < V*(0) V*(L) / (g H*(0)); g H*(0) is recovered from the model as
    a(H*(0), Q*) + V*(0)^2.
    """
    v0 = float(profile.V_star[0])
    vL = float(profile.V_star[-1])
    a0 = float(profile.model.flux_dh(profile.H_star[0], profile.q_star))
    g_h0 = a0 + v0 * v0
    if g_h0 <= 0.0:
        raise CriticalFlow("epsilon bound requires a subcritical upstream node")
    return v0 * vL / g_h0


@dataclass(frozen=True)
class OmegaReport:
    """Definiteness of the junction matrices Omega_i for given pool weights."""

    matrices: np.ndarray
    per_junction_pd: np.ndarray

    @property
    def all_positive_definite(self) -> bool:
        return bool(np.all(self.per_junction_pd))


def check_omega_matrices(profile: SteadyProfile, omegas) -> OmegaReport:
    """Build Omega_i from consecutive pool weights and test definiteness."""
    w = np.asarray(omegas, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("need at least two pool weights")
    if np.any(w <= 0.0):
        raise ValueError("pool weights must be positive")
    v0 = float(profile.V_star[0])
    vL = float(profile.V_star[-1])
    a0 = float(profile.model.flux_dh(profile.H_star[0], profile.q_star))
    n = w.size - 1
    mats = np.zeros((n, 2, 2))
    verdicts = np.zeros(n, dtype=bool)
    for i in range(n):
        wi, wj = w[i], w[i + 1]
        m = np.array(
            [
                [wi * vL - wj * v0, -wj * a0],
                [-wj * a0, wj * a0 * v0],
            ]
        )
        mats[i] = m
        verdicts[i] = m[0, 0] > 0.0 and np.linalg.det(m) > 0.0
    return OmegaReport(matrices=mats, per_junction_pd=verdicts)


def geometric_pool_weights(n_pools: int, epsilon: float) -> np.ndarray:
    """Weights omega_i with fixed ratio epsilon, normalized to omega_1 = 1."""
    if n_pools < 1:
        raise ValueError("need at least one pool")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    return epsilon ** np.arange(n_pools, dtype=float)


def certificate_to_dict(cert: Certificate) -> dict:
    """JSON-ready view of a certificate."""
    return {
        "passed": cert.passed,
        "conditions": {
            "a1": cert.a1,
            "a2": cert.a2,
            "a3": cert.a3,
            "b_interior": cert.b_interior,
        },
        "diagnostics": {
            "mu0": cert.mu0,
            "mu1": cert.mu1,
            "gamma0": cert.gamma0,
            "gamma1": cert.gamma1,
            "gamma2": cert.gamma2,
            "beta_L": cert.beta_L,
            "margin_2betaL_minus_VstarL": cert.margin_2betaL,
            "epsilon_bound": cert.epsilon_bound,
            "min_interior_eigenvalue": float(np.min(cert.per_node_min_eig)),
        },
    }


def write_certificate_json(cert: Certificate, path) -> None:
    with open(path, "w") as fh:
        json.dump(certificate_to_dict(cert), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_interior_csv(cert: Certificate, grid: Grid, path) -> None:
    """Per-node CSV of the interior-matrix minimum eigenvalue."""
    x = grid.x
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "min_eig"])
        for k in range(grid.n_nodes):
            writer.writerow([f"{x[k]:.12g}", f"{cert.per_node_min_eig[k]:.12g}"])
