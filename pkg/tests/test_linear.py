"""Frequency-domain identities and the time-domain delay recursion."""

import math

import numpy as np
import pytest

import channelff as cf
from channelff.errors import NonHyperbolicError, PoleProximityError
from channelff.linear import DelayLine, linear_feedforward_step


class TestCharacteristicSpeeds:
    def test_simple_values(self):
        assert cf.characteristic_speeds(2.0, 1.0) == pytest.approx((2.0, 1.0))

    def test_saint_venant_reference_point(self):
        # a = gH* - V*^2 and b = 2V* at H* = 5, V* = 0.4: speeds V* +- sqrt(gH*)
        g, H, V = 9.81, 5.0, 0.4
        l1, l2 = cf.characteristic_speeds(g * H - V * V, 2.0 * V)
        assert l1 == pytest.approx(V + math.sqrt(g * H), abs=1e-12)
        assert l2 == pytest.approx(math.sqrt(g * H) - V, abs=1e-12)
        assert l1 == pytest.approx(7.404, abs=1e-3)
        assert l2 == pytest.approx(6.604, abs=1e-3)

    def test_vieta_identities_fuzzed(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.uniform(0.01, 100.0)
            b = rng.uniform(-10.0, 10.0)
            l1, l2 = cf.characteristic_speeds(a, b)
            assert l1 * l2 == pytest.approx(a, rel=1e-12)
            assert l1 - l2 == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_non_hyperbolic_rejected(self):
        with pytest.raises(NonHyperbolicError):
            cf.characteristic_speeds(-1.0, 1.0)


class TestRiemannCoordinates:
    def test_steady_state_maps_to_origin(self, linear_plant):
        r1, r2 = cf.riemann_forward(linear_plant, linear_plant.set_point, linear_plant.d0)
        assert r1 == 0.0 and r2 == 0.0

    def test_reference_values(self):
        plant = cf.LinearPlant(a=2.0, b=1.0, gamma=0.0, length=1.0, set_point=0.0, d0=0.0)
        r1, r2 = cf.riemann_forward(plant, 1.0, 3.0)
        assert r1 == pytest.approx(4.0)  # Q + lambda2 H
        assert r2 == pytest.approx(1.0)  # Q - lambda1 H

    def test_round_trip_fuzzed(self, linear_plant):
        rng = np.random.default_rng(5)
        H = rng.uniform(-10.0, 10.0, size=200)
        Q = rng.uniform(-10.0, 10.0, size=200)
        r1, r2 = cf.riemann_forward(linear_plant, H, Q)
        H2, Q2 = cf.riemann_inverse(linear_plant, r1, r2)
        assert np.max(np.abs(H2 - H)) < 1e-12
        assert np.max(np.abs(Q2 - Q)) < 1e-12


class TestTransferFunctions:
    def test_static_gains(self, linear_plant):
        g = linear_plant.gamma
        assert cf.transfer_eval(linear_plant, "Pc", 0.0) == pytest.approx(1.0)
        assert cf.transfer_eval(linear_plant, "Po", 0.0) == pytest.approx(-1.0 / g)
        assert cf.transfer_eval(linear_plant, "Pd", 0.0) == pytest.approx(1.0 / g)

    def test_cancellation_identity_at_reference_point(self, linear_plant):
        s = 0.1j
        res = cf.transfer_eval(linear_plant, "Pc", s) * cf.transfer_eval(
            linear_plant, "Po", s
        ) + cf.transfer_eval(linear_plant, "Pd", s)
        assert abs(res) < 1e-12

    def test_cancellation_identity_fuzzed_imaginary_axis(self, linear_plant):
        rng = np.random.default_rng(17)
        omegas = rng.uniform(1e-4, 50.0, size=100)
        for w in omegas:
            s = 1j * w
            res = cf.transfer_eval(linear_plant, "Pc", s) * cf.transfer_eval(
                linear_plant, "Po", s
            ) + cf.transfer_eval(linear_plant, "Pd", s)
            assert abs(res) < 1e-10

    def test_pole_proximity_guard(self):
        # gamma = -0.5 puts a real positive pole at s = ln(1/c)/tau with
        # c = l1 (gamma + l2) / (l2 (l1 - gamma))
        plant = cf.LinearPlant(a=2.0, b=1.0, gamma=-0.5, length=100.0)
        c = plant.lambda1 * (plant.gamma + plant.lambda2) / (
            plant.lambda2 * (plant.lambda1 - plant.gamma)
        )
        s_pole = math.log(1.0 / c) / plant.tau
        with pytest.raises(PoleProximityError):
            cf.transfer_eval(plant, "Po", complex(s_pole))

    def test_unknown_kind_rejected(self, linear_plant):
        with pytest.raises(ValueError):
            cf.transfer_eval(linear_plant, "Px", 0.0)


class TestStabilityConditions:
    def test_gamma_equal_lambda1_is_stable(self):
        plant = cf.LinearPlant(a=2.0, b=1.0, gamma=2.0, length=10.0)
        assert cf.plant_poles_stable(plant)

    def test_controller_always_stable_for_positive_b(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            plant = cf.LinearPlant(
                a=rng.uniform(0.1, 50.0), b=rng.uniform(0.01, 10.0), gamma=1.0, length=5.0
            )
            assert cf.controller_poles_stable(plant)

    def test_controller_unstable_when_left_speed_dominates(self):
        # lambda1 = 1, lambda2 = 2 realized by a = 2, b = -1
        plant = cf.LinearPlant(a=2.0, b=-1.0, gamma=0.1, length=1.0)
        assert plant.lambda1 == pytest.approx(1.0)
        assert plant.lambda2 == pytest.approx(2.0)
        assert not cf.controller_poles_stable(plant)

    def test_gamma_at_minus_lambda2_rejected(self):
        plant = cf.LinearPlant(a=2.0, b=1.0, gamma=-1.0, length=1.0)
        with pytest.raises(ValueError):
            cf.plant_poles_stable(plant)

    def test_delay_ordering_when_b_positive(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            plant = cf.LinearPlant(
                a=rng.uniform(0.1, 50.0), b=rng.uniform(0.01, 10.0), gamma=0.0, length=3.0
            )
            assert plant.tau1 < plant.tau2


class TestDelayLine:
    def test_lag_zero_returns_latest(self):
        line = DelayLine(init_value=5.0, horizon=10.0)
        line.append(0.0, 1.0)
        line.append(1.0, 2.0)
        assert line.value_at(1.0) == 2.0

    def test_beyond_history_returns_init(self):
        line = DelayLine(init_value=5.0, horizon=10.0)
        line.append(0.0, 1.0)
        assert line.value_at(-3.0) == 5.0

    def test_linear_interpolation_is_exact_on_linear_data(self):
        line = DelayLine(init_value=0.0, horizon=100.0)
        for t in np.arange(0.0, 10.5, 0.5):
            line.append(float(t), 3.0 * float(t) + 1.0)
        for t in np.linspace(0.2, 9.7, 37):
            assert line.value_at(float(t)) == pytest.approx(3.0 * t + 1.0, abs=1e-12)

    def test_non_monotone_append_rejected(self):
        line = DelayLine(init_value=0.0, horizon=10.0)
        line.append(1.0, 1.0)
        with pytest.raises(ValueError):
            line.append(1.0, 2.0)


class TestFeedforwardRecursion:
    def test_constant_disturbance_holds_the_fixed_point(self, linear_plant):
        ff = cf.LinearFeedforward(linear_plant)
        u_star = linear_plant.steady_control
        for k in range(1, 200):
            u = ff.step(linear_plant.d0, 0.5 * k)
            assert u == pytest.approx(u_star, abs=1e-13)

    def test_non_monotone_time_rejected(self, linear_plant):
        ff = cf.LinearFeedforward(linear_plant)
        ff.step(1.0, 1.0)
        with pytest.raises(ValueError):
            ff.step(1.0, 1.0)

    def test_functional_alias(self, linear_plant):
        ff = cf.LinearFeedforward(linear_plant)
        assert linear_feedforward_step(ff, linear_plant.d0, 1.0) == pytest.approx(
            linear_plant.steady_control
        )

    def test_equal_speeds_step_matches_convolution_oracle(self):
        # lambda1 = lambda2 = 1: the series P_c = 2 e^(-s tau1) sum (-1)^k e^(-s k tau)
        # alternates with ratio -1 contributions
        plant = cf.LinearPlant(a=1.0, b=0.0, gamma=0.5, length=1.0, set_point=1.0, d0=0.5)
        assert plant.lambda1 == plant.lambda2 == 1.0
        delta = 0.3
        step_time = 0.25  # a sampled instant, clear of the pre-history boundary
        dist = cf.Signal.smooth_step(plant.d0, plant.d0 + delta, step_time, 0.0)
        ff = cf.LinearFeedforward(plant)

        def oracle(t):
            # U*(t) + (1 + r) sum_k (-r)^k D~(t - tau1 - k tau), r = 1
            u = plant.steady_control
            k = 0
            while t - plant.tau1 - k * plant.tau >= step_time:
                u += 2.0 * delta * (-1.0) ** k
                k += 1
            return u

        dt = 0.05  # divides tau1 = 1 and tau = 2 exactly
        for n in range(1, 200):
            t = n * dt
            u = ff.step(cf.eval_signal(dist, t), t)
            assert u == pytest.approx(oracle(t), abs=1e-12), f"t = {t}"

    def test_bounded_output_for_bounded_input(self):
        plant = cf.LinearPlant(a=2.0, b=1.0, gamma=1.0, length=10.0, set_point=0.0, d0=0.0)
        r = plant.lambda2 / plant.lambda1
        rng = np.random.default_rng(31)
        # random smooth bounded disturbance over a 10 tau horizon
        knots = np.linspace(0.0, 10.0 * plant.tau, 60)
        dist = cf.Signal.from_samples(zip(knots, rng.uniform(-1.0, 1.0, size=60)))
        ff = cf.LinearFeedforward(plant, history_slack=plant.tau)
        sup_d = 1.0
        bound = (1.0 + r) / (1.0 - r) * sup_d
        dt = plant.tau / 40.0
        for n in range(1, int(10.0 * plant.tau / dt)):
            u = ff.step(cf.eval_signal(dist, n * dt), n * dt)
            assert abs(u - plant.steady_control) <= bound + 1e-12


class TestLinearPlantValidation:
    def test_requires_positive_a(self):
        with pytest.raises(ValueError):
            cf.LinearPlant(a=0.0, b=1.0, gamma=1.0, length=1.0)

    def test_requires_positive_length(self):
        with pytest.raises(ValueError):
            cf.LinearPlant(a=1.0, b=1.0, gamma=1.0, length=0.0)

    def test_speed_and_delay_relations(self, linear_plant):
        assert linear_plant.lambda1 == pytest.approx(2.0)
        assert linear_plant.lambda2 == pytest.approx(1.0)
        assert linear_plant.tau1 == pytest.approx(50.0)
        assert linear_plant.tau2 == pytest.approx(100.0)
        assert linear_plant.tau == pytest.approx(150.0)


class TestFrequencyCsv:
    def test_columns_and_determinism(self, linear_plant, tmp_path):
        omegas = np.logspace(-2, 1, 20)
        p1 = tmp_path / "po_a.csv"
        p2 = tmp_path / "po_b.csv"
        cf.linear.write_frequency_csv(linear_plant, "Po", omegas, p1)
        cf.linear.write_frequency_csv(linear_plant, "Po", omegas, p2)
        lines = p1.read_text().splitlines()
        assert lines[0] == "omega,re,im"
        assert len(lines) == 21
        assert p1.read_bytes() == p2.read_bytes()
