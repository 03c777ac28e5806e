"""Plant, gate, grid, state and signal behaviour."""

import numpy as np
import pytest

import channelff as cf
from channelff.errors import BoundaryDomainError, DepthUnderflow, NonHyperbolicError


def central_diff(fn, H, Q, step=1e-5):
    """Finite-difference oracle for both partials of fn(H, Q)."""
    d_h = (fn(H + step, Q) - fn(H - step, Q)) / (2.0 * step)
    d_q = (fn(H, Q + step) - fn(H, Q - step)) / (2.0 * step)
    return float(d_h), float(d_q)


class TestSaintVenant:
    def test_closed_form_partials_at_reference_state(self):
        model = cf.saint_venant_model(0.01, 9.81)
        # hand-evaluated: a = 9.81*5 - 4/25, b = 2*2/5
        assert model.flux_dh(5.0, 2.0) == pytest.approx(48.89, abs=1e-12)
        assert model.flux_dq(5.0, 2.0) == pytest.approx(0.8, abs=1e-15)

    def test_frictionless_zero_flow_has_no_source(self):
        model = cf.saint_venant_model(0.0)
        assert model.source(3.0, 0.0) == 0.0
        assert model.source_dh(3.0, 0.0) == 0.0
        assert model.source_dq(3.0, 0.0) == 0.0

    def test_partials_match_finite_differences(self):
        model = cf.saint_venant_model(0.01, 9.81)
        d_h, d_q = central_diff(model.flux, 5.0, 2.0)
        assert model.flux_dh(5.0, 2.0) == pytest.approx(d_h, rel=1e-6)
        assert model.flux_dq(5.0, 2.0) == pytest.approx(d_q, rel=1e-6)
        d_h, d_q = central_diff(model.source, 5.0, 2.0)
        assert model.source_dh(5.0, 2.0) == pytest.approx(d_h, rel=1e-6)
        assert model.source_dq(5.0, 2.0) == pytest.approx(d_q, rel=1e-6)

    def test_partials_match_finite_differences_fuzzed(self):
        rng = np.random.default_rng(7)
        model = cf.saint_venant_model(0.02, 9.81)
        for _ in range(50):
            H = rng.uniform(0.5, 10.0)
            Q = rng.uniform(0.1, 0.5) * H * np.sqrt(9.81 * H)  # subcritical
            for fn, dh, dq in (
                (model.flux, model.flux_dh, model.flux_dq),
                (model.source, model.source_dh, model.source_dq),
            ):
                e_h, e_q = central_diff(fn, H, Q)
                assert dh(H, Q) == pytest.approx(e_h, rel=1e-6, abs=1e-10)
                assert dq(H, Q) == pytest.approx(e_q, rel=1e-6, abs=1e-10)

    def test_wave_speed_identities_at_subcritical_states(self):
        rng = np.random.default_rng(11)
        model = cf.saint_venant_model(0.01)
        for _ in range(50):
            H = rng.uniform(0.5, 10.0)
            Q = rng.uniform(0.0, 0.9) * H * np.sqrt(9.81 * H)
            a = float(model.flux_dh(H, Q))
            b = float(model.flux_dq(H, Q))
            assert b * b + 4.0 * a > 0.0
            l1, l2 = cf.characteristic_speeds(a, b)
            assert l1 * l2 == pytest.approx(a, rel=1e-12)
            assert l1 - l2 == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_rejects_non_positive_depth(self):
        model = cf.saint_venant_model(0.01)
        with pytest.raises(DepthUnderflow):
            model.flux(0.0, 1.0)
        with pytest.raises(DepthUnderflow):
            model.flux_dh(np.array([2.0, -1.0]), np.array([1.0, 1.0]))

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            cf.saint_venant_model(-0.1)
        with pytest.raises(ValueError):
            cf.saint_venant_model(0.01, gravity=0.0)


class TestGates:
    def test_head_inversion_example(self):
        gates = cf.gate_boundary_maps(2.0)
        # Q = c_g D^(3/2) inverted by hand: D = 1 m for Q = 2, c_g = 2
        assert gates.alpha(5.0, 2.0) == pytest.approx(1.0, abs=1e-14)
        assert gates.beta(5.0, 2.0) == pytest.approx(4.0, abs=1e-14)

    def test_partials_match_finite_differences(self):
        gates = cf.gate_boundary_maps(2.0)
        for fn, dh, dq in (
            (gates.alpha, gates.alpha_dh, gates.alpha_dq),
            (gates.beta, gates.beta_dh, gates.beta_dq),
        ):
            e_h, e_q = central_diff(fn, 5.0, 2.0)
            assert float(dh(5.0, 2.0)) == pytest.approx(e_h, rel=1e-6, abs=1e-10)
            assert float(dq(5.0, 2.0)) == pytest.approx(e_q, rel=1e-6)

    def test_linearized_gate_slope_consistent_with_downstream_gain(self):
        # -beta_q / beta_h = 2 / (3 (c_g^2 Q*)^(1/3)) = 1/3 at Q* = 2, c_g = 2,
        # the reciprocal of the downstream gain beta_L = 3
        gates = cf.gate_boundary_maps(2.0)
        slope = -float(gates.beta_dq(5.0, 2.0)) / float(gates.beta_dh(5.0, 2.0))
        assert slope == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert 1.0 / slope == pytest.approx(cf.downstream_gate_gain(2.0, 2.0), rel=1e-12)

    def test_rejects_non_positive_flow(self):
        gates = cf.gate_boundary_maps(2.0)
        with pytest.raises(BoundaryDomainError):
            gates.alpha(5.0, 0.0)
        with pytest.raises(BoundaryDomainError):
            gates.beta(5.0, -1.0)

    def test_rejects_non_positive_coefficient(self):
        with pytest.raises(ValueError):
            cf.gate_boundary_maps(0.0)


class TestLinearMaps:
    def test_relations_and_partials(self):
        bmaps = cf.linear_boundary_maps(1.5)
        assert float(bmaps.alpha(3.0, 2.0)) == 2.0
        assert float(bmaps.beta(3.0, 2.0)) == pytest.approx(2.0 - 4.5)
        e_h, e_q = central_diff(bmaps.beta, 3.0, 2.0)
        assert float(bmaps.beta_dh(3.0, 2.0)) == pytest.approx(e_h, abs=1e-9)
        assert float(bmaps.beta_dq(3.0, 2.0)) == pytest.approx(e_q, abs=1e-9)

    def test_linear_model_is_hyperbolic_and_sourceless(self):
        model = cf.linear_model(2.0, 1.0)
        assert float(model.flux(1.0, 3.0)) == pytest.approx(5.0)
        assert float(model.source(1.0, 3.0)) == 0.0
        with pytest.raises(NonHyperbolicError):
            cf.linear_model(-1.0, 0.0)


class TestGridAndState:
    def test_grid_spacing(self):
        grid = cf.Grid(5000.0, 200)
        assert grid.n_nodes == 201
        assert grid.dx == pytest.approx(25.0)
        x = grid.x
        assert x[0] == 0.0 and x[-1] == 5000.0
        assert np.all(np.diff(x) > 0.0)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            cf.Grid(0.0, 10)
        with pytest.raises(ValueError):
            cf.Grid(100.0, 1)

    def test_state_requires_positive_depth_and_matching_shapes(self):
        with pytest.raises(DepthUnderflow):
            cf.FieldState(0.0, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            cf.FieldState(0.0, np.ones(3), np.ones(4))


class TestSignals:
    def test_constant(self):
        sig = cf.Signal.constant(2.0)
        assert cf.eval_signal(sig, 0.0) == 2.0
        assert cf.eval_signal(sig, 1e6) == 2.0

    def test_smooth_step_midpoint_and_clamping(self):
        sig = cf.Signal.smooth_step(2.0, 2.5, 900.0, 120.0)
        assert cf.eval_signal(sig, 0.0) == 2.0
        assert cf.eval_signal(sig, 960.0) == pytest.approx(2.25, abs=1e-14)
        assert cf.eval_signal(sig, 1020.0) == 2.5
        assert cf.eval_signal(sig, 1e9) == 2.5

    def test_samples_interpolation(self):
        sig = cf.Signal.from_samples([(0.0, 1.0), (10.0, 2.0)])
        assert cf.eval_signal(sig, 5.0) == pytest.approx(1.5)
        assert cf.eval_signal(sig, -1.0) == 1.0
        assert cf.eval_signal(sig, 11.0) == 2.0

    def test_monotone_ramp_is_non_decreasing_and_attains_endpoints(self):
        sig = cf.Signal.smooth_step(1.0, 3.0, 10.0, 50.0)
        ts = np.linspace(0.0, 100.0, 1001)
        vals = np.array([cf.eval_signal(sig, t) for t in ts])
        assert np.all(np.diff(vals) >= -1e-15)
        assert vals[ts <= 10.0].max() == 1.0
        assert np.all(vals[ts >= 60.0] == 3.0)

    def test_pulse_shape_is_continuous(self):
        sig = cf.Signal.pulse(2.0, 2.5, 2.2, 900.0, 120.0, 240.0, 240.0)
        assert cf.eval_signal(sig, 0.0) == 2.0
        assert cf.eval_signal(sig, 1100.0) == 2.5
        assert cf.eval_signal(sig, 1e6) == pytest.approx(2.2)
        ts = np.linspace(800.0, 1700.0, 9001)
        vals = np.array([cf.eval_signal(sig, t) for t in ts])
        assert np.max(np.abs(np.diff(vals))) < 0.01  # no jumps at segment seams

    def test_zero_duration_ramp_is_a_step(self):
        sig = cf.Signal.smooth_step(0.5, 0.8, 0.0, 0.0)
        assert cf.eval_signal(sig, -1e-9) == 0.5
        assert cf.eval_signal(sig, 0.0) == 0.8

    def test_gate_head_signal_maps_levels(self):
        flow = cf.Signal.smooth_step(2.0, 2.5, 900.0, 120.0)
        head = cf.gate_head_signal(flow, 2.0)
        assert cf.eval_signal(head, 0.0) == pytest.approx(1.0)
        assert cf.eval_signal(head, 2000.0) == pytest.approx(1.25 ** (2.0 / 3.0))

    def test_sample_times_must_increase(self):
        with pytest.raises(ValueError):
            cf.Signal.from_samples([(0.0, 1.0), (0.0, 2.0)])
