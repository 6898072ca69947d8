import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tlres import (
    AttenuationModel,
    DomainError,
    participation,
    perturbative_limits,
    qi_forward,
    tan_delta_single_mode,
)
from tlres.loss import tan_delta_participation_form
from tlres.resonance import max_participation_point


class TestQiForward:
    def test_unloaded_open_resonator(self):
        br = qi_forward(2 * math.pi, 0.0, AttenuationModel(1e5, 1.0))
        assert br.q_i_inv == pytest.approx(1e-5, rel=1e-12, abs=0)
        assert br.q_dut_inv == pytest.approx(0.0, abs=1e-20)

    def test_breakdown_sums(self):
        br = qi_forward(4.0, 3e-5, AttenuationModel(2e5, 1.0))
        assert br.q_i_inv == br.q_dut_inv + br.q_res_inv
        assert br.q_i == pytest.approx(1 / br.q_i_inv)

    def test_dut_term_is_twice_p_tan_delta(self):
        phi, t = 5.0, 2e-5
        br = qi_forward(phi, t, AttenuationModel(1e5))
        assert br.q_dut_inv == pytest.approx(2 * participation(phi) * t, rel=1e-14, abs=0)

    def test_s0_is_frequency_independent_alpha(self):
        phi, q0 = 4.2, 1e5
        br = qi_forward(phi, 0.0, AttenuationModel(q0, 0.0))
        assert br.q_res_inv == pytest.approx(2 * math.pi / q0 / (phi + abs(math.sin(phi))))

    def test_dut_a_round_trip(self):
        # DUT A first mode with the calibrated f_open; Q_open from the two-mode solve
        phi = 2 * math.pi * 3.410e9 / 3.899e9
        q0 = 1 / (
            (phi + abs(math.sin(phi))) / 2.103e5 - 2 * abs(math.sin(phi)) * 5.63e-6
        ) * 2 * math.pi * (phi / (2 * math.pi))
        br = qi_forward(phi, 5.63e-6, AttenuationModel(q0, 1.0))
        assert br.q_i == pytest.approx(2.103e5, rel=1e-12, abs=0)

    def test_lossy_dut_reduces_q(self):
        q0 = 1e5
        br = qi_forward(4.5, 1e-3, AttenuationModel(q0, 1.0))
        assert br.q_i < q0

    @pytest.mark.parametrize("phi", [3.5, 4.5, 5.5, 7.0, 9.0])
    def test_lossless_dut_raises_q_above_open(self, phi):
        # dielectric-dominated line: the unloaded line has the same Q in every mode
        q0 = 1e5
        assert qi_forward(phi, 0.0, AttenuationModel(q0, 1.0)).q_i > q0

    def test_lossless_inductive_dut_s0(self):
        q0 = 1e5
        assert qi_forward(7.5, 0.0, AttenuationModel(q0, 0.0)).q_i > q0

    def test_monotone_in_tan_delta(self):
        t = np.logspace(-8, -2, 50)
        q = qi_forward(4.5, t, AttenuationModel(1e5)).q_i_inv
        assert np.all(np.diff(q) > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            qi_forward(0.0, 1e-6, AttenuationModel(1e5))
        with pytest.raises(DomainError):
            qi_forward(1.0, -1e-6, AttenuationModel(1e5))


class TestTanDeltaSingleMode:
    @settings(max_examples=500, deadline=None)
    @given(
        st.floats(math.log(1e-8), math.log(1e-2)),
        st.floats(math.pi / 2, 6 * math.pi),
        st.sampled_from([0.0, 1.0]),
        st.floats(math.log(1e3), math.log(1e7)),
    )
    def test_exact_inverse(self, log_t, phi, s, log_q0):
        assume(abs(math.sin(phi)) >= 1e-3)
        t, q0 = math.exp(log_t), math.exp(log_q0)
        br = qi_forward(phi, t, AttenuationModel(q0, s))
        # Q_i is rounded to double, so tan delta is only resolvable when the DUT share of the loss is not tiny
        assume(br.q_dut_inv / br.q_i_inv >= 1e-3)
        assert tan_delta_single_mode(br.q_i, q0, phi, s) == pytest.approx(t, rel=1e-12, abs=0)

    @settings(max_examples=500, deadline=None)
    @given(
        st.floats(math.log(1e3), math.log(1e7)),
        st.floats(0.5, 2.0),
        st.floats(math.pi / 2, 6 * math.pi),
        st.sampled_from([0.0, 1.0]),
    )
    def test_exact_inverse_from_q(self, log_q0, ratio, phi, s):
        assume(abs(math.sin(phi)) >= 1e-3)
        q0 = math.exp(log_q0)
        q_i = q0 * ratio
        t = tan_delta_single_mode(q_i, q0, phi, s)
        assume(t >= 0)
        assert qi_forward(phi, t, AttenuationModel(q0, s)).q_i == pytest.approx(q_i, rel=1e-12, abs=0)

    def test_rounding_limit(self):
        # a DUT carrying 1e-7 of the loss cannot be recovered to 1e-12 from a double precision Q_i
        phi, q0 = 4.5, 1e3
        t = 1e-10
        br = qi_forward(phi, t, AttenuationModel(q0))
        assert br.q_dut_inv / br.q_i_inv < 1e-6
        err = abs(tan_delta_single_mode(br.q_i, q0, phi) / t - 1)
        assert err * br.q_dut_inv / br.q_i_inv < 1e-15

    def test_participation_form_agrees(self, rng):
        phi = rng.uniform(0.6, 18.0, 1000)
        phi = phi[np.abs(np.sin(phi)) > 1e-2]
        q_i = rng.uniform(1e4, 1e6, phi.size)
        q0 = rng.uniform(1e4, 1e6, phi.size)
        for s in (0.0, 1.0):
            a = tan_delta_single_mode(q_i, q0, phi, s)
            b = tan_delta_participation_form(q_i, q0, phi, s)
            scale = 1 / q_i + 1 / q0
            assert np.allclose(a, b, rtol=0, atol=1e-12 * np.max(scale / participation(phi)))

    def test_q_i_equal_q_open_s0(self):
        q0 = 1e5
        for phi in (2.0, 4.5, 5.5, 8.0):
            p = participation(phi)
            expected = (1 / (2 * p)) / q0 * (1 - (1 - p) * 2 * math.pi / phi)
            assert tan_delta_single_mode(q0, q0, phi, 0.0) == pytest.approx(expected, rel=1e-10, abs=0)

    def test_negative_with_low_reference(self):
        phi = 2 * math.pi * 3.410e9 / 3.899e9
        assert tan_delta_single_mode(2.103e5, 1.2e5, phi, 1.0) < 0

    def test_zero_participation(self):
        with pytest.raises(DomainError):
            tan_delta_single_mode(1e5, 1e5, 2 * math.pi, 1.0)

    def test_nonpositive_q(self):
        with pytest.raises(DomainError):
            tan_delta_single_mode(0.0, 1e5, 4.0)


class TestPerturbativeLimits:
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    @pytest.mark.parametrize("sign", [1, -1])
    def test_near_multiple_of_pi(self, m, sign):
        cmp = perturbative_limits(m * math.pi + sign * 1e-4, 1e-5, AttenuationModel(1e5, 1.0))
        assert cmp.relative_deviation < 1e-6
        assert cmp.order == m

    def test_deviation_shrinks(self):
        att = AttenuationModel(1e5, 1.0)
        devs = [perturbative_limits(2 * math.pi - e, 1e-5, att).relative_deviation for e in (1e-1, 1e-2, 1e-3)]
        assert devs[0] > devs[1] > devs[2]

    def test_non_perturbative_at_max_p(self):
        phi = max_participation_point(1, "capacitor").phi_star
        cmp = perturbative_limits(phi, 1e-5, AttenuationModel(1e5, 1.0))
        assert cmp.relative_deviation > 0.1

    def test_open_point_has_no_dut_loss(self):
        assert qi_forward(2 * math.pi, 1e-3, AttenuationModel(1e5)).q_dut_inv == pytest.approx(0.0, abs=1e-18)
