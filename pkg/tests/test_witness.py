"""Witness functional against operator-expectation references."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings as hsettings, strategies as st

import oracles as orc
from phasewitness.noise import DetectionNoise, ThermalNoise
from phasewitness.qp_core import OrderParam
from phasewitness.states import TmsvSpec, tmsv_w1, tmsv_w2
from phasewitness.witness import (
    CLAMP_BOUNDED,
    CLAMP_FROZEN,
    CLAMP_LOSS_CHANNEL,
    FORM_TOL,
    BellSettings,
    WitnessReport,
    bell_value,
    bell_value_detection,
    bell_value_thermal,
    bounded_eigenvalue,
    effective_eigenvalue,
    observable_eigenvalue,
)

SETTINGS = BellSettings(0.1 + 0.05j, -0.2 + 0.0j, 0.15j, 0.4 - 0.1j)


def ideal_bell(spec: TmsvSpec, settings: BellSettings, s: float) -> float:
    return bell_value(
        lambda a, b: tmsv_w2(spec, a, b, s),
        lambda a: tmsv_w1(spec, a, s),
        lambda b: tmsv_w1(spec, b, s),
        settings,
        s,
    )


def as_tuple(settings: BellSettings) -> tuple[complex, complex, complex, complex]:
    return (settings.a1, settings.a2, settings.b1, settings.b2)


class TestEigenvalues:
    def test_endpoints_are_exact(self):
        for s in (0.0, -0.3, -0.71, -1.0):
            assert observable_eigenvalue(0, s) == 1.0
            assert observable_eigenvalue(1, s) == -1.0

    def test_alternating_at_zero_order(self):
        for n in range(8):
            assert observable_eigenvalue(n, 0.0) == pytest.approx((-1.0) ** n, abs=1e-15)

    def test_interior_value(self):
        # ratio(-1/2) = -1/3, so e_2 = (3/2)(1/9) - 1/2 = -1/3.
        assert observable_eigenvalue(2, -0.5) == pytest.approx(-1.0 / 3.0, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            observable_eigenvalue(-1, 0.0)
        with pytest.raises(ValueError):
            observable_eigenvalue(2, OrderParam.d_outcome(3))

    @given(
        st.integers(min_value=0, max_value=60),
        st.floats(min_value=-1.0, max_value=0.0),
    )
    def test_spectrum_is_bounded(self, n, s):
        assert abs(observable_eigenvalue(n, s)) <= 1.0 + 1e-12

    def test_three_spectra_coincide_at_onset(self):
        for n in range(7):
            standard = observable_eigenvalue(n, -1.0)
            assert bounded_eigenvalue(n, -1.0) == pytest.approx(standard, abs=1e-15)
            assert effective_eigenvalue(n, -1.0) == pytest.approx(standard, abs=1e-15)

    @given(
        st.integers(min_value=0, max_value=512),
        st.floats(min_value=-50.0, max_value=-1.0),
    )
    def test_bounded_spectrum_stays_in_unit_interval(self, n, s_prime):
        v = bounded_eigenvalue(n, s_prime)
        assert -1.0 <= v <= 1.0 + 1e-12


class TestBellSettings:
    def test_vector_roundtrip(self):
        vec = SETTINGS.to_vector()
        assert BellSettings.from_vector(vec) == SETTINGS
        assert len(vec) == 8

    def test_validation(self):
        with pytest.raises(ValueError):
            BellSettings(float("nan"), 0.0, 0.0, 0.0)


class TestWitnessReport:
    def test_rejects_inconsistent_magnitude(self):
        with pytest.raises(ValueError):
            WitnessReport(SETTINGS, OrderParam.from_real(-0.5), 1.5, 1.4, False, False)

    def test_rejects_inconsistent_flag(self):
        with pytest.raises(ValueError):
            WitnessReport(SETTINGS, OrderParam.from_real(-0.5), 2.5, 2.5, False, False)


class TestIdealBell:
    def test_vacuum_at_origin_settings(self):
        spec = TmsvSpec(0.0)
        origin = BellSettings(0.0, 0.0, 0.0, 0.0)
        assert ideal_bell(spec, origin, -1.0) == pytest.approx(2.0, abs=1e-12)

    def test_expansion_identity(self):
        # <A x B> on the pair state decomposes into the quasiprobability
        # combination (1-s)^4 (pi^2/4) W2 + s(1-s)^2 (pi/2)(W1a + W1b) + s^2.
        xi, s, dim = 0.4, -0.5, 70
        spec = TmsvSpec(xi)
        c = orc.tmsv_amplitudes(xi, dim)
        eigs = orc.eig_standard(s, dim)
        for a, b in [(0.3 + 0.2j, -0.4 + 0.1j), (0.1, 0.5j)]:
            op_a = orc.displaced_diagonal(eigs, a)
            op_b = orc.displaced_diagonal(eigs, b)
            lhs = orc.pair_expectation(c, op_a, op_b).real
            rhs = (
                (1.0 - s) ** 4 * (math.pi**2 / 4.0) * tmsv_w2(spec, a, b, s)
                + s
                * (1.0 - s) ** 2
                * (math.pi / 2.0)
                * (tmsv_w1(spec, a, s) + tmsv_w1(spec, b, s))
                + s * s
            )
            assert lhs == pytest.approx(rhs, abs=1e-12)

    @pytest.mark.parametrize("s", [0.0, -0.5, -1.0])
    def test_matches_operator_sum(self, s):
        xi = 0.3
        value = ideal_bell(TmsvSpec(xi), SETTINGS, s)
        reference = orc.chsh_value(xi, as_tuple(SETTINGS), orc.eig_standard(s, 70))
        assert value == pytest.approx(reference, abs=1e-9)

    def test_coincident_settings_collapse_to_single_correlator(self):
        xi, s, z, w = 0.5, -0.3, 0.35 + 0.1j, -0.2 + 0.25j
        coincident = BellSettings(z, z, w, w)
        value = ideal_bell(TmsvSpec(xi), coincident, s)
        eigs = orc.eig_standard(s, 70)
        pair = orc.pair_expectation(
            orc.tmsv_amplitudes(xi, 70),
            orc.displaced_diagonal(eigs, z),
            orc.displaced_diagonal(eigs, w),
        ).real
        assert value == pytest.approx(2.0 * pair, abs=1e-12)
        assert abs(value) <= 2.0 + 1e-12

    def test_order_range_is_enforced(self):
        spec = TmsvSpec(0.3)
        with pytest.raises(ValueError):
            ideal_bell(spec, SETTINGS, 0.3)
        with pytest.raises(ValueError):
            bell_value(
                lambda a, b: 0.0, lambda a: 0.0, lambda b: 0.0, SETTINGS, -1.2
            )
        with pytest.raises(ValueError):
            bell_value(
                lambda a, b: 0.0,
                lambda a: 0.0,
                lambda b: 0.0,
                SETTINGS,
                OrderParam.d_outcome(3),
            )
        out = bell_value(
            lambda a, b: 0.0,
            lambda a: 0.0,
            lambda b: 0.0,
            SETTINGS,
            -1.2,
            allow_out_of_range=True,
        )
        assert out == pytest.approx(2.0 * 1.2**2, abs=1e-15)


class TestDetectionWitness:
    def test_unit_efficiency_reduces_to_ideal(self):
        spec = TmsvSpec(0.3)
        report = bell_value_detection(spec, SETTINGS, -0.4, DetectionNoise(1.0))
        assert report.bell_value == pytest.approx(
            ideal_bell(spec, SETTINGS, -0.4), abs=1e-14
        )
        assert not report.clamped
        assert report.s_effective.real == pytest.approx(-0.4, abs=1e-15)

    def test_half_efficiency_reaches_onset_exactly(self):
        report = bell_value_detection(
            TmsvSpec(0.3), SETTINGS, 0.0, DetectionNoise(0.5)
        )
        assert report.s_effective.real == -1.0
        assert not report.clamped

    def test_unclamped_matches_rescaled_operator_sum(self):
        xi, s, eta = 0.3, -0.3, 0.7
        report = bell_value_detection(TmsvSpec(xi), SETTINGS, s, DetectionNoise(eta))
        s_prime = 1.0 - (1.0 - s) / eta
        reference = orc.chsh_value(xi, as_tuple(SETTINGS), orc.eig_standard(s_prime, 70))
        assert not report.clamped
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_bounded_rule_matches_its_operator_sum(self):
        xi, s, eta = 0.3, 0.0, 0.4
        report = bell_value_detection(
            TmsvSpec(xi), SETTINGS, s, DetectionNoise(eta), CLAMP_BOUNDED
        )
        assert report.clamped
        assert report.s_effective.real == pytest.approx(-1.5, abs=1e-15)
        reference = orc.chsh_value(xi, as_tuple(SETTINGS), orc.eig_bounded(-1.5, 70))
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_frozen_rule_matches_its_operator_sum(self):
        xi, s, eta = 0.3, 0.0, 0.4
        report = bell_value_detection(
            TmsvSpec(xi), SETTINGS, s, DetectionNoise(eta), CLAMP_FROZEN
        )
        assert report.clamped
        reference = orc.chsh_value(xi, as_tuple(SETTINGS), orc.eig_frozen(-1.5, 70))
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_loss_channel_rule_matches_lossy_operator_sum(self):
        # Settings are physical displacements here; the observable is the
        # on-off one and the state carries the loss.
        xi, s, eta = 0.3, 0.0, 0.4
        report = bell_value_detection(
            TmsvSpec(xi), SETTINGS, s, DetectionNoise(eta), CLAMP_LOSS_CHANNEL
        )
        assert report.clamped
        reference = orc.chsh_value(
            xi, as_tuple(SETTINGS), orc.eig_standard(-1.0, 70), loss_eta=eta
        )
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_unknown_clamp_mode(self):
        with pytest.raises(ValueError):
            bell_value_detection(
                TmsvSpec(0.3), SETTINGS, 0.0, DetectionNoise(0.4), "nonsense"
            )

    def test_forms_agree(self):
        report = bell_value_detection(
            TmsvSpec(0.45), SETTINGS, -0.2, DetectionNoise(0.6)
        )
        assert report.meta["form_residual"] < FORM_TOL


class TestThermalWitness:
    def test_zero_time_reduces_to_ideal(self):
        spec = TmsvSpec(0.3)
        report = bell_value_thermal(spec, SETTINGS, -0.4, ThermalNoise(0.0))
        assert report.bell_value == pytest.approx(
            ideal_bell(spec, SETTINGS, -0.4), abs=1e-14
        )
        assert not report.clamped

    def test_unclamped_matches_rescaled_operator_sum(self):
        xi, s, r, nbar = 0.3, -0.5, 0.3, 0.2
        report = bell_value_thermal(TmsvSpec(xi), SETTINGS, s, ThermalNoise(r, nbar))
        t = math.sqrt(1.0 - r * r)
        s_prime = (s - r * r * (1.0 + 2.0 * nbar)) / (t * t)
        assert not report.clamped
        reference = orc.chsh_value(
            xi, as_tuple(SETTINGS), orc.eig_standard(s_prime, 70), point_scale=1.0 / t
        )
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_bounded_rule_matches_its_operator_sum(self):
        xi, s, r, nbar = 0.3, 0.0, 0.75, 0.5
        report = bell_value_thermal(
            TmsvSpec(xi), SETTINGS, s, ThermalNoise(r, nbar), CLAMP_BOUNDED
        )
        t_sq = 1.0 - r * r
        s_prime = (s - r * r * (1.0 + 2.0 * nbar)) / t_sq
        assert report.clamped
        reference = orc.chsh_value(
            xi,
            as_tuple(SETTINGS),
            orc.eig_bounded(s_prime, 70),
            point_scale=1.0 / math.sqrt(t_sq),
        )
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_frozen_rule_matches_its_operator_sum(self):
        xi, s, r = 0.3, 0.0, 0.8
        report = bell_value_thermal(
            TmsvSpec(xi), SETTINGS, s, ThermalNoise(r), CLAMP_FROZEN
        )
        t_sq = 1.0 - r * r
        s_prime = s / t_sq - r * r / t_sq
        reference = orc.chsh_value(
            xi,
            as_tuple(SETTINGS),
            orc.eig_frozen(s_prime, 70),
            point_scale=1.0 / math.sqrt(t_sq),
        )
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_loss_channel_rule_matches_lossy_operator_sum(self):
        xi, s, r = 0.3, 0.0, 0.8
        report = bell_value_thermal(
            TmsvSpec(xi), SETTINGS, s, ThermalNoise(r), CLAMP_LOSS_CHANNEL
        )
        reference = orc.chsh_value(
            xi,
            as_tuple(SETTINGS),
            orc.eig_standard(-1.0, 70),
            loss_eta=1.0 - r * r,
        )
        assert report.bell_value == pytest.approx(reference, abs=1e-10)

    def test_loss_channel_rule_needs_cold_environment(self):
        with pytest.raises(ValueError):
            bell_value_thermal(
                TmsvSpec(0.3), SETTINGS, 0.0, ThermalNoise(0.8, 0.5), CLAMP_LOSS_CHANNEL
            )

    @pytest.mark.parametrize("mode", [CLAMP_BOUNDED, CLAMP_FROZEN])
    def test_matches_detection_at_cold_environment(self, mode):
        # The nbar = 0 thermal interaction is detection loss at eta = t^2
        # up to the frame: thermal settings mu equal detection settings
        # mu / t.
        xi, s, r = 0.3, 0.0, 0.75
        t = math.sqrt(1.0 - r * r)
        thermal = bell_value_thermal(
            TmsvSpec(xi), SETTINGS, s, ThermalNoise(r), mode
        )
        rescaled = BellSettings.from_vector(
            tuple(v / t for v in SETTINGS.to_vector())
        )
        detection = bell_value_detection(
            TmsvSpec(xi), rescaled, s, DetectionNoise(t * t), mode
        )
        assert thermal.bell_value == pytest.approx(detection.bell_value, abs=1e-12)
        assert thermal.s_effective.real == pytest.approx(
            detection.s_effective.real, abs=1e-12
        )

    def test_matches_detection_in_loss_channel_frame(self):
        # The loss-channel rule stays in the measured frame on both
        # variants, so the settings map is the identity.
        xi, s, r = 0.3, 0.0, 0.8
        thermal = bell_value_thermal(
            TmsvSpec(xi), SETTINGS, s, ThermalNoise(r), CLAMP_LOSS_CHANNEL
        )
        detection = bell_value_detection(
            TmsvSpec(xi), SETTINGS, s, DetectionNoise(1.0 - r * r), CLAMP_LOSS_CHANNEL
        )
        assert thermal.bell_value == pytest.approx(detection.bell_value, abs=1e-12)

    @pytest.mark.parametrize("mode", [CLAMP_BOUNDED, CLAMP_FROZEN])
    def test_continuity_at_clamp_onset(self, mode):
        # eta = 1/2 at s = 0 lands exactly on s' = -1; the functional
        # must not jump across it.
        spec = TmsvSpec(0.3)
        eps = 1e-8
        below = bell_value_detection(
            spec, SETTINGS, 0.0, DetectionNoise(0.5 - eps), mode
        )
        above = bell_value_detection(
            spec, SETTINGS, 0.0, DetectionNoise(0.5 + eps), mode
        )
        assert below.clamped and not above.clamped
        assert abs(below.bell_value - above.bell_value) < 1e-6

    @hsettings(max_examples=40)
    @given(
        st.tuples(*[st.floats(min_value=-1.5, max_value=1.5) for _ in range(8)]),
        st.floats(min_value=-1.0, max_value=0.0),
        st.floats(min_value=0.3, max_value=1.0),
    )
    def test_report_invariants(self, vec, s, eta):
        report = bell_value_detection(
            TmsvSpec(0.3), BellSettings.from_vector(vec), s, DetectionNoise(eta)
        )
        assert report.bell_abs == abs(report.bell_value)
        assert report.violated == (report.bell_abs > 2.0)
        assert report.clamped == (report.s_effective.real < -1.0)
        assert report.meta["form_residual"] <= FORM_TOL
