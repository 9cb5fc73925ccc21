"""Pointer statistics: closed forms, wavefunction, regimes.

Hand-pinned interaction parameters (via from_components) isolate the
pointer model from the crystal optics; configurations that force phi = 0
or phi = pi stand in for exact phase matching.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wvatilt import (
    BoostSpec,
    DegeneratePostSelection,
    GridRequest,
    GridTooCoarseError,
    InteractionParams,
    Regime,
    RegimeLabel,
    SelectionSpec,
    SingularSelectionError,
    classify_regime,
    expectation_z,
    final_wavefunction,
    inverse_wva_prediction,
    moment,
    postselection_probability,
    weak_value,
    wva_prediction,
)

NO_BOOST = BoostSpec(0.0)
QUARTER_PI = math.pi / 4

# mpmath references
RATIO_X0P004_EPS0P04 = 24.9245203448
COT_0P01 = 99.9966666444
COT_0P045 = 22.2072201968
INVERSE_EXACT_REF = 6.67041573807e-6
INVERSE_SMALL_REF = 6.67726550079e-6


def pinned(gamma, phi, gamma_common=0.0):
    return InteractionParams.from_components(
        gamma_common=gamma_common, gamma=gamma, phi=phi
    )


class TestSelectionSpec:
    def test_beta_conventions(self):
        assert SelectionSpec(0.1).beta == pytest.approx(0.1 - QUARTER_PI)
        assert SelectionSpec(0.1, Regime.ANTI_COHERENCY).beta == pytest.approx(
            0.1 + QUARTER_PI
        )

    def test_epsilon_bounds(self):
        SelectionSpec(QUARTER_PI)  # closed upper end
        with pytest.raises(ValueError, match=r"epsilon in \(-pi/4, pi/4\]"):
            SelectionSpec(-QUARTER_PI)
        with pytest.raises(ValueError):
            SelectionSpec(1.0)

    def test_boost_validation(self):
        with pytest.raises(ValueError, match="k_sigma >= 0"):
            BoostSpec(-0.1)


class TestProbability:
    def test_half_at_quarter_pi_in_both_regimes(self, beam):
        ip = pinned(2e-6, 0.37)
        for regime in Regime:
            p = postselection_probability(
                ip, SelectionSpec(QUARTER_PI, regime), beam, NO_BOOST
            )
            assert p == pytest.approx(0.5, abs=1e-15)

    def test_perfect_dark_port(self, beam):
        p = postselection_probability(
            pinned(0.0, 0.0), SelectionSpec(0.0), beam, NO_BOOST
        )
        assert p == 0.0

    def test_bright_through_crossed_polarizers_at_pi_phase(self, beam):
        # deviation from 1 is the attenuation exponent (gamma/sigma)^2 / 4
        p = postselection_probability(
            pinned(1e-9, math.pi), SelectionSpec(0.0), beam, NO_BOOST
        )
        assert p == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=300, deadline=None)
    @given(
        gamma=st.floats(-1e-5, 1e-5),
        phi=st.floats(0.0, 400.0),
        epsilon=st.floats(-QUARTER_PI + 1e-9, QUARTER_PI),
        k_sigma=st.floats(0.0, 0.5),
        regime=st.sampled_from(list(Regime)),
    )
    def test_bounds(self, beam, gamma, phi, epsilon, k_sigma, regime):
        p = postselection_probability(
            pinned(gamma, phi), SelectionSpec(epsilon, regime), beam, BoostSpec(k_sigma)
        )
        assert 0.0 <= p <= 1.0


class TestExpectation:
    def test_common_shift_at_crossed_polarizers_on_matched_phase(self, beam):
        ip = pinned(3e-6, 0.0, gamma_common=-2e-4)
        assert expectation_z(ip, SelectionSpec(0.0), beam, NO_BOOST) == -2e-4

    def test_no_amplification_at_quarter_pi(self, beam):
        ip = pinned(3e-6, 1.23, gamma_common=-2e-4)
        z = expectation_z(ip, SelectionSpec(QUARTER_PI), beam, NO_BOOST)
        assert z == pytest.approx(-2e-4 + 3e-6, rel=1e-12)

    def test_reference_amplification(self, beam):
        gamma = 0.004 * beam.sigma
        z = expectation_z(pinned(gamma, 0.0), SelectionSpec(0.04), beam, NO_BOOST)
        assert z / gamma == pytest.approx(RATIO_X0P004_EPS0P04, rel=1e-9)
        assert z / gamma < 1 / math.tan(0.04)  # below the idealized cot

    def test_degenerate_dark_port_raises(self, beam):
        with pytest.raises(DegeneratePostSelection):
            expectation_z(pinned(0.0, 0.0), SelectionSpec(0.0), beam, NO_BOOST)

    def test_anti_coherency_mirrors_at_pi_phase(self, beam):
        gamma = 0.004 * beam.sigma
        sel = SelectionSpec(0.04, Regime.ANTI_COHERENCY)
        z = expectation_z(pinned(gamma, math.pi), sel, beam, NO_BOOST)
        assert z / gamma == pytest.approx(-RATIO_X0P004_EPS0P04, rel=1e-9)

    @settings(max_examples=300, deadline=None)
    @given(
        gamma=st.floats(1e-9, 1e-5),
        phi=st.floats(0.0, 50.0),
        epsilon=st.floats(1e-4, 0.3),
        k_sigma=st.floats(0.0, 0.3),
    )
    def test_labeling_symmetry(self, beam, gamma, phi, epsilon, k_sigma):
        # (gamma, epsilon) -> (-gamma, -epsilon) is a relabeling of the paths
        boost = BoostSpec(k_sigma)
        ip_plus, ip_minus = pinned(gamma, phi), pinned(-gamma, phi)
        sel_plus, sel_minus = SelectionSpec(epsilon), SelectionSpec(-epsilon)
        p_plus = postselection_probability(ip_plus, sel_plus, beam, boost)
        p_minus = postselection_probability(ip_minus, sel_minus, beam, boost)
        assert p_minus == pytest.approx(p_plus, rel=1e-12, abs=1e-15)
        if p_plus > 1e-9:
            z_plus = expectation_z(ip_plus, sel_plus, beam, boost)
            z_minus = expectation_z(ip_minus, sel_minus, beam, boost)
            assert z_minus == pytest.approx(z_plus, rel=1e-9, abs=1e-18)

    def test_shift_vanishes_without_differential_displacement(self, beam):
        # gamma = 0, phi = 0, no boost: nothing to amplify at any epsilon
        for eps in (0.01, 0.1, QUARTER_PI):
            z = expectation_z(pinned(0.0, 0.0, -1e-4), SelectionSpec(eps), beam, NO_BOOST)
            assert z == -1e-4

    def test_argmax_over_epsilon_matches_half_gamma_over_sigma(self, beam):
        for x in (0.002, 0.005, 0.01):
            gamma = x * beam.sigma
            ip = pinned(gamma, 0.0)
            eps_grid = np.linspace(x / 4, x, 4001)
            shifts = [
                expectation_z(ip, SelectionSpec(float(e)), beam, NO_BOOST)
                for e in eps_grid
            ]
            best = int(np.argmax(shifts))
            assert eps_grid[best] == pytest.approx(x / 2, rel=0.05)
            assert shifts[best] == pytest.approx(beam.sigma, rel=0.01)


class TestLimitConsistency:
    def test_reduces_to_selection_only_form_without_boost(self, beam):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            gamma = rng.uniform(-1e-5, 1e-5)
            phi = rng.uniform(0, 60.0)
            eps = rng.uniform(-0.3, 0.3)
            ip = pinned(gamma, phi)
            x = gamma / beam.sigma
            denom = 1 - math.cos(2 * eps) * math.cos(phi) * math.exp(-x * x / 2)
            if denom < 1e-9:
                continue
            expected = gamma * math.sin(2 * eps) / denom
            z = expectation_z(ip, SelectionSpec(eps), beam, NO_BOOST)
            assert z == pytest.approx(expected, rel=1e-12, abs=1e-20)

    def test_reduces_to_boost_only_form_at_crossed_polarizers(self, beam):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            gamma = rng.uniform(-1e-5, 1e-5)
            phi = rng.uniform(0.05, 6.0)
            k_sigma = rng.uniform(0.01, 0.3)
            ip = pinned(gamma, phi)
            z = expectation_z(ip, SelectionSpec(0.0), beam, BoostSpec(k_sigma))
            exact = inverse_wva_prediction(ip, beam, BoostSpec(k_sigma)).exact
            assert z == pytest.approx(exact, rel=1e-12, abs=1e-20)


class TestWeakValue:
    def test_unity_at_quarter_pi(self):
        assert weak_value(SelectionSpec(QUARTER_PI)) == pytest.approx(1.0, rel=1e-12)

    def test_reference_values(self):
        assert weak_value(SelectionSpec(0.01)) == pytest.approx(COT_0P01, rel=1e-9)
        assert weak_value(
            SelectionSpec(0.01, Regime.ANTI_COHERENCY)
        ) == pytest.approx(-COT_0P01, rel=1e-9)

    def test_singular_at_zero(self):
        with pytest.raises(SingularSelectionError):
            weak_value(SelectionSpec(0.0))

    def test_prediction_forms(self, beam):
        ip = pinned(2e-6, 0.0, gamma_common=-1e-4)
        assert wva_prediction(ip, SelectionSpec(QUARTER_PI)) == pytest.approx(
            -1e-4 + 2e-6, rel=1e-12
        )
        assert wva_prediction(ip, SelectionSpec(0.045)) == pytest.approx(
            -1e-4 + 2e-6 * COT_0P045, rel=1e-9
        )
        anti = wva_prediction(ip, SelectionSpec(0.045, Regime.ANTI_COHERENCY))
        assert anti == pytest.approx(-1e-4 - 2e-6 * COT_0P045, rel=1e-9)


class TestInverseWva:
    def test_zero_phase_gives_zero_shift(self, beam):
        out = inverse_wva_prediction(pinned(1e-6, 0.0), beam, BoostSpec(0.05))
        assert out.exact == 0.0
        assert out.small_phase == 0.0

    def test_odd_in_phase(self, beam):
        boost = BoostSpec(0.05)
        plus = inverse_wva_prediction(pinned(1e-6, 0.002), beam, boost)
        minus = inverse_wva_prediction(pinned(1e-6, -0.002), beam, boost)
        assert minus.exact == pytest.approx(-plus.exact, rel=1e-12)
        assert minus.small_phase == pytest.approx(-plus.small_phase, rel=1e-12)

    def test_reference_values(self, beam):
        ip = pinned(0.004 * beam.sigma, 0.001)
        out = inverse_wva_prediction(ip, beam, BoostSpec(0.05))
        assert out.exact == pytest.approx(INVERSE_EXACT_REF, rel=1e-9)
        assert out.small_phase == pytest.approx(INVERSE_SMALL_REF, rel=1e-9)

    def test_small_phase_uses_wrapped_deviation(self, beam):
        boost = BoostSpec(0.05)
        near_cycle = inverse_wva_prediction(
            pinned(1e-6, 64 * 2 * math.pi + 0.001), beam, boost
        )
        plain = inverse_wva_prediction(pinned(1e-6, 0.001), beam, boost)
        assert near_cycle.small_phase == pytest.approx(plain.small_phase, rel=1e-9)
        assert near_cycle.exact == pytest.approx(plain.exact, rel=1e-9)

    def test_degenerate_without_boost_or_phase(self, beam):
        with pytest.raises(DegeneratePostSelection):
            inverse_wva_prediction(pinned(1e-6, 0.0), beam, BoostSpec(0.0))


class TestClassify:
    def test_rule_examples(self, beam):
        ip = pinned(0.004 * beam.sigma, 0.0)
        assert (
            classify_regime(ip, SelectionSpec(0.04), beam, NO_BOOST)
            is RegimeLabel.WVA
        )
        assert (
            classify_regime(ip, SelectionSpec(0.0), beam, BoostSpec(0.05))
            is RegimeLabel.INVERSE_WVA
        )
        strong = pinned(0.5 * beam.sigma, 0.0)
        assert (
            classify_regime(strong, SelectionSpec(0.2), beam, NO_BOOST)
            is RegimeLabel.STRONG
        )
        middle = pinned(0.05 * beam.sigma, 0.0)
        assert (
            classify_regime(middle, SelectionSpec(0.1), beam, NO_BOOST)
            is RegimeLabel.INTERMEDIATE
        )

    @settings(max_examples=300, deadline=None)
    @given(
        x=st.floats(0.0, 1.0),
        epsilon=st.floats(-QUARTER_PI + 1e-9, QUARTER_PI),
        k_sigma=st.floats(0.0, 0.5),
    )
    def test_total_and_deterministic(self, beam, x, epsilon, k_sigma):
        ip = pinned(x * beam.sigma, 0.0)
        sel = SelectionSpec(epsilon)
        boost = BoostSpec(k_sigma)
        first = classify_regime(ip, sel, beam, boost)
        assert first is classify_regime(ip, sel, beam, boost)
        assert isinstance(first, RegimeLabel)


class TestWavefunction:
    def test_symmetric_dual_mode_at_dark_port(self, beam):
        ip = pinned(0.004 * beam.sigma, 0.0, gamma_common=-1.3e-4)
        wf = final_wavefunction(ip, SelectionSpec(0.0), beam, NO_BOOST)
        density = np.abs(wf.amplitudes) ** 2
        assert np.allclose(density, density[::-1], rtol=1e-9, atol=1e-12 * density.max())

    def test_dark_port_parity_is_odd(self, beam):
        ip = pinned(0.004 * beam.sigma, 3 * 2 * math.pi)
        wf = final_wavefunction(ip, SelectionSpec(0.0), beam, NO_BOOST)
        amps = wf.amplitudes
        peak = np.abs(amps).max()
        assert np.abs(amps + amps[::-1]).max() <= 1e-12 * peak

    def test_density_peaks_near_sqrt_two_sigma_for_weak_split(self, beam):
        ip = pinned(1e-4 * beam.sigma, 0.0)
        wf = final_wavefunction(ip, SelectionSpec(0.0), beam, NO_BOOST)
        density = np.abs(wf.amplitudes) ** 2
        u = wf.z_grid - ip.gamma_common
        peak_u = abs(u[int(np.argmax(density))])
        assert peak_u == pytest.approx(math.sqrt(2) * beam.sigma, rel=1e-3)

    def test_single_gaussian_at_quarter_pi(self, beam):
        gamma = 2e-6
        ip = pinned(gamma, 0.0, gamma_common=-1e-4)
        wf = final_wavefunction(ip, SelectionSpec(QUARTER_PI), beam, NO_BOOST)
        assert moment(wf, 0) == pytest.approx(0.5, abs=1e-12)
        assert moment(wf, 1) / moment(wf, 0) == pytest.approx(-1e-4 + gamma, rel=1e-9)
        density = np.abs(wf.amplitudes) ** 2
        assert wf.z_grid[int(np.argmax(density))] == pytest.approx(
            -1e-4 + gamma, abs=2 * wf.spacing
        )

    def test_norm_equals_probability_with_boost(self, beam):
        ip = pinned(3e-6, 0.3, gamma_common=-5e-5)
        sel = SelectionSpec(0.07)
        boost = BoostSpec(0.12)
        wf = final_wavefunction(ip, sel, beam, boost)
        assert moment(wf, 0) == pytest.approx(
            postselection_probability(ip, sel, beam, boost), abs=1e-12
        )

    def test_rejects_grid_that_misses_the_state(self, beam):
        ip = pinned(2e-6, 0.0)
        grid = GridRequest(center=0.0, halfwidth=5 * beam.sigma, sample_count=4096)
        with pytest.raises(GridTooCoarseError, match="cover"):
            final_wavefunction(ip, SelectionSpec(0.1), beam, NO_BOOST, grid)

    def test_rejects_undersampled_boost(self, beam):
        ip = pinned(2e-6, 0.0)
        boost = BoostSpec(0.2)
        grid = GridRequest(center=0.0, halfwidth=13 * beam.sigma, sample_count=16)
        with pytest.raises(GridTooCoarseError, match="underresolve"):
            final_wavefunction(ip, SelectionSpec(0.1), beam, boost, grid)

    def test_auto_grid_shape(self, beam):
        ip = pinned(2e-6, 0.0)
        wf = final_wavefunction(ip, SelectionSpec(0.1), beam, NO_BOOST)
        assert wf.sample_count == 16384
        assert wf.grid_halfwidth == pytest.approx(2e-6 + 12 * beam.sigma)
        assert wf.grid_center == ip.gamma_common
