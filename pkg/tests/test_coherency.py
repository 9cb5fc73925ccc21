"""Phase-matching point enumeration: anchors, residuals, interleaving."""
import math

import pytest

from wvatilt import (
    PointKind,
    PointNotFoundError,
    locate_points,
    nth_point,
    phase_shift,
)

# mpmath bisection references for the default plate
THETA_1 = 0.269779147337233
THETA_2 = 0.396444768078
THETA_7 = 0.771544263559913
THETA_11 = 0.995510985001131
ANTI_1 = 0.175424362628
X_7 = 0.031588910  # gamma/sigma at the 7th point


class TestLocate:
    def test_eleven_points_below_one_radian(self, coherency_points):
        assert len(coherency_points) == 11
        assert [p.index for p in coherency_points] == list(range(1, 12))

    def test_reference_angles(self, coherency_points):
        assert coherency_points[0].theta == pytest.approx(THETA_1, abs=1e-9)
        assert coherency_points[1].theta == pytest.approx(THETA_2, abs=1e-9)
        assert coherency_points[6].theta == pytest.approx(THETA_7, abs=1e-9)
        assert coherency_points[10].theta == pytest.approx(THETA_11, abs=1e-9)

    def test_phase_residual_at_points(self, crystal, k_o, coherency_points):
        for p in coherency_points:
            phi = phase_shift(crystal, k_o, p.theta)
            assert abs(math.cos(phi) - 1.0) <= 1e-12
            residual = abs(phi - 2 * math.pi * round(phi / (2 * math.pi)))
            assert residual <= 1e-9
            assert p.phase_cycles == pytest.approx(round(p.phase_cycles), abs=1e-9)

    def test_anti_points_sit_at_half_cycles(self, crystal, k_o, anti_points):
        for p in anti_points:
            phi = phase_shift(crystal, k_o, p.theta)
            assert abs(math.cos(phi) + 1.0) <= 1e-12
            frac = p.phase_cycles - math.floor(p.phase_cycles)
            assert frac == pytest.approx(0.5, abs=1e-9)

    def test_interleaving(self, coherency_points, anti_points):
        # exactly one ANTI point strictly between consecutive coherency points
        for lo, hi in zip(coherency_points, coherency_points[1:]):
            inside = [p for p in anti_points if lo.theta < p.theta < hi.theta]
            assert len(inside) == 1

    def test_local_quantities_populated(self, coherency_points, crystal, beam):
        seventh = coherency_points[6]
        assert seventh.gamma / beam.sigma == pytest.approx(X_7, rel=1e-6)
        assert seventh.gamma_o < 0
        assert seventh.classical_slope < 0
        assert seventh.phase_slope == pytest.approx(105.353768268, rel=1e-9)

    def test_range_filter_keeps_global_indices(self, crystal, k_o):
        window = locate_points(crystal, k_o, (0.5, 0.9))
        assert [p.index for p in window] == [4, 5, 6, 7, 8, 9]
        assert all(0.5 < p.theta <= 0.9 for p in window)

    def test_empty_window_between_points(self, crystal, k_o):
        assert locate_points(crystal, k_o, (0.28, 0.30)) == []

    def test_invalid_range(self, crystal, k_o):
        with pytest.raises(ValueError, match="theta_range"):
            locate_points(crystal, k_o, (0.5, 0.4))
        with pytest.raises(ValueError, match="theta_range"):
            locate_points(crystal, k_o, (-0.1, 0.5))
        with pytest.raises(ValueError, match="theta_range"):
            locate_points(crystal, k_o, (0.0, math.pi / 2))

    def test_scan_step_stability(self, crystal, k_o, coherency_points):
        halved = locate_points(crystal, k_o, (0.0, 1.0), max_step=0.01)
        assert len(halved) == len(coherency_points)
        for a, b in zip(coherency_points, halved):
            assert abs(a.theta - b.theta) <= 1e-12


class TestNth:
    def test_eleventh(self, crystal, k_o):
        p = nth_point(crystal, k_o, 11)
        assert p.theta == pytest.approx(THETA_11, abs=1e-9)
        assert p.index == 11

    def test_first_anti_interleaves(self, crystal, k_o):
        first_coh = nth_point(crystal, k_o, 1)
        second_coh = nth_point(crystal, k_o, 2)
        first_anti = nth_point(crystal, k_o, 1, PointKind.ANTI)
        assert first_anti.theta == pytest.approx(ANTI_1, abs=1e-9)
        inside_lead = 0.0 < first_anti.theta < first_coh.theta
        inside_gap = first_coh.theta < first_anti.theta < second_coh.theta
        assert inside_lead or inside_gap

    def test_not_found(self, crystal, k_o):
        with pytest.raises(PointNotFoundError):
            nth_point(crystal, k_o, 10**6)

    def test_invalid_ordinal(self, crystal, k_o):
        with pytest.raises(ValueError):
            nth_point(crystal, k_o, 0)


class TestNegativeBirefringence:
    def test_points_found_with_decreasing_phase(self, crystal, k_o):
        # Swapping the indices mirrors the retardation; the matching angles
        # are identical because cos(phi) is even.
        from wvatilt import CrystalSpec

        mirrored = CrystalSpec(
            thickness=crystal.thickness,
            n_o=crystal.n_e,
            n_e=crystal.n_o,
            n_air=crystal.n_air,
        )
        forward = locate_points(crystal, k_o, (0.0, 1.0))
        backward = locate_points(mirrored, k_o, (0.0, 1.0))
        assert len(backward) == len(forward) == 11
        for a, b in zip(forward, backward):
            assert b.theta == pytest.approx(a.theta, abs=1e-11)
            assert phase_shift(mirrored, k_o, b.theta) < 0  # decreasing branch
