"""Ramp schedules: closed forms, LAA quadrature, normalization, monotonicity."""

import numpy as np
import pytest

from dicke_ramp.errors import CoverageError, RangeError, SingularGap
from dicke_ramp.models import DickeParams
from dicke_ramp.ramps import build_exp, build_laa, build_lin, sample_schedule
from dicke_ramp.spectral import GapCurve, gap_curve
from dicke_ramp.units import khz_to_angular as k2a

B0 = k2a(7.1)  # initial field of the 2 ms experiments


def flat_gap_curve(value=k2a(1.0)):
    B = np.linspace(0.0, B0, 64)
    return GapCurve(B_grid=B, main_gap=np.full(64, value), low_gap=np.zeros(64))


class TestLin:
    def test_midpoint_and_ends(self):
        sched = build_lin(B0, 2.0)
        assert sched.value(1.0) == pytest.approx(k2a(3.55), rel=1e-12)
        assert sched.value(0.0) == pytest.approx(B0, rel=1e-14)
        assert sched.value(2.0) == 0.0

    def test_range_guard(self):
        sched = build_lin(B0, 2.0)
        with pytest.raises(RangeError):
            sched.value(2.5)


class TestExp:
    def test_time_constant(self):
        sched = build_exp(B0, 2.0, tau=0.6)
        assert sched.value(0.6) == pytest.approx(B0 / np.e, rel=1e-9)
        assert sched.value(0.0) == pytest.approx(B0, rel=1e-14)

    def test_clamp_and_residual(self):
        sched = build_exp(B0, 2.0, tau=0.6)
        assert sched.value(2.0) == 0.0
        assert sched.meta["clamp_residual_fraction"] == pytest.approx(
            np.exp(-2.0 / 0.6), rel=1e-12
        )


class TestLaa:
    def test_constant_gap_reduces_to_lin(self):
        sched = build_laa(B0, 2.0, flat_gap_curve())
        t = np.linspace(0, 2.0, 41)
        lin = build_lin(B0, 2.0)
        np.testing.assert_allclose(sched.value(t), lin.value(t), atol=1e-9 * B0)

    def test_normalization(self):
        curve = lipkin_curve()
        sched = build_laa(B0, 2.0, curve)
        # t(B=0) = tau_ramp by construction of gamma
        assert sched.times[-1] == pytest.approx(2.0, rel=1e-9)
        assert sched.value(2.0) == pytest.approx(0.0, abs=1e-12)

    def test_slowest_at_gap_minimum(self):
        curve = lipkin_curve()
        sched = build_laa(B0, 2.0, curve)
        t = np.linspace(1e-4, 2.0 - 1e-4, 2001)
        B = sched.value(t)
        speed = np.abs(np.gradient(B, t))
        B_at_min_speed = B[np.argmin(speed)]
        B_gap_min = curve.B_grid[np.argmin(curve.main_gap)]
        assert abs(B_at_min_speed - B_gap_min) < 0.08 * B0

    def test_grid_refinement_stability(self):
        import dicke_ramp.ramps as ramps

        curve = lipkin_curve()
        sched1 = build_laa(B0, 2.0, curve)
        old = ramps.LAA_GRID_POINTS
        ramps.LAA_GRID_POINTS = 2 * old
        try:
            sched2 = build_laa(B0, 2.0, curve)
        finally:
            ramps.LAA_GRID_POINTS = old
        t = np.linspace(0, 2.0, 101)
        assert np.abs(sched1.value(t) - sched2.value(t)).max() < 1e-6 * B0

    def test_singular_gap_rejected(self):
        curve = flat_gap_curve()
        curve.main_gap[10] = 0.0
        with pytest.raises(SingularGap):
            build_laa(B0, 2.0, curve)

    def test_coverage_guard(self):
        B = np.linspace(0.0, 0.5 * B0, 32)
        curve = GapCurve(B_grid=B, main_gap=np.ones(32), low_gap=np.zeros(32))
        with pytest.raises(CoverageError):
            build_laa(B0, 2.0, curve)

    def test_deterministic(self):
        curve = lipkin_curve()
        a = build_laa(B0, 2.0, curve)
        b = build_laa(B0, 2.0, curve)
        assert np.array_equal(a.times, b.times) and np.array_equal(a.fields, b.fields)


def lipkin_curve(N=20):
    p = DickeParams.from_J(N=N, delta=k2a(-1.0), J_mag=k2a(1.75))
    grid = np.concatenate([[0.0], np.geomspace(k2a(0.02), B0, 80)])
    return gap_curve(p, "lipkin", grid)


class TestProtocolInvariants:
    @pytest.mark.parametrize("builder", ["lin", "exp", "laa"])
    def test_monotone_nonincreasing_and_swept_area(self, builder):
        if builder == "lin":
            sched = build_lin(B0, 2.0)
        elif builder == "exp":
            sched = build_exp(B0, 2.0, tau=0.6)
        else:
            sched = build_laa(B0, 2.0, lipkin_curve())
        t = np.linspace(0, 2.0, 4001)
        B = sample_schedule(sched, t)
        assert np.all(np.diff(B) <= 1e-9 * B0)
        # total swept field = B0 (EXP: up to its clamp residual)
        swept = -np.trapezoid(np.gradient(B, t), t)
        tol = 1e-6 if builder != "exp" else np.exp(-2.0 / 0.6) + 1e-6
        assert abs(swept - B0) <= tol * B0

    def test_endpoint_values(self):
        for sched in (
            build_lin(B0, 2.0),
            build_exp(B0, 2.0, 0.6),
            build_laa(B0, 2.0, lipkin_curve()),
        ):
            assert sched.value(0.0) == pytest.approx(B0, rel=1e-9)
            assert sched.value(sched.tau_ramp) <= 1e-6 * B0
