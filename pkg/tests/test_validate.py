import dataclasses
import math

import mpmath
import pytest

from lindstedt_lab.arith import PRESETS, make_context, preset_frequency
from lindstedt_lab.errors import AliasingError, ConfigurationError, FloorContaminationError
from lindstedt_lab.lindstedt import expand
from lindstedt_lab.trigpoly import TrigPoly
from lindstedt_lab.validate import (
    cohomology_report,
    cohomology_residual,
    cross_compare,
    degree_check,
    invariance_residual,
    invariance_sweep,
    order_slope,
)


def log10(x):
    return float(mpmath.log10(x)) if x else float("-inf")


def with_u(series, k, poly):
    u = list(series.u)
    u[k] = poly
    return dataclasses.replace(series, u=u)


def gate(slope, eps, tol=0.25):
    target = math.log10(float(eps))
    return abs(slope - target) <= tol * abs(target)


class TestCohomology:
    def test_first_order_at_rounding_level(self, series60):
        assert log10(cohomology_residual(series60, 1)) <= -series60.ctx.decimal_digits / 2

    def test_report_passes(self, series60):
        rep = cohomology_report(series60)
        assert rep.passed and len(rep.entries) == series60.N
        assert max(r for _, r, _ in rep.entries) < -40

    def test_perturbation_detected(self, series60, ctx60):
        bad = with_u(series60, 1, series60.u[1] + TrigPoly.sin(ctx60, 1, "1e-10"))
        r = log10(cohomology_residual(bad, 1))
        # brute force: L applied to the perturbation is -4 sin^2(pi w) 1e-10 sin(2 pi theta)
        w = series60.omega.value
        assert abs(r - log10(4 * ctx60.mp.sin(ctx60.mp.pi * w) ** 2 * ctx60.mp.mpf("1e-10"))) < 1e-6
        assert -11 <= r <= -8
        assert not cohomology_report(bad, 3).passed

    def test_order_out_of_range(self, series60):
        with pytest.raises(ConfigurationError):
            cohomology_residual(series60, 0)


def residual_oracle(u1_amp, w, eps, M):
    """Pointwise E for the order-1 truncation, from the closed-form u_1, in mpmath."""
    eps = mpmath.mpf(eps)
    b = 1 - eps ** 3
    U = lambda t: eps * u1_amp * mpmath.sin(2 * mpmath.pi * t)
    worst = 0
    for j in range(M):
        t = mpmath.mpf(j) / M
        e = (U(t + w) - (1 + b) * U(t) + b * U(t - w) + (1 - b) * w
             + eps * mpmath.sin(2 * mpmath.pi * (t + U(t))) / (2 * mpmath.pi))
        worst = max(worst, abs(e))
    return worst


class TestInvariance:
    def test_order_one_against_pointwise_oracle(self, series60, golden60):
        with mpmath.workdps(80):
            w = golden60.value
            amp = 1 / (8 * mpmath.pi * mpmath.sin(mpmath.pi * w) ** 2)
            ref = residual_oracle(amp, w, "1e-3", 64)
        got = invariance_residual(series60, "1e-3", 1, 64)
        assert abs(got / ref - 1) < 1e-40
        # leading neglected term: eps^2 sup|cos(2 pi theta) u_1| = eps^2 amp / 2
        assert abs(log10(got) - log10(mpmath.mpf("1e-6") * amp / 2)) < 0.05

    def test_quadratic_in_eps(self, series60):
        r1 = invariance_residual(series60, "1e-3", 1)
        r2 = invariance_residual(series60, "5e-4", 1)
        assert 3.8 < r1 / r2 < 4.2

    def test_zero_eps(self, series60):
        assert invariance_residual(series60, 0, 10) == 0

    def test_decreases_two_decades_per_order(self, smoke_series):
        rep = invariance_sweep(smoke_series, "1e-2", 10, 40)
        steps = [b - a for (_, a, _), (_, b, _) in zip(rep.entries, rep.entries[1:])]
        assert all(s < 0 for s in steps)
        assert -2.5 < sum(steps) / len(steps) < -1.5

    @pytest.mark.parametrize("eps, target", [("1e-2", -2.0), ("1e-1", -1.0)])
    def test_order_slope_law(self, smoke_series, eps, target):
        slope = order_slope(smoke_series, eps, 5, 35)
        assert abs(slope - target) <= 0.1

    def test_corruption_breaks_the_gate(self, smoke_series, smoke_ctx):
        bad = with_u(smoke_series, 2, TrigPoly.zero(smoke_ctx, 2))
        slope = order_slope(bad, "1e-2", 5, 35)
        assert abs(slope) < 0.5 and not gate(slope, "1e-2")
        assert gate(order_slope(smoke_series, "1e-2", 5, 35), "1e-2")

    def test_floor(self, series60):
        with pytest.raises(FloorContaminationError) as exc:
            order_slope(series60, "1e-3", 5, 24)
        assert exc.value.first_saturated <= 24

    def test_arguments(self, series60):
        with pytest.raises(ConfigurationError):
            invariance_residual(series60, 1, 3)
        with pytest.raises(ConfigurationError):
            invariance_residual(series60, "1e-2", 99)
        with pytest.raises(AliasingError):
            invariance_residual(series60, "1e-2", 24, grid=32)
        with pytest.raises(ConfigurationError):
            order_slope(series60, "1e-2", 9, 9)


class TestCrossCompare:
    def test_identical(self, series60):
        assert all(e.log10_abs == float("-inf") for e in cross_compare(series60, series60))

    def test_precision_pair(self, golden60):
        lo, hi = make_context(60, 8), make_context(160, 8)
        a = expand(golden60.at(lo), 24, lo)
        b = expand(golden60.at(hi), 24, hi)
        assert max(e.log10_rel for e in cross_compare(a, b)) < -(60 - 50)

    def test_grid_exponent_pair_with_reference_engine(self, golden60):
        a = expand(golden60, 12, make_context(60, 10), engine="convolution")
        b = expand(golden60, 12, make_context(60, 13), engine="convolution")
        assert max(e.log10_abs for e in cross_compare(a, b)) < -(60 - 10)

    def test_frequency_mismatch(self, series60, ctx60):
        other = expand(preset_frequency("sqrt2", ctx60), 3, ctx60)
        with pytest.raises(ConfigurationError):
            cross_compare(series60, other)


class TestDegree:
    def test_structural(self, series60):
        rep = degree_check(series60)
        assert rep.passed
        assert all(e.stored_degree <= e.n and e.spurious_abs == float("-inf") for e in rep.entries)

    def test_audit_smoke(self, smoke_ctx):
        s = expand(preset_frequency("golden", smoke_ctx), 60, smoke_ctx, audit=True)
        rep = degree_check(s)
        assert rep.passed, rep.violations[:3]

    def test_audit_at_600_digits(self):
        ctx = make_context(600, 10)
        s = expand(preset_frequency("golden", ctx), 100, ctx, audit=True)
        assert degree_check(s, tol=-200).passed

    def test_violation_reported(self, series60, ctx60):
        u3 = series60.u[3].padded(6)
        re = list(u3.re)
        re[6] = 1 << (ctx60.frac_bits - 20)
        bad = with_u(series60, 3, TrigPoly(ctx60, tuple(re), u3.im))
        rep = degree_check(bad)
        assert [e.n for e in rep.violations] == [3]
        assert -7 < rep.violations[0].spurious_abs < -5


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_meets_cohomology_bound(name):
    ctx = make_context(50, 8)
    s = expand(preset_frequency(name, ctx), 20, ctx)
    rep = cohomology_report(s)
    assert rep.passed, [e for e in rep.entries if e[1] > e[2]]
