from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from lindstedt_lab.arith import make_context, preset_frequency
from lindstedt_lab.errors import AliasingError, ConfigurationError
from lindstedt_lab.trigpoly import (
    TrigPoly,
    add,
    analytic_norm,
    eval_grid,
    eval_grid_fixed,
    grid_coefficients,
    l1_norm,
    mean,
    mul,
    scale,
    shift,
    sobolev_norm,
    sup_norm,
    weighted_product_sum,
    with_context,
)

from oracles import coefficients_mp, dense_max, evaluate, naive_dft

CTX = make_context(50, 8)
TOL = mpmath.mpf(10) ** -(CTX.decimal_digits - 10)


def near(a: TrigPoly, b: TrigPoly, tol=TOL):
    n = max(a.degree, b.degree)
    return all(abs(a.coeff(l) - b.coeff(l)) < tol for l in range(n + 1))


def sin(ell=1, amp=1):
    return TrigPoly.sin(CTX, ell, amp)


def cos(ell=1, amp=1):
    return TrigPoly.cos(CTX, ell, amp)


small_ints = st.integers(-(1 << 200), 1 << 200)


@st.composite
def polys(draw, max_degree=6):
    n = draw(st.integers(0, max_degree))
    re = tuple(draw(small_ints) for _ in range(n + 1))
    im = (0,) + tuple(draw(small_ints) for _ in range(n))
    return TrigPoly(CTX, re, im)


class TestConstruction:
    def test_sin_cos_coefficients(self):
        s = sin(3, "0.25")
        assert s.coeff(3) == CTX.mp.mpc(0, "-0.125")
        assert s.coeff(-3) == CTX.mp.mpc(0, "0.125")
        assert cos(2).coeff(2) == CTX.mp.mpc("0.5", 0)

    def test_real_zero_mode_enforced(self):
        with pytest.raises(ValueError):
            TrigPoly(CTX, (0, 1), (1, 0))
        with pytest.raises(ValueError):
            TrigPoly.mode(CTX, 0, 1)

    def test_from_coefficients(self):
        f = TrigPoly.from_coefficients(CTX, [1, (0, 0), complex(0.5, -0.25)])
        assert f.degree == 2 and f.mean() == 1
        assert f.coeff(2) == CTX.mp.mpc(0.5, -0.25)

    def test_effective_degree(self):
        assert sin(4).padded(9).effective_degree == 4
        assert TrigPoly.zero(CTX, 5).effective_degree == 0


class TestAlgebra:
    def test_add_zero_is_identity(self):
        f = sin(2) + cos(5, 3)
        assert f + TrigPoly.zero(CTX) == f

    def test_scale_by_zero(self):
        assert scale(sin(3), 0) == TrigPoly.zero(CTX, 3)
        assert scale(sin(3), 0.0) == TrigPoly.zero(CTX)

    def test_doubling(self):
        assert add(sin(), sin()) == sin(1, 2)

    def test_scale_rejects_complex(self):
        with pytest.raises(TypeError):
            scale(sin(), CTX.mp.mpc(0, 1))

    def test_scale_fraction(self):
        assert near(scale(sin(), Fraction(1, 3)), sin(1, CTX.mp.mpf(1) / 3))

    def test_mixed_precision_rejected(self):
        other = make_context(60, 8)
        with pytest.raises(ConfigurationError):
            sin() + TrigPoly.sin(other)

    def test_mul_identity(self):
        f = sin(2, "0.3") + cos(1, -2)
        assert mul(f, TrigPoly.constant(CTX, 1)) == f

    def test_product_to_sum(self):
        assert near(mul(sin(), cos()), sin(2, "0.5"))

    def test_sin_squared_against_grid_oracle(self):
        # pointwise products on a 2^5 grid, then a naive DFT in mpmath
        M = 32
        with mpmath.workdps(70):
            samples = [mpmath.sin(2 * mpmath.pi * j / M) ** 2 for j in range(M)]
            expect = naive_dft(samples, 4)
        got = mul(sin(), sin())
        assert got.degree == 2
        for ell in range(5):
            assert abs(got.coeff(ell) - expect[ell]) < TOL
        assert near(got, TrigPoly.constant(CTX, "0.5") + cos(2, "-0.5"))

    @settings(max_examples=60, deadline=None)
    @given(polys(), polys())
    def test_mul_is_exact_then_rounded_once(self, f, g):
        P = CTX.frac_bits
        h = mul(f, g)
        fa = {l: complex_int(f, l) for l in range(-f.degree, f.degree + 1)}
        ga = {l: complex_int(g, l) for l in range(-g.degree, g.degree + 1)}
        for m in range(h.degree + 1):
            prods = [_cmul(fa[a], ga[m - a]) for a in fa if m - a in ga]
            re = sum(x[0] for x in prods)
            im = sum(x[1] for x in prods)
            assert abs(Fraction(re, 2 ** P) - h.re[m]) <= Fraction(1, 2)
            if m:
                assert abs(Fraction(im, 2 ** P) - h.im[m]) <= Fraction(1, 2)

    @settings(max_examples=40, deadline=None)
    @given(polys(4), polys(4), polys(4))
    def test_mul_commutes_and_distributes(self, f, g, h):
        assert mul(f, g) == mul(g, f)
        lhs = mul(f, add(g.padded(max(g.degree, h.degree)), h.padded(max(g.degree, h.degree))))
        rhs = add(mul(f, g), mul(f, h))
        assert all(abs(x - y) <= 2 for x, y in zip(lhs.re + lhs.im, rhs.padded(lhs.degree).re + rhs.padded(lhs.degree).im))

    def test_weighted_sum_matches_separate_products(self):
        f1, g1 = sin(2, 3), cos(1)
        f2, g2 = cos(1, "0.5"), sin(2)
        got = weighted_product_sum([(3, f1, g1), (-2, f2, g2)])
        ref = scale(mul(f1, g1), 3) - scale(mul(f2, g2), 2)
        assert all(abs(a - b) <= 5 for a, b in zip(got.re + got.im, ref.re + ref.im))
        with pytest.raises(ValueError):
            weighted_product_sum([(1, sin(1), sin(1)), (1, sin(1), sin(2))])


def complex_int(f, l):
    a = abs(l)
    if a > f.degree:
        return (0, 0)
    return (f.re[a], f.im[a] if l >= 0 else -f.im[a])


def _cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


class TestShift:
    def test_zero_shift(self):
        f = sin(3, 2) + cos(1)
        assert shift(f, 0) == f

    def test_quarter_period(self):
        assert near(shift(sin(), Fraction(1, 4)), cos())

    @pytest.mark.parametrize("name", ["golden", "sqrt13_sixth"])
    def test_inverse(self, name):
        w = preset_frequency(name, CTX)
        f = sin(5, "0.7") + cos(2, -3) + TrigPoly.constant(CTX, 1)
        assert near(shift(shift(f, w), w, -1), f)

    def test_against_pointwise_evaluation(self):
        f = sin(3, "0.7") + cos(2, -3)
        g = shift(f, "0.1")
        with mpmath.workdps(70):
            for t in ("0.05", "0.3", "0.77"):
                th = mpmath.mpf(t)
                assert abs(evaluate(coefficients_mp(g), th) - evaluate(coefficients_mp(f), th + mpmath.mpf("0.1"))) < TOL


class TestMean:
    def test_cases(self):
        assert mean(sin()) == 0
        assert mean(TrigPoly.constant(CTX, "2.5")) == CTX.mp.mpf("2.5")
        assert abs(mean(mul(sin(), sin())) - CTX.mp.mpf("0.5")) < TOL


class TestNorms:
    @pytest.mark.parametrize("rho", ["0", "0.1", "1e-7", "0.5"])
    def test_analytic_sin(self, rho):
        mp = CTX.mp
        r = mp.mpf(rho)
        expect = mp.exp(mp.pi * r) / mp.sqrt(2)
        # direct two-sided sum oracle
        direct = mp.sqrt(sum(abs(sin().coeff(l)) ** 2 * mp.exp(2 * mp.pi * abs(l) * r) for l in (-1, 1)))
        got = analytic_norm(sin(), rho)
        assert abs(got - expect) < TOL and abs(got - direct) < TOL

    def test_conventions(self):
        f = sin(2, 3) + cos(5)
        s = analytic_norm(f, "0.01")
        assert abs(analytic_norm(f, "0.01", "literal") - s ** 2) < TOL
        assert abs(analytic_norm(f, "0.01", "dft", 8192) - 8192 * s) < TOL * 8192
        with pytest.raises(ConfigurationError):
            analytic_norm(f, "0.01", "cube")
        with pytest.raises(ConfigurationError):
            analytic_norm(f, -1)

    def test_zero(self):
        assert analytic_norm(TrigPoly.zero(CTX, 3), "0.1") == 0

    def test_rho_zero_is_l2(self):
        f = sin(2, 3) + cos(1) + TrigPoly.constant(CTX, 2)
        mp = CTX.mp
        l2 = mp.sqrt(sum(abs(f.coeff(l)) ** 2 for l in range(-2, 3)))
        assert abs(analytic_norm(f, 0) - l2) < TOL
        assert abs(sobolev_norm(f, 0) - l2) < TOL

    def test_sobolev_sin(self):
        assert abs(sobolev_norm(sin(), 1) - CTX.mp.pi * CTX.mp.sqrt(2)) < TOL
        mp = CTX.mp
        f = sin(3, "0.5")
        direct = mp.sqrt(sum((2 * mp.pi * l) ** 8 * abs(f.coeff(l)) ** 2 for l in (-3, 3)))
        assert abs(sobolev_norm(f, 4) - direct) < TOL * direct

    def test_sobolev_constant(self):
        assert sobolev_norm(TrigPoly.constant(CTX, 7), 1) == 0
        with pytest.raises(ConfigurationError):
            sobolev_norm(sin(), 1, "literal")
        with pytest.raises(ConfigurationError):
            sobolev_norm(sin(), -1)

    def test_sup(self):
        assert sup_norm(sin(), 16) == 1
        assert sup_norm(TrigPoly.zero(CTX)) == 0
        f = TrigPoly.constant(CTX, "0.5") + cos(2, "-0.5")
        assert abs(sup_norm(f, 16) - 1) < TOL
        with mpmath.workdps(30):
            assert abs(dense_max(lambda t: mpmath.sin(2 * mpmath.pi * t) ** 2) - 1) < 1e-6

    def test_sup_aliasing(self):
        with pytest.raises(AliasingError):
            sup_norm(sin(8), 16)

    def test_l1_bounds_sup(self):
        f = sin(3, 2) + cos(1, -1) + TrigPoly.constant(CTX, "0.25")
        assert l1_norm(f) >= sup_norm(f, 64)


class TestGrid:
    def test_eval_matches_oracle(self):
        f = sin(3, "0.7") + cos(2, -3) + TrigPoly.constant(CTX, "0.1")
        vals = eval_grid(f, 16)
        with mpmath.workdps(70):
            for j in (0, 3, 11):
                assert abs(vals[j] - evaluate(coefficients_mp(f), mpmath.mpf(j) / 16)) < TOL

    def test_round_trip(self):
        f = sin(3, "0.7") + cos(2, -3) + TrigPoly.constant(CTX, "0.1")
        back, spurious = grid_coefficients(CTX, eval_grid_fixed(f, 32), 3)
        assert near(back, f)
        assert spurious < 1 << 16

    def test_with_context(self):
        hi = make_context(80, 8)
        f = sin(2, "0.3")
        assert with_context(with_context(f, hi), CTX) == f
