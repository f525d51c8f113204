"""Order-by-order Lindstedt expansion for the dissipative standard map.

The map is  x' = x + y',  y' = b y + c + eps V'(x)  with  b = 1 - eps**3  and
V'(x) = sin(2 pi x) / (2 pi).  A circle of rotation number omega is sought as
x = theta + u(theta), with u = sum u_k eps**k and drift c = sum c_k eps**k.
Substituting into the invariance operator

    E_c[u] = L u + eps^3 (u - u(. - omega)) + eps^3 omega - c + eps V'(theta + u),
    L u    = u(. + omega) - 2 u + u(. - omega),

and collecting eps**k gives  L u_k = c_k - S_k - D_k - omega [k = 3], where
S_k are the coefficients of eps V'(theta + u) and D_k = u_{k-3} - u_{k-3}(. - omega).
The drift c_k is chosen to kill the zero mode and u_k is fixed to mean zero.

S_k is obtained from the series of w = exp(2 pi i u) = gamma + i sigma, which
satisfies k w_k = 2 pi i sum_{j=1..k} j u_j w_{k-j}.  Two engines evaluate that
sum: ``convolution`` (exact Kronecker products, the reference) and
``spectral`` (pointwise products on a power-of-two grid, exact up to rounding
because every product has degree k and the grid has more than 2k points).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import kernels
from .arith import (
    Context,
    Frequency,
    frequency_tables,
    grid_twiddles,
    pi_fixed,
    round_shift,
)
from .errors import ConfigurationError, DependencyError, SolvabilityError
from .trigpoly import TrigPoly, weighted_product_sum

log = logging.getLogger(__name__)

ENGINES = ("spectral", "convolution")
SIGN_CONVENTION = "S_k = coefficients of +eps V'(theta+u); L u_k = c_k - S_k - D_k - omega[k=3]"
NORMALIZATION = "mean(u_k) = 0"


@dataclass(frozen=True)
class MapSpec:
    """b = 1 - eps**dissipation_power, V'(x) = sin(2 pi x) / (2 pi)."""

    dissipation_power: int = 3

    def b(self, eps):
        return 1 - eps ** self.dissipation_power

    def v_prime(self, x, mp):
        return mp.sin(2 * mp.pi * x) / (2 * mp.pi)


STANDARD_MAP = MapSpec()


@dataclass
class CompositionState:
    """Coefficients of sin(2 pi u), cos(2 pi u) and eps V'(theta + u), by order."""

    ctx: Context
    sigma: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    S: list = field(default_factory=list)

    @classmethod
    def initial(cls, ctx: Context) -> "CompositionState":
        st = cls(ctx, [TrigPoly.zero(ctx)], [TrigPoly.constant(ctx, 1)], [TrigPoly.zero(ctx)])
        st.S.append(forcing_term(st.sigma[0], st.gamma[0]))
        return st

    @property
    def order(self) -> int:
        return len(self.sigma) - 1


def forcing_term(sigma: TrigPoly, gamma: TrigPoly) -> TrigPoly:
    """(1/2pi) (sin(2 pi theta) gamma + cos(2 pi theta) sigma), exact shifts, one rounding."""
    ctx = sigma.ctx
    bits = ctx.frac_bits
    n = max(sigma.degree, gamma.degree)
    sig, gam = sigma.padded(n), gamma.padded(n)

    def at(p, ell):
        # full Laurent coefficient of a real polynomial
        a = abs(ell)
        if a > n:
            return 0, 0
        return (p.re[a], p.im[a]) if ell >= 0 else (p.re[a], -p.im[a])

    inv = _inv_two_pi(bits)
    re, im = [], []
    for ell in range(n + 2):
        g1r, g1i = at(gam, ell - 1)
        g2r, g2i = at(gam, ell + 1)
        s1r, s1i = at(sig, ell - 1)
        s2r, s2i = at(sig, ell + 1)
        # (g1 - g2)/(2i) + (s1 + s2)/2 = [ -i (g1 - g2) + (s1 + s2) ] / 2
        xr = (g1i - g2i) + (s1r + s2r)
        xi = -(g1r - g2r) + (s1i + s2i)
        re.append(round_shift(xr * inv, bits + 1))
        im.append(round_shift(xi * inv, bits + 1))
    im[0] = 0
    return TrigPoly(ctx, tuple(re), tuple(im))


_INV_CACHE: dict = {}


def _inv_two_pi(bits: int) -> int:
    if bits not in _INV_CACHE:
        _INV_CACHE[bits] = ((1 << (2 * bits + 1)) // (2 * pi_fixed(bits + 8) >> 8) + 1) >> 1
    return _INV_CACHE[bits]


def _scale_ratio(x: int, num: int, den: int) -> int:
    # round(x * num / den), ties up
    return ((2 * x * num) // den + 1) >> 1


def composition_step(k: int, u: Sequence[TrigPoly], state: CompositionState) -> CompositionState:
    """Reference step: sigma_k, gamma_k by exact products, then S_{k+1}."""
    if k == 0:
        return state  # sigma_0 = 0, gamma_0 = 1 come from CompositionState.initial
    if state.order != k - 1:
        raise DependencyError(f"composition at order {k} needs sigma/gamma through {k - 1}, have {state.order}")
    if len(u) <= k or u[k] is None:
        raise DependencyError(f"composition at order {k} needs u_1..u_{k}")
    bits = state.ctx.frac_bits
    two_pi = 2 * pi_fixed(bits)
    den = k << bits
    g = weighted_product_sum([(j, u[j], state.gamma[k - j]) for j in range(1, k + 1)])
    s = weighted_product_sum([(j, u[j], state.sigma[k - j]) for j in range(1, k + 1)])
    sig = TrigPoly(state.ctx, tuple(_scale_ratio(x, two_pi, den) for x in g.re),
                   tuple(_scale_ratio(x, two_pi, den) for x in g.im))
    gam = TrigPoly(state.ctx, tuple(_scale_ratio(-x, two_pi, den) for x in s.re),
                   tuple(_scale_ratio(-x, two_pi, den) for x in s.im))
    state.sigma.append(sig)
    state.gamma.append(gam)
    state.S.append(forcing_term(sig, gam))
    return state


class _SpectralComposer:
    """Grid-sample bank for k w_k = 2 pi i sum j u_j w_{k-j}.

    Samples are always regenerated from the stored sigma/gamma/u coefficients,
    so the result at order k depends only on those coefficients and on the grid
    size chosen for k; resuming from an archive reproduces it exactly.
    """

    def __init__(self, ctx: Context, audit_grid: int | None = None, backend=None):
        self.ctx = ctx
        self.bits = ctx.frac_bits
        self.audit_grid = audit_grid
        self.backend = backend or kernels.BACKEND
        self.M = 0
        self.bank = None
        self.spurious: list[int] = []
        self.two_pi = 2 * pi_fixed(self.bits)

    def grid_for(self, k: int) -> int:
        if self.audit_grid:
            return self.audit_grid
        M = 8
        while M <= 2 * k:
            M <<= 1
        return M

    def keep_degree(self, k: int) -> int:
        return self.audit_grid // 2 - 1 if self.audit_grid else k

    def _fft(self, re, im, sign):
        c, s = grid_twiddles(self.M, self.bits)
        return self.backend.fft(re, im, c, s, self.bits, sign)

    def _u_samples(self, p: TrigPoly):
        M = self.M
        re = [0] * M
        im = [0] * M
        re[0] = p.re[0]
        for ell in range(1, min(p.degree, M // 2 - 1) + 1):
            re[ell], im[ell] = p.re[ell], p.im[ell]
            re[M - ell], im[M - ell] = p.re[ell], -p.im[ell]
        return self._fft(re, im, 1)[0]

    def _w_samples(self, sig: TrigPoly, gam: TrigPoly):
        M = self.M
        n = min(max(sig.degree, gam.degree), M // 2 - 1)
        sig, gam = sig.padded(max(n, sig.degree)), gam.padded(max(n, gam.degree))
        re = [0] * M
        im = [0] * M
        for ell in range(n + 1):
            gr, gi, sr, si = gam.re[ell], gam.im[ell], sig.re[ell], sig.im[ell]
            re[ell], im[ell] = gr - si, gi + sr
            if ell:
                re[M - ell], im[M - ell] = gr + si, sr - gi
        return self._fft(re, im, 1)

    def _rebuild(self, k: int, u, state):
        self.M = self.grid_for(k)
        self.bank = self.backend.ValueBank(self.M, self.bits)
        for j in range(k + 1):
            self.bank.append_u(self._u_samples(u[j]))
        for i in range(k):
            self.bank.append_w(*self._w_samples(state.sigma[i], state.gamma[i]))

    def step(self, k: int, u, state: CompositionState):
        if state.order != k - 1:
            raise DependencyError(f"composition at order {k} needs sigma/gamma through {k - 1}, have {state.order}")
        b = self.bank
        if b is None or self.M != self.grid_for(k) or b.n_w != k or b.n_u not in (k, k + 1):
            self._rebuild(k, u, state)
        elif b.n_u == k:
            b.append_u(self._u_samples(u[k]))
        xr, xi = self.bank.dot(k)
        Xr, Xi = self._fft(xr, xi, -1)
        M = self.M
        L = self.keep_degree(k)
        den = (2 * k * M) << self.bits
        tp = self.two_pi
        sr, si, gr, gi = [], [], [], []
        for ell in range(L + 1):
            a_r, a_i = Xr[ell], Xi[ell]
            b_r, b_i = Xr[-ell % M], Xi[-ell % M]
            sr.append(_scale_ratio(a_r + b_r, tp, den))
            si.append(_scale_ratio(a_i - b_i, tp, den))
            gr.append(_scale_ratio(-(a_i + b_i), tp, den))
            gi.append(_scale_ratio(a_r - b_r, tp, den))
        si[0] = gi[0] = 0
        lo, hi = L + 1, M - L
        spur = max((abs(Xr[t]) + abs(Xi[t]) for t in range(lo, hi)), default=0)
        self.spurious.append(_scale_ratio(spur, tp, k * M << self.bits))
        sig = TrigPoly(self.ctx, tuple(sr), tuple(si))
        gam = TrigPoly(self.ctx, tuple(gr), tuple(gi))
        state.sigma.append(sig)
        state.gamma.append(gam)
        S = forcing_term(sig, gam)
        if self.audit_grid and S.degree > L:
            S = S.truncated(L)
        state.S.append(S)
        self.bank.append_w(*self._w_samples(sig, gam))
        return state


def solve_cohomology(rhs: TrigPoly, omega: Frequency, scale_hint=None) -> TrigPoly:
    """Solve L u = rhs mode by mode; u(l) = rhs(l) / m(l), zero mean.

    The zero mode of ``rhs`` must vanish to 10**-(d-20) relative to
    max(1, ``scale_hint``) where ``scale_hint`` defaults to the largest
    coefficient magnitude.
    """
    ctx = rhs.ctx
    bits = ctx.frac_bits
    mag = scale_hint
    if mag is None:
        mag = max(abs(x) for x in rhs.re + rhs.im) >> bits
    tol_fixed = max(1, int(mag)) * ((1 << bits) // 10 ** (ctx.decimal_digits - 20))
    if abs(rhs.re[0]) > tol_fixed:
        raise SolvabilityError(
            f"right-hand side has mean {ctx.mp.nstr(rhs.mean(), 8)}; L_omega annihilates constants"
        )
    tab = frequency_tables(omega, bits)
    db = tab.div_bits
    re, im = [0], [0]
    for ell in range(1, rhs.degree + 1):
        m = tab.multiplier(ell)
        re.append(((rhs.re[ell] << (db + 1)) // m + 1) >> 1)
        im.append(((rhs.im[ell] << (db + 1)) // m + 1) >> 1)
    return TrigPoly(ctx, tuple(re), tuple(im))


def apply_L(u: TrigPoly, omega: Frequency) -> TrigPoly:
    """L_omega u in Fourier space, multiplier rounded at working precision."""
    tab = frequency_tables(omega, u.frac_bits)
    db = tab.div_bits
    re = [0] + [round_shift(u.re[ell] * tab.multiplier(ell), db) for ell in range(1, u.degree + 1)]
    im = [0] + [round_shift(u.im[ell] * tab.multiplier(ell), db) for ell in range(1, u.degree + 1)]
    return TrigPoly(u.ctx, tuple(re), tuple(im))


def delay_term(u: TrigPoly, omega: Frequency) -> TrigPoly:
    """u - u(. - omega)."""
    tab = frequency_tables(omega, u.frac_bits)
    bits = u.frac_bits
    one = 1 << bits
    re, im = [0], [0]
    for ell in range(1, u.degree + 1):
        c, s = tab.twiddle(-ell)
        a, b = one - c, -s
        x, y = u.re[ell], u.im[ell]
        re.append(round_shift(x * a - y * b, bits))
        im.append(round_shift(x * b + y * a, bits))
    return TrigPoly(u.ctx, tuple(re), tuple(im))


@dataclass
class LindstedtSeries:
    omega: Frequency
    ctx: Context
    u: list
    c_fixed: list
    state: CompositionState
    engine: str = "spectral"
    audit_grid: int | None = None
    spurious: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.u) - 1

    @property
    def c(self) -> list:
        return [self.ctx.from_fixed(x) for x in self.c_fixed]

    @property
    def sigma(self):
        return self.state.sigma

    @property
    def gamma(self):
        return self.state.gamma

    def S(self, k: int) -> TrigPoly:
        return self.state.S[k]

    def truncated(self, N: int) -> "LindstedtSeries":
        if N > self.N:
            raise ValueError(f"series only reaches order {self.N}")
        st = CompositionState(self.ctx, self.state.sigma[: N + 1], self.state.gamma[: N + 1], self.state.S[: N + 2])
        return LindstedtSeries(self.omega, self.ctx, self.u[: N + 1], self.c_fixed[: N + 1], st,
                               self.engine, self.audit_grid, self.spurious[: N], dict(self.manifest))


def drift_series(series: LindstedtSeries) -> list:
    return series.c


def _order_rhs(k: int, S: TrigPoly, u: list, omega: Frequency, omega_fixed: int) -> tuple[int, TrigPoly]:
    c_k = S.re[0] + (omega_fixed if k == 3 else 0)
    rhs = -S
    if k >= 4:
        rhs = rhs - delay_term(u[k - 3], omega)
    re = list(rhs.re)
    re[0] += c_k - (omega_fixed if k == 3 else 0)
    return c_k, TrigPoly(S.ctx, tuple(re), rhs.im)


def expand(
    omega: Frequency,
    N: int,
    ctx: Context | None = None,
    engine: str = "spectral",
    audit: bool = False,
    audit_grid: int | None = None,
    resume: LindstedtSeries | None = None,
    on_order: Callable[[LindstedtSeries, int], None] | None = None,
    backend=None,
) -> LindstedtSeries:
    """Compute u_0..u_N, c_0..c_N.

    ``audit`` keeps every function on a fixed oversized grid (``audit_grid``
    points, default the smallest power of two above 2N) instead of
    truncating to the structural degree, so spurious high modes can be
    measured.  ``resume`` continues a shorter series; ``on_order`` is called
    after each order (used for checkpointing).
    """
    if N < 1:
        raise ConfigurationError("N must be >= 1")
    if engine not in ENGINES:
        raise ConfigurationError(f"engine must be one of {ENGINES}, got {engine!r}")
    ctx = ctx or omega.ctx
    if omega.ctx.frac_bits != ctx.frac_bits:
        omega = omega.at(ctx)
    if audit:
        if engine != "spectral":
            raise ConfigurationError("audit mode needs the spectral engine")
        if audit_grid is None:
            audit_grid = 8
            while audit_grid <= 2 * N:
                audit_grid <<= 1
        elif audit_grid & (audit_grid - 1) or audit_grid <= 2 * N:
            raise ConfigurationError(f"audit grid must be a power of two above 2N = {2 * N}")
    else:
        audit_grid = None

    if resume is not None:
        if resume.omega.descriptor != omega.descriptor or resume.ctx.frac_bits != ctx.frac_bits:
            raise ConfigurationError("resume series has a different frequency or precision")
        if resume.engine != engine or resume.audit_grid != audit_grid:
            raise ConfigurationError("resume series was computed with different engine settings")
        series = resume
        if series.N >= N:
            return series.truncated(N)
    else:
        state = CompositionState.initial(ctx)
        series = LindstedtSeries(omega, ctx, [TrigPoly.zero(ctx)], [0], state, engine, audit_grid)
    series.manifest.update(
        {"engine": engine, "backend": (backend or kernels.BACKEND).NAME, "normalization": NORMALIZATION,
         "sign_convention": SIGN_CONVENTION}
    )
    composer = _SpectralComposer(ctx, audit_grid, backend) if engine == "spectral" else None
    w_fixed = omega.fixed(ctx.frac_bits)
    u, state = series.u, series.state
    t0 = time.perf_counter()
    for k in range(series.N + 1, N + 1):
        if len(state.S) <= k:
            raise DependencyError(f"S_{k} unavailable; composition state ends at order {state.order}")
        c_k, rhs = _order_rhs(k, state.S[k], u, omega, w_fixed)
        u_k = solve_cohomology(rhs, omega)
        u.append(u_k)
        series.c_fixed.append(c_k)
        if composer is not None:
            composer.step(k, u, state)
            series.spurious.append(composer.spurious[-1])
        else:
            composition_step(k, u, state)
        if on_order is not None:
            on_order(series, k)
        log.info("order %d done (%.2fs elapsed)", k, time.perf_counter() - t0)
    return series
