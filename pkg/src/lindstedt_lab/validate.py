"""Correctness evidence for computed series.

Per-order cohomology residuals, the numeric invariance residual of truncated
series (evaluated pointwise, independently of the composition recursion),
its order slope, cross-run comparisons and the degree audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from mpmath import libmp

from .arith import _raw_to_fixed, frequency_tables, pi_fixed, round_shift, to_fixed
from .errors import AliasingError, ConfigurationError, FloorContaminationError
from .lindstedt import LindstedtSeries, apply_L, delay_term
from .trigpoly import TrigPoly, eval_grid_fixed, sobolev_norm, sup_norm, with_context

FLOOR_MARGIN = 20  # sweep entries below 10**-(d - FLOOR_MARGIN) are rounding noise


def _log10(x) -> float:
    """log10 of a non-negative mpf as a float; -inf for zero."""
    if not x:
        return float("-inf")
    _, man, exp, bc = x._mpf_
    drop = max(0, bc - 60)
    return math.log10(int(man) >> drop) + (exp + drop) * math.log10(2)


def _fixed_log10(x: int, bits: int) -> float:
    if not x:
        return float("-inf")
    x = abs(int(x))
    drop = max(0, x.bit_length() - 60)
    return math.log10(x >> drop) + (drop - bits) * math.log10(2)


@dataclass(frozen=True)
class ResidualReport:
    entries: tuple  # (n, log10 residual, log10 bound)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r <= b for _, r, b in self.entries)

    def rows(self):
        return [(n, r) for n, r, _ in self.entries]


@dataclass(frozen=True)
class SweepReport:
    eps: str
    entries: tuple  # (N, log10 residual, usable)
    slope: float | None
    metadata: dict = field(default_factory=dict)

    def rows(self):
        return [(n, r) for n, r, _ in self.entries]


def cohomology_fixed(series: LindstedtSeries, n: int) -> TrigPoly:
    """L u_n + D_n + omega [n = 3] - c_n + S_n, which a correct solve drives to zero."""
    if not 1 <= n <= series.N:
        raise ConfigurationError(f"order {n} outside 1..{series.N}")
    om = series.omega
    r = apply_L(series.u[n], om) + series.S(n)
    if n >= 4:
        r = r + delay_term(series.u[n - 3], om)
    const = -series.c_fixed[n] + (om.fixed(series.ctx.frac_bits) if n == 3 else 0)
    re = list(r.re)
    re[0] += const
    return TrigPoly(r.ctx, tuple(re), r.im)


def cohomology_residual(series: LindstedtSeries, n: int):
    """Sup over the grid of the order-n cohomology defect."""
    return sup_norm(cohomology_fixed(series, n), _grid_for(series.ctx.grid_size, series.u[n].degree + 1))


def _grid_for(M: int, degree: int) -> int:
    while M <= 2 * degree:
        M <<= 1
    return M


def cohomology_report(series: LindstedtSeries, n_max: int | None = None) -> ResidualReport:
    d = series.ctx.decimal_digits
    rows = []
    for n in range(1, (n_max or series.N) + 1):
        res = cohomology_residual(series, n)
        S = sup_norm(series.S(n), _grid_for(series.ctx.grid_size, series.S(n).degree))
        bound = -d / 2 + max(0.0, _log10(S))
        rows.append((n, _log10(res), bound))
    return ResidualReport(tuple(rows), _meta(series))


def _meta(series) -> dict:
    return {"omega": series.omega.label, "digits": series.ctx.decimal_digits,
            "grid": series.ctx.grid_size, "N": series.N}


def invariance_residual(series: LindstedtSeries, eps, N_trunc: int | None = None, grid: int | None = None):
    """Sup over the grid of E_c[u] for the series truncated at order N_trunc.

    E = u(. + omega) - (1 + b) u + b u(. - omega) + (1 - b) omega - c + eps V'(theta + u),
    b = 1 - eps**3, V'(x) = sin(2 pi x)/(2 pi), the last term evaluated pointwise.
    """
    N = series.N if N_trunc is None else N_trunc
    if not 0 <= N <= series.N:
        raise ConfigurationError(f"truncation {N} outside 0..{series.N}")
    ctx = series.ctx
    P = ctx.frac_bits
    e = to_fixed(eps, P)
    if abs(e) >= 1 << P:
        raise ConfigurationError("|eps| must be < 1")
    M = ctx.grid_size if grid is None else grid
    deg = max((series.u[k].degree for k in range(1, N + 1)), default=0)
    if M <= 2 * deg:
        raise AliasingError(f"grid of {M} points cannot resolve degree {deg}")
    # U = sum u_k eps^k and c = sum c_k eps^k, coefficientwise
    re = [0] * (deg + 1)
    im = [0] * (deg + 1)
    c = 0
    ek = 1 << P
    for k in range(1, N + 1):
        ek = round_shift(ek * e, P)
        uk = series.u[k]
        for ell in range(uk.degree + 1):
            re[ell] += round_shift(uk.re[ell] * ek, P)
            im[ell] += round_shift(uk.im[ell] * ek, P)
        c += round_shift(series.c_fixed[k] * ek, P)
    U = TrigPoly(ctx, tuple(re), tuple(im))
    b = (1 << P) - round_shift(round_shift(e * e, P) * e, P)
    one_b = (1 << P) - b
    tab = frequency_tables(series.omega, P)
    lre, lim = [0], [0]
    for ell in range(1, deg + 1):
        cr, ci = tab.twiddle(ell)
        # e^{+} - (1+b) + b e^{-} = (1+b)(cos - 1) + i (1-b) sin
        mr = round_shift(((1 << P) + b) * (cr - (1 << P)), P)
        mi = round_shift(one_b * ci, P)
        x, y = U.re[ell], U.im[ell]
        lre.append(round_shift(x * mr - y * mi, P))
        lim.append(round_shift(x * mi + y * mr, P))
    lre[0] = round_shift(one_b * series.omega.fixed(P), P) - c
    lin = eval_grid_fixed(TrigPoly(ctx, tuple(lre), tuple(lim)), M)
    uvals = eval_grid_fixed(U, M)
    inv2pi = ((1 << (2 * P + 1)) // (2 * pi_fixed(P)) + 1) >> 1
    e_fac = round_shift(e * inv2pi, P)
    mb = M.bit_length() - 1
    worst = 0
    for j in range(M):
        # theta_j + U_j as a fixed-point angle, sin(2 pi x) at working precision
        x = (j << (P - mb)) + uvals[j]
        s = _raw_to_fixed(libmp.mpf_sin_pi(libmp.from_man_exp(2 * x, -P), P + 16), P)
        val = lin[j] + round_shift(e_fac * s, P)
        worst = max(worst, abs(val))
    return ctx.from_fixed(worst)


def invariance_sweep(series: LindstedtSeries, eps, N_lo: int, N_hi: int, grid: int | None = None) -> SweepReport:
    floor = -(series.ctx.decimal_digits - FLOOR_MARGIN)
    rows = []
    for N in range(N_lo, N_hi + 1):
        r = _log10(invariance_residual(series, eps, N, grid))
        rows.append((N, r, r > floor))
    usable = [(n, r) for n, r, ok in rows if ok]
    slope = _slope(usable) if len(usable) >= 2 else None
    return SweepReport(str(eps), tuple(rows), slope, _meta(series))


def _slope(points) -> float:
    n = len(points)
    sx = sum(x for x, _ in points)
    sy = sum(y for _, y in points)
    sxx = sum(x * x for x, _ in points)
    sxy = sum(x * y for x, y in points)
    return (n * sxy - sx * sy) / (n * sxx - sx * sx)


def order_slope(series: LindstedtSeries, eps, N_lo: int, N_hi: int, grid: int | None = None) -> float:
    """Least-squares slope of log10 ||E|| against N over [N_lo, N_hi]."""
    if N_hi <= N_lo:
        raise ConfigurationError("need N_lo < N_hi")
    rep = invariance_sweep(series, eps, N_lo, N_hi, grid)
    for n, _, ok in rep.entries:
        if not ok:
            raise FloorContaminationError(n)
    return rep.slope


@dataclass(frozen=True)
class CrossEntry:
    n: int
    log10_abs: float
    log10_rel: float


def cross_compare(a: LindstedtSeries, b: LindstedtSeries, n_max: int | None = None) -> list[CrossEntry]:
    """Per-order sup differences on a common grid, at the finer of the two precisions."""
    if a.omega.descriptor != b.omega.descriptor:
        raise ConfigurationError("cannot compare series of different frequencies")
    ctx = a.ctx if a.ctx.frac_bits >= b.ctx.frac_bits else b.ctx
    M = min(a.ctx.grid_size, b.ctx.grid_size)
    out = []
    for n in range(1, min(a.N, b.N, n_max or 10 ** 9) + 1):
        u, v = with_context(a.u[n], ctx), with_context(b.u[n], ctx)
        G = _grid_for(M, max(u.degree, v.degree))
        diff = sup_norm(u - v, G)
        ref = sup_norm(u, G)
        la = _log10(diff)
        out.append(CrossEntry(n, la, la - _log10(ref) if ref else float("nan")))
    return out


@dataclass(frozen=True)
class DegreeEntry:
    n: int
    stored_degree: int
    spurious_abs: float  # log10 of max |u_n(l)| over l > n
    spurious_rel: float  # same, relative to the l2 norm of u_n
    ok: bool


@dataclass(frozen=True)
class DegreeReport:
    entries: tuple
    tol: float
    relative: bool

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def violations(self) -> list:
        return [e for e in self.entries if not e.ok]


def degree_check(series: LindstedtSeries, tol=None, relative: bool = True) -> DegreeReport:
    """Structural degree bound, plus the spurious-mode audit for padded runs.

    ``tol`` is a log10 threshold (default -(d - 10)).  With ``relative`` the
    spurious magnitude is measured against ||u_n||, since fixed-point rounding
    is absolute while u_n grows like a Gevrey sequence.
    """
    d = series.ctx.decimal_digits
    tol = -(d - 10) if tol is None else tol
    P = series.ctx.frac_bits
    out = []
    for n in range(1, series.N + 1):
        u = series.u[n]
        tail = max((abs(u.re[l]) + abs(u.im[l]) for l in range(n + 1, u.degree + 1)), default=0)
        sa = _fixed_log10(tail, P)
        sr = sa - _log10(sobolev_norm(u, 0)) if tail else float("-inf")
        padded = series.audit_grid is not None
        ok = (padded or u.degree <= n) and (sr if relative else sa) < tol
        out.append(DegreeEntry(n, u.degree, sa, sr, ok))
    return DegreeReport(tuple(out), tol, relative)
