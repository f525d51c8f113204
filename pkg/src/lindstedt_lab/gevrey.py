"""Growth observables of a Lindstedt series and the fits run on them.

For a norm N the sequence a_k = (1/k) log N(u_k) is compared with the
Gevrey model log R + sigma log k (optionally log(k + b)).  Centralizations
subtract moving averages to expose the period-3 correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigurationError, UndefinedLogError
from .trigpoly import DEFAULT_DFT_SIZE, NORM_CONVENTIONS, analytic_norm, sobolev_norm, sup_norm

MIN_FIT_POINTS = 3
MIN_OSC_RANGE = 30
OSC_THRESHOLD = 0.2


@dataclass(frozen=True)
class NormSpec:
    kind: str  # analytic | sobolev | sup
    param: object = None
    convention: str = "sqrt"
    dft_size: int = DEFAULT_DFT_SIZE

    def __post_init__(self):
        if self.kind not in ("analytic", "sobolev", "sup"):
            raise ConfigurationError(f"unknown norm kind {self.kind!r}")
        if self.convention not in NORM_CONVENTIONS:
            raise ConfigurationError(f"norm convention must be one of {NORM_CONVENTIONS}")
        if self.kind == "sobolev" and self.convention == "literal":
            raise ConfigurationError("the Sobolev norm has no literal convention")

    @classmethod
    def analytic(cls, rho, convention="sqrt", dft_size=DEFAULT_DFT_SIZE):
        return cls("analytic", rho, convention, dft_size)

    @classmethod
    def sobolev(cls, r, convention="sqrt", dft_size=DEFAULT_DFT_SIZE):
        return cls("sobolev", int(r), convention, dft_size)

    def __call__(self, f):
        if self.kind == "analytic":
            return analytic_norm(f, self.param, self.convention, self.dft_size)
        if self.kind == "sobolev":
            return sobolev_norm(f, self.param, self.convention, self.dft_size)
        return sup_norm(f)

    @property
    def label(self) -> str:
        if self.kind == "sup":
            return "sup"
        tag = "rho" if self.kind == "analytic" else "r"
        return f"{self.kind}({tag}={self.param},{self.convention})"


@dataclass(frozen=True)
class GrowthSequence:
    ks: tuple
    values: tuple
    norm: NormSpec | None = None
    source: dict = field(default_factory=dict, compare=False)
    mp: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.ks) != len(self.values):
            raise ValueError("ks and values differ in length")
        if any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            raise ValueError("k must be strictly increasing")

    def __len__(self):
        return len(self.ks)

    def __iter__(self):
        return iter(zip(self.ks, self.values))

    def as_dict(self) -> dict:
        return dict(zip(self.ks, self.values))

    def restricted(self, k_lo: int, k_hi: int) -> "GrowthSequence":
        pairs = [(k, v) for k, v in self if k_lo <= k <= k_hi]
        return GrowthSequence(tuple(k for k, _ in pairs), tuple(v for _, v in pairs), self.norm, self.source, self.mp)

    def _mp(self):
        if self.mp is not None:
            return self.mp
        import mpmath
        return mpmath.mp


@dataclass(frozen=True)
class FitResult:
    R: object
    sigma: object
    b: object
    e_inf: object
    k_range: tuple
    model: str
    n_points: int
    converged: bool = True

    def row(self, places: int = 6) -> dict:
        def r(x):
            return round(float(x), places)
        return {"R": r(self.R), "sigma": r(self.sigma), "b": r(self.b), "e_inf": r(self.e_inf),
                "k_lo": self.k_range[0], "k_hi": self.k_range[1]}


def growth_sequence(series, norm: NormSpec, k_max: int | None = None, k_min: int = 1) -> GrowthSequence:
    """a_k = (1/k) log ||u_k|| for k_min <= k <= k_max (natural log)."""
    k_max = series.N if k_max is None else k_max
    if k_max > series.N:
        raise ConfigurationError(f"k_max={k_max} exceeds series order {series.N}")
    mp = series.ctx.mp
    ks, vals = [], []
    for k in range(max(1, k_min), k_max + 1):
        n = norm(series.u[k])
        if not n:
            raise UndefinedLogError(k)
        ks.append(k)
        vals.append(mp.log(n) / k)
    return GrowthSequence(tuple(ks), tuple(vals), norm, _source(series), mp)


def _source(series) -> dict:
    return {"omega": series.omega.label, "descriptor": list(series.omega.descriptor),
            "digits": series.ctx.decimal_digits, "N": series.N}


def log_factorial(k: int, mp):
    """log k! as an explicit sum of logs."""
    total = mp.mpf(0)
    for j in range(2, k + 1):
        total += mp.log(j)
    return total


def factorial_scaled(series, norm: NormSpec, k_max: int | None = None, k_min: int = 1) -> GrowthSequence:
    """(1/k) (log k! + log ||u_k||)."""
    base = growth_sequence(series, norm, k_max, k_min)
    return factorial_scale(base)


def factorial_scale(seq: GrowthSequence) -> GrowthSequence:
    mp = seq._mp()
    out = []
    lf = mp.mpf(0)
    j = 1
    for k, v in seq:
        while j < k:
            j += 1
            lf += mp.log(j)
        out.append(v + lf / k)
    return GrowthSequence(seq.ks, tuple(out), seq.norm, dict(seq.source, scaled="factorial"), seq.mp)


def _points(seq: GrowthSequence, k_lo: int, k_hi: int):
    if k_lo >= k_hi:
        raise ConfigurationError(f"degenerate fit range [{k_lo}, {k_hi}]")
    pts = sorted((k, v) for k, v in seq if k_lo <= k <= k_hi)
    if len(pts) < MIN_FIT_POINTS:
        raise ConfigurationError(f"need at least {MIN_FIT_POINTS} points in [{k_lo}, {k_hi}], have {len(pts)}")
    return pts


def _linear_fit(xs, ys, mp):
    n = len(xs)
    sx = mp.fsum(xs)
    sy = mp.fsum(ys)
    sxx = mp.fsum(x * x for x in xs)
    sxy = mp.fsum(x * y for x, y in zip(xs, ys))
    det = n * sxx - sx * sx
    if not det:
        raise ConfigurationError("regressor is constant over the fit range")
    slope = (n * sxy - sx * sy) / det
    icpt = (sy - slope * sx) / n
    res = [y - icpt - slope * x for x, y in zip(xs, ys)]
    return icpt, slope, res


def fit_log(seq: GrowthSequence, k_lo: int, k_hi: int) -> FitResult:
    """Least squares a_k ~ log R + sigma log k; e_inf is the max residual on the range."""
    mp = seq._mp()
    pts = _points(seq, k_lo, k_hi)
    xs = [mp.log(k) for k, _ in pts]
    ys = [mp.mpf(v) for _, v in pts]
    a, s, res = _linear_fit(xs, ys, mp)
    return FitResult(mp.exp(a), s, mp.mpf(0), max(abs(r) for r in res), (k_lo, k_hi), "log", len(pts))


def _profile(pts, b, mp):
    xs = [mp.log(k + b) for k, _ in pts]
    ys = [mp.mpf(v) for _, v in pts]
    a, s, res = _linear_fit(xs, ys, mp)
    return mp.fsum(r * r for r in res), a, s, res


def fit_log_shifted(seq: GrowthSequence, k_lo: int, k_hi: int, b_min=None, b_max=None,
                    scan: int = 64, tol=None, max_iter: int = 400) -> FitResult:
    """Least squares a_k ~ log R + sigma log(k + b), b profiled out.

    A coarse scan over b (uniform in log(k_lo + b)) brackets the minimum of
    the profiled sum of squares; golden-section search refines it.  Setting
    ``b_min = b_max = 0`` reproduces ``fit_log``.  ``converged`` is False when
    the optimum sits on the search boundary or the iteration cap is hit.
    """
    mp = seq._mp()
    pts = _points(seq, k_lo, k_hi)
    lo = mp.mpf(-k_lo + 1 if b_min is None else b_min)
    hi = mp.mpf(10 * k_hi if b_max is None else b_max)
    if lo > hi:
        raise ConfigurationError("b_min exceeds b_max")
    if lo == hi:
        ss, a, s, res = _profile(pts, lo, mp)
        return FitResult(mp.exp(a), s, lo, max(abs(r) for r in res), (k_lo, k_hi), "log_shifted", len(pts))
    # coarse scan in t = log(k_lo + b)
    t_lo, t_hi = mp.log(k_lo + lo), mp.log(k_lo + hi)
    grid = [lo] + [mp.exp(t_lo + (t_hi - t_lo) * i / scan) - k_lo for i in range(1, scan)] + [hi]
    vals = [_profile(pts, b, mp)[0] for b in grid]
    i = min(range(len(grid)), key=lambda j: vals[j])
    a_, c_ = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    tol = tol if tol is not None else mp.mpf(10) ** (-min(30, mp.dps // 2))
    g = (mp.sqrt(5) - 1) / 2
    x1 = c_ - g * (c_ - a_)
    x2 = a_ + g * (c_ - a_)
    f1, f2 = _profile(pts, x1, mp)[0], _profile(pts, x2, mp)[0]
    it = 0
    while abs(c_ - a_) > tol * (1 + abs(x1)) and it < max_iter:
        it += 1
        if f1 < f2:
            c_, x2, f2 = x2, x1, f1
            x1 = c_ - g * (c_ - a_)
            f1 = _profile(pts, x1, mp)[0]
        else:
            a_, x1, f1 = x1, x2, f2
            x2 = a_ + g * (c_ - a_)
            f2 = _profile(pts, x2, mp)[0]
    b = x1 if f1 < f2 else x2
    if vals[i] < min(f1, f2):
        b = grid[i]
    ss, a, s, res = _profile(pts, b, mp)
    converged = it < max_iter and 0 < i < len(grid) - 1
    return FitResult(mp.exp(a), s, b, max(abs(r) for r in res), (k_lo, k_hi), "log_shifted", len(pts), converged)


def _contiguous(seq: GrowthSequence) -> dict:
    return seq.as_dict()


def centralize_x(seq: GrowthSequence) -> GrowthSequence:
    """x_k = a_k - (1/5) sum_{j=k-2..k+2} a_j wherever the stencil is available."""
    a = _contiguous(seq)
    ks, vals = [], []
    for k in seq.ks:
        if all(j in a for j in range(k - 2, k + 3)):
            ks.append(k)
            vals.append(a[k] - sum(a[j] for j in range(k - 2, k + 3)) / 5)
    return GrowthSequence(tuple(ks), tuple(vals), seq.norm, dict(seq.source, centralization="x"), seq.mp)


def centralize_z(seq: GrowthSequence) -> GrowthSequence:
    """z_k = a_k - (1/(3k)) sum_{j=k..k+2} j a_j."""
    a = _contiguous(seq)
    ks, vals = [], []
    for k in seq.ks:
        if all(j in a for j in range(k, k + 3)):
            ks.append(k)
            vals.append(a[k] - sum(j * a[j] for j in range(k, k + 3)) / (3 * k))
    return GrowthSequence(tuple(ks), tuple(vals), seq.norm, dict(seq.source, centralization="z"), seq.mp)


@dataclass(frozen=True)
class OscillationReport:
    oscillating: bool
    dominant_period: int | None
    beta: object
    residual: object
    magnitudes: dict
    k_range: tuple
    envelope: tuple = ()


def oscillation_report(seq: GrowthSequence, k_lo: int, k_hi: int, periods: Sequence[int] = range(2, 11),
                       threshold: float = OSC_THRESHOLD) -> OscillationReport:
    """Dominant period of x_k on [k_lo, k_hi] and the decay exponent of its envelope.

    Oscillation is declared when the strongest periodic component carries at
    least ``threshold`` of sum |x_k|; beta is minus the log-log slope of the
    local maxima of |x_k|.
    """
    if k_hi - k_lo + 1 < MIN_OSC_RANGE:
        raise ConfigurationError(f"oscillation analysis needs a range of at least {MIN_OSC_RANGE} orders")
    mp = seq._mp()
    x = centralize_x(seq).restricted(k_lo, k_hi)
    if len(x) < MIN_OSC_RANGE:
        raise ConfigurationError("centralized sequence too short on the requested range")
    total = mp.fsum(abs(v) for v in x.values)
    mags = {}
    for p in periods:
        re = mp.fsum(v * mp.cospi(mp.mpf(2 * k) / p) for k, v in x)
        im = mp.fsum(v * mp.sinpi(mp.mpf(2 * k) / p) for k, v in x)
        mags[p] = mp.sqrt(re * re + im * im)
    if not total:
        return OscillationReport(False, None, None, None, mags, (k_lo, k_hi))
    best = max(mags, key=lambda p: mags[p])
    if mags[best] < threshold * total:
        return OscillationReport(False, None, None, None, mags, (k_lo, k_hi))
    ks, vs = list(x.ks), [abs(v) for v in x.values]
    env = [(ks[i], vs[i]) for i in range(1, len(ks) - 1) if vs[i] >= vs[i - 1] and vs[i] >= vs[i + 1] and vs[i]]
    if len(env) < MIN_FIT_POINTS:
        return OscillationReport(True, best, None, None, mags, (k_lo, k_hi), tuple(env))
    a, slope, res = _linear_fit([mp.log(k) for k, _ in env], [mp.log(v) for _, v in env], mp)
    return OscillationReport(True, best, -slope, max(abs(r) for r in res), mags, (k_lo, k_hi), tuple(env))


def synthetic_sequence(fn, k_lo: int, k_hi: int, mp=None) -> GrowthSequence:
    """Sequence k -> fn(k, mp) for generator-recovery checks."""
    if mp is None:
        import mpmath
        mp = mpmath.mp
    ks = tuple(range(k_lo, k_hi + 1))
    return GrowthSequence(ks, tuple(fn(k, mp) for k in ks), None, {"synthetic": True}, mp)
