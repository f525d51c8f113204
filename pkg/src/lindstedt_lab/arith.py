"""Precision contexts, fixed-point helpers, and quadratic-irrational frequencies.

Scalars handed to callers are ``mpmath`` numbers living in the context's own
``MPContext``.  Internally the expansion works on plain integers read as
fixed-point numbers ``n / 2**frac_bits``; the helpers here convert between the
two and evaluate the trigonometric constants the engine needs.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import libmp

from .errors import ConfigurationError, RationalityError

GUARD_BITS = 64
MIN_DIGITS = 30
GRID_EXPONENT_RANGE = (8, 16)


def round_shift(x: int, s: int) -> int:
    """``x / 2**s`` rounded to nearest, ties toward +inf.  ``s <= 0`` shifts left."""
    if s <= 0:
        return x << -s
    return (x + (1 << (s - 1))) >> s


def digits_to_bits(decimal_digits: int) -> int:
    # smallest p with 2**p >= 10**d, i.e. ceil(d * log2(10)) without float error
    return (10 ** decimal_digits - 1).bit_length()


@dataclass(frozen=True)
class Context:
    """Working precision and evaluation-grid size.

    ``prec`` is the binary precision of every returned scalar; ``frac_bits``
    adds ``GUARD_BITS`` for the fixed-point coefficient pipeline.
    """

    decimal_digits: int
    grid_exponent: int = 13
    mp: mpmath.ctx_mp.MPContext = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        mp = mpmath.MPContext()
        mp.prec = self.prec
        object.__setattr__(self, "mp", mp)

    def __reduce__(self):
        return (Context, (self.decimal_digits, self.grid_exponent))

    @property
    def prec(self) -> int:
        return digits_to_bits(self.decimal_digits)

    @property
    def frac_bits(self) -> int:
        return self.prec + GUARD_BITS

    @property
    def grid_size(self) -> int:
        return 1 << self.grid_exponent

    def with_grid(self, grid_exponent: int) -> "Context":
        return make_context(self.decimal_digits, grid_exponent)

    def from_fixed(self, x: int, bits: int | None = None):
        """Fixed-point integer to an mpf rounded to ``prec``."""
        bits = self.frac_bits if bits is None else bits
        return self.mp.mpf(libmp.from_man_exp(int(x), -bits, self.prec, libmp.round_nearest))

    def to_fixed(self, value, bits: int | None = None) -> int:
        return to_fixed(value, self.frac_bits if bits is None else bits)


def make_context(decimal_digits: int, grid_exponent: int = 13) -> Context:
    if not isinstance(decimal_digits, int) or decimal_digits < MIN_DIGITS:
        raise ConfigurationError(f"decimal_digits must be an integer >= {MIN_DIGITS}, got {decimal_digits!r}")
    lo, hi = GRID_EXPONENT_RANGE
    if not isinstance(grid_exponent, int) or not lo <= grid_exponent <= hi:
        raise ConfigurationError(f"grid_exponent must lie in [{lo}, {hi}], got {grid_exponent!r}")
    return Context(decimal_digits, grid_exponent)


def _raw_to_fixed(raw, bits: int) -> int:
    sign, man, exp, _ = raw
    if not man:
        return 0
    v = round_shift(int(man), -(exp + bits))
    return -v if sign else v


def to_fixed(value, bits: int) -> int:
    """Round ``value`` to the nearest multiple of ``2**-bits``.

    Accepts ints, Fractions, decimal strings (parsed exactly enough), floats
    (taken at their exact binary value) and mpmath numbers of any context.
    """
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return value << bits
    if isinstance(value, float):
        value = Fraction(value)
    if isinstance(value, Fraction):
        num = value.numerator << (bits + 1)
        return (num // value.denominator + 1) >> 1
    if isinstance(value, str):
        raw = libmp.from_str(value, bits + 64 + 4 * len(value), libmp.round_nearest)
        return _raw_to_fixed(raw, bits)
    raw = getattr(value, "_mpf_", None)
    if raw is None:
        raise TypeError(f"cannot convert {type(value).__name__} to fixed point")
    return _raw_to_fixed(raw, bits)


def pi_fixed(bits: int) -> int:
    return _raw_to_fixed(libmp.mpf_pi(bits + 16), bits)


def cos_sin_2pi_fixed(angle: int, angle_bits: int, bits: int) -> tuple[int, int]:
    """cos and sin of ``2*pi*angle/2**angle_bits`` as fixed-point integers."""
    x = libmp.from_man_exp(2 * int(angle), -angle_bits)
    c, s = libmp.mpf_cos_sin_pi(x, bits + 16)
    return _raw_to_fixed(c, bits), _raw_to_fixed(s, bits)


# --- frequencies -----------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    name: str
    descriptor: tuple[int, int, int, int]
    label: str
    continued_fraction: str


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in (
        Preset("golden", (-1, 1, 5, 2), "(sqrt(5)-1)/2", "[0;1,1,1,1,1,1,...]"),
        Preset("sqrt3_half", (-1, 1, 3, 2), "(sqrt(3)-1)/2", "[0;2,1,2,1,2,1,...]"),
        Preset("sqrt2", (0, 1, 2, 1), "sqrt(2)", "[1;2,2,2,2,2,2,...]"),
        Preset("sqrt3", (0, 1, 3, 1), "sqrt(3)", "[1;1,2,1,2,1,2,1,...]"),
        Preset("sqrt7_half", (-1, 1, 7, 2), "(sqrt(7)-1)/2", "[0;1,4,1,1,1,4,1,1,1,...]"),
        Preset("sqrt13_sixth", (-1, 1, 13, 6), "(sqrt(13)-1)/6", "[0;2,3,3,3,3,3,...]"),
        Preset("sqrt5_sixth", (-1, 1, 5, 6), "(sqrt(5)-1)/6", "[0;4,1,5,1,5,1,5,...]"),
    )
}


def _quadratic_fixed(p: int, q: int, d: int, r: int, bits: int) -> int:
    """floor-ish fixed-point value of (p + q*sqrt(d))/r with ~1 ulp error, r > 0."""
    g = bits + 64
    s = math.isqrt(d << (2 * g))
    x = (p << g) + q * s
    return round_shift(x // r, 64)


@lru_cache(maxsize=256)
def _omega_fixed(p: int, q: int, d: int, r: int, bits: int) -> int:
    x = _quadratic_fixed(p, q, d, r, bits)
    return x & ((1 << bits) - 1)


@dataclass(frozen=True)
class Frequency:
    """omega = frac((p + q*sqrt(d)) / r), stored by its exact integer descriptor."""

    p: int
    q: int
    d: int
    r: int
    integer_part: int
    label: str
    ctx: Context = field(compare=False, repr=False)
    value: object = field(compare=False, repr=False)

    @property
    def descriptor(self) -> tuple[int, int, int, int]:
        return (self.p, self.q, self.d, self.r)

    @property
    def reduced_descriptor(self) -> tuple[int, int, int, int]:
        return (self.p - self.integer_part * self.r, self.q, self.d, self.r)

    def fixed(self, bits: int) -> int:
        """omega as a fixed-point integer with ``bits`` fractional bits."""
        return _omega_fixed(*self.reduced_descriptor, bits)

    def __reduce__(self):
        return (make_frequency, (self.p, self.q, self.d, self.r, self.ctx, self.label))

    def at(self, ctx: Context) -> "Frequency":
        return make_frequency(self.p, self.q, self.d, self.r, ctx, label=self.label)

    def __str__(self):
        return self.label


def make_frequency(p: int, q: int, d: int, r: int, ctx: Context, label: str | None = None) -> Frequency:
    p, q, d, r = int(p), int(q), int(d), int(r)
    if r == 0:
        raise ZeroDivisionError("frequency denominator r must be nonzero")
    if r < 0:
        p, q, r = -p, -q, -r
    if d < 2 or math.isqrt(d) ** 2 == d or q == 0:
        raise RationalityError(f"(p, q, d, r) = ({p}, {q}, {d}, {r}) describes a rational number")
    n = _quadratic_fixed(p, q, d, r, 256) >> 256
    if label is None:
        label = f"({p}{q:+d}*sqrt({d}))/{r}"
    value = ctx.from_fixed(_omega_fixed(p - n * r, q, d, r, ctx.frac_bits))
    return Frequency(p, q, d, r, n, label, ctx, value)


def preset_frequency(name: str, ctx: Context) -> Frequency:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown frequency preset {name!r}; choose from {sorted(PRESETS)}") from None
    return make_frequency(*preset.descriptor, ctx, label=preset.label)


def parse_frequency(text: str, ctx: Context) -> Frequency:
    """A preset name or a whitespace-separated descriptor ``"p q d r"``."""
    text = text.strip()
    if text in PRESETS:
        return preset_frequency(text, ctx)
    parts = text.replace(",", " ").split()
    if len(parts) != 4:
        raise ConfigurationError(f"frequency must be a preset or 'p q d r', got {text!r}")
    try:
        p, q, d, r = (int(x) for x in parts)
    except ValueError:
        raise ConfigurationError(f"non-integer frequency descriptor {text!r}") from None
    return make_frequency(p, q, d, r, ctx)


def small_divisor(omega: Frequency, ell: int):
    """Fourier symbol of phi(t+w) - 2 phi(t) + phi(t-w): -4 sin^2(pi*ell*omega)."""
    if ell == 0:
        raise ValueError("the zero mode has no small divisor (L_omega kills constants)")
    ctx = omega.ctx
    bits = ctx.prec + 32
    x = (ell * omega.fixed(bits)) % (1 << bits)
    s = libmp.mpf_sin_pi(libmp.from_man_exp(x, -bits), bits)
    s2 = libmp.mpf_mul(s, s, bits)
    return ctx.mp.mpf(libmp.mpf_shift(libmp.mpf_neg(s2), 2))


@dataclass(frozen=True)
class DiophantineResult:
    holds: bool
    nu: object
    tau: object
    L_max: int
    worst_l: int
    worst_ratio: object
    records: tuple[int, ...]


def diophantine_check(omega: Frequency, nu=None, tau=1, L_max: int = 10_000) -> DiophantineResult:
    """Scan |exp(2 pi i l omega) - 1| * l**tau over 1 <= l <= L_max.

    ``worst_l`` minimises the weighted ratio.  ``records`` lists the l at
    which the bare distance |exp(2 pi i l omega) - 1| reaches a new minimum,
    i.e. the best-approximation denominators (Fibonacci numbers for the
    golden mean).  With ``nu=None`` the observed minimum ratio is used, so the
    check holds by construction.
    """
    if L_max < 1:
        raise ValueError("L_max must be >= 1")
    if nu is not None and nu <= 0:
        raise ValueError("nu must be positive")
    mp = omega.ctx.mp
    tau_mp = mp.mpf(tau.numerator) / tau.denominator if isinstance(tau, Fraction) else mp.mpf(tau)
    bits = omega.ctx.prec + 32
    w = omega.fixed(bits)
    mask = (1 << bits) - 1
    worst_l, worst = 0, None
    best = None
    records = []
    for ell in range(1, L_max + 1):
        s = libmp.mpf_sin_pi(libmp.from_man_exp((ell * w) & mask, -bits), bits)
        dist = 2 * abs(mp.mpf(s))
        ratio = dist * mp.power(ell, tau_mp)
        if worst is None or ratio < worst:
            worst, worst_l = ratio, ell
        if best is None or dist < best:
            best = dist
            records.append(ell)
    if nu is None:
        nu = worst
    nu_mp = mp.mpf(nu.numerator) / nu.denominator if isinstance(nu, Fraction) else mp.mpf(nu)
    return DiophantineResult(bool(worst >= nu_mp), nu, tau, L_max, worst_l, worst, tuple(records))


class FrequencyTables:
    """Fixed-point multipliers and twiddles for one frequency at one precision.

    ``multiplier(l)`` is m(l) = -4 sin^2(pi l omega) scaled by ``2**div_bits``
    with ``div_bits = frac_bits + 128`` so the cohomology division keeps full
    relative accuracy for small divisors.  ``twiddle(l)`` is
    (cos, sin)(2 pi l omega) at ``frac_bits``.  Tables grow on demand.
    """

    def __init__(self, omega: Frequency, frac_bits: int):
        self.frac_bits = frac_bits
        self.div_bits = frac_bits + 128
        self._abits = self.div_bits + 64
        self._w = omega.fixed(self._abits)
        self._mult = [0]
        self._tw = [(1 << frac_bits, 0)]
        self._lock = threading.Lock()

    def _grow(self, n: int):
        with self._lock:
            mask = (1 << self._abits) - 1
            for ell in range(len(self._mult), n + 1):
                x = libmp.from_man_exp((ell * self._w) & mask, -self._abits)
                c, s = libmp.mpf_cos_sin_pi(libmp.mpf_shift(x, 1), self.frac_bits + 16)
                self._tw.append((_raw_to_fixed(c, self.frac_bits), _raw_to_fixed(s, self.frac_bits)))
                sp = libmp.mpf_sin_pi(x, self.div_bits + 16)
                self._mult.append(-_raw_to_fixed(libmp.mpf_shift(libmp.mpf_mul(sp, sp), 2), self.div_bits))

    def multiplier(self, ell: int) -> int:
        ell = abs(ell)
        if ell >= len(self._mult):
            self._grow(max(ell, 2 * len(self._mult)))
        return self._mult[ell]

    def twiddle(self, ell: int) -> tuple[int, int]:
        a = abs(ell)
        if a >= len(self._tw):
            self._grow(max(a, 2 * len(self._tw)))
        c, s = self._tw[a]
        return (c, s) if ell >= 0 else (c, -s)


@lru_cache(maxsize=64)
def _tables(descriptor, frac_bits):
    p, q, d, r = descriptor
    ctx = Context(MIN_DIGITS)  # value unused; tables only need the exact descriptor
    return FrequencyTables(make_frequency(p, q, d, r, ctx), frac_bits)


def frequency_tables(omega: Frequency, frac_bits: int) -> FrequencyTables:
    return _tables(omega.descriptor, frac_bits)


@lru_cache(maxsize=32)
def grid_twiddles(size: int, bits: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """cos/sin(2 pi m / size) for 0 <= m < size/2, fixed point."""
    if size & (size - 1):
        raise ValueError("grid size must be a power of two")
    e = size.bit_length() - 1
    pairs = [cos_sin_2pi_fixed(m, e, bits) for m in range(max(size // 2, 1))]
    return tuple(c for c, _ in pairs), tuple(s for _, s in pairs)
