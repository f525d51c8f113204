"""Real trigonometric polynomials with fixed-point Fourier coefficients.

A ``TrigPoly`` of degree n stores the complex coefficients f(l), 0 <= l <= n,
as pairs of integers scaled by ``2**ctx.frac_bits``; negative modes follow
from realness, f(-l) = conj f(l).  Products are exact integer convolutions
(Kronecker substitution) with one rounding per output coefficient, so the
result does not depend on any summation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import libmp

from . import kernels
from .arith import (
    Context,
    Frequency,
    _raw_to_fixed,
    cos_sin_2pi_fixed,
    grid_twiddles,
    pi_fixed,
    round_shift,
    to_fixed,
)
from .errors import AliasingError, ConfigurationError

NORM_CONVENTIONS = ("sqrt", "literal", "dft")
DEFAULT_DFT_SIZE = 1 << 13


@dataclass(frozen=True, eq=False)
class TrigPoly:
    ctx: Context
    re: tuple
    im: tuple

    def __post_init__(self):
        if len(self.re) != len(self.im) or not self.re:
            raise ValueError("re/im must be non-empty and of equal length")
        if self.im[0] != 0:
            raise ValueError("zero mode of a real function must be real")

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, ctx: Context, degree: int = 0) -> "TrigPoly":
        return cls(ctx, (0,) * (degree + 1), (0,) * (degree + 1))

    @classmethod
    def constant(cls, ctx: Context, value) -> "TrigPoly":
        return cls(ctx, (to_fixed(value, ctx.frac_bits),), (0,))

    @classmethod
    def mode(cls, ctx: Context, ell: int, cos_amp=0, sin_amp=0) -> "TrigPoly":
        """a*cos(2 pi l theta) + b*sin(2 pi l theta) for l >= 1."""
        if ell < 1:
            raise ValueError("mode index must be >= 1")
        re = [0] * (ell + 1)
        im = [0] * (ell + 1)
        # a cos + b sin = (a - i b)/2 e^{+} + conj
        if cos_amp:
            re[ell] = round_shift(to_fixed(cos_amp, ctx.frac_bits + 8), 9)
        if sin_amp:
            im[ell] = -round_shift(to_fixed(sin_amp, ctx.frac_bits + 8), 9)
        return cls(ctx, tuple(re), tuple(im))

    @classmethod
    def sin(cls, ctx: Context, ell: int = 1, amp=1) -> "TrigPoly":
        return cls.mode(ctx, ell, sin_amp=amp)

    @classmethod
    def cos(cls, ctx: Context, ell: int = 1, amp=1) -> "TrigPoly":
        return cls.mode(ctx, ell, cos_amp=amp)

    @classmethod
    def from_coefficients(cls, ctx: Context, coeffs: Iterable) -> "TrigPoly":
        """Coefficients f(0), f(1), ... as complex-like numbers (mpc, complex, pairs)."""
        re, im = [], []
        for c in coeffs:
            if isinstance(c, tuple):
                a, b = c
            else:
                a, b = getattr(c, "real", c), getattr(c, "imag", 0)
            re.append(to_fixed(a, ctx.frac_bits))
            im.append(to_fixed(b, ctx.frac_bits))
        if not re:
            re, im = [0], [0]
        im[0] = 0
        return cls(ctx, tuple(re), tuple(im))

    # -- basic access --------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.re) - 1

    @property
    def effective_degree(self) -> int:
        for ell in range(self.degree, 0, -1):
            if self.re[ell] or self.im[ell]:
                return ell
        return 0

    @property
    def frac_bits(self) -> int:
        return self.ctx.frac_bits

    def coeff(self, ell: int):
        """f(l) as an mpc; negative l by conjugation, beyond the degree zero."""
        a = abs(ell)
        mp = self.ctx.mp
        if a > self.degree:
            return mp.mpc(0)
        r = self.ctx.from_fixed(self.re[a])
        i = self.ctx.from_fixed(self.im[a])
        return mp.mpc(r, i if ell >= 0 else -i)

    def coefficients(self) -> list:
        return [self.coeff(ell) for ell in range(self.degree + 1)]

    def mean(self):
        return self.ctx.from_fixed(self.re[0])

    def padded(self, degree: int) -> "TrigPoly":
        if degree < self.degree:
            raise ValueError("padding cannot lower the degree")
        extra = (0,) * (degree - self.degree)
        return TrigPoly(self.ctx, self.re + extra, self.im + extra)

    def truncated(self, degree: int) -> "TrigPoly":
        return TrigPoly(self.ctx, self.re[: degree + 1], self.im[: degree + 1])

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        if self.frac_bits != other.frac_bits:
            return False
        n = max(self.degree, other.degree)
        a, b = self.padded(n), other.padded(n)
        return a.re == b.re and a.im == b.im

    def __hash__(self):
        t = self.truncated(self.effective_degree)
        return hash((self.frac_bits, t.re, t.im))

    def __repr__(self):
        return f"TrigPoly(degree={self.degree}, digits={self.ctx.decimal_digits})"

    # -- algebra -------------------------------------------------------------

    def _check(self, other: "TrigPoly"):
        if not isinstance(other, TrigPoly):
            raise TypeError(f"expected TrigPoly, got {type(other).__name__}")
        if other.frac_bits != self.frac_bits:
            raise ConfigurationError(
                f"precision mismatch: {self.ctx.decimal_digits} vs {other.ctx.decimal_digits} digits"
            )

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return TrigPoly(self.ctx, tuple(-x for x in self.re), tuple(-x for x in self.im))

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__


def add(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    f._check(g)
    n = max(f.degree, g.degree)
    a, b = f.padded(n), g.padded(n)
    return TrigPoly(f.ctx, tuple(x + y for x, y in zip(a.re, b.re)), tuple(x + y for x, y in zip(a.im, b.im)))


def sub(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    return add(f, -g)


def scale(f: TrigPoly, a) -> TrigPoly:
    """Multiply by a real scalar (int, Fraction, float, str, mpf)."""
    bits = f.frac_bits
    if isinstance(a, int) and not isinstance(a, bool):
        return TrigPoly(f.ctx, tuple(a * x for x in f.re), tuple(a * x for x in f.im))
    if isinstance(a, Fraction):
        n, d = a.numerator, a.denominator
        rd = lambda x: ((2 * n * x) // d + 1) >> 1
        return TrigPoly(f.ctx, tuple(map(rd, f.re)), tuple(map(rd, f.im)))
    if getattr(a, "imag", 0):
        raise TypeError("scale takes a real factor; realness would be lost")
    s = to_fixed(getattr(a, "real", a), bits)
    return TrigPoly(f.ctx, tuple(round_shift(x * s, bits) for x in f.re), tuple(round_shift(x * s, bits) for x in f.im))


# -- Kronecker products -------------------------------------------------------

def _pack(values: Sequence[int], slot_bytes: int) -> int:
    """Evaluate sum values[i] * 2**(8*slot_bytes*i) for signed integers."""
    pos = b"".join((v if v > 0 else 0).to_bytes(slot_bytes, "little") for v in values)
    neg = b"".join((-v if v < 0 else 0).to_bytes(slot_bytes, "little") for v in values)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _unpack(x: int, count: int, slot_bytes: int) -> list[int]:
    """Inverse of ``_pack`` provided every slot lies in (-2**(B-1), 2**(B-1))."""
    B = 8 * slot_bytes
    half = 1 << (B - 1)
    bias = int.from_bytes((b"\x00" * (slot_bytes - 1) + b"\x80") * count, "little")
    raw = (x + bias).to_bytes(slot_bytes * count + 1, "little")
    return [
        int.from_bytes(raw[i * slot_bytes:(i + 1) * slot_bytes], "little") - half
        for i in range(count)
    ]


def _laurent(f: TrigPoly, offset: int, weight: int = 1) -> tuple[list[int], list[int]]:
    """Full coefficient vector for l = -n..n placed at slots l + offset."""
    n = f.degree
    re = [0] * (offset - n) + [weight * x for x in reversed(f.re[1:])] + [weight * x for x in f.re]
    im = [0] * (offset - n) + [-weight * x for x in reversed(f.im[1:])] + [weight * x for x in f.im]
    return re, im


def weighted_product_sum(terms: Sequence[tuple[int, TrigPoly, TrigPoly]]) -> TrigPoly:
    """sum_j w_j * (f_j * g_j) exactly, rounded once per output coefficient.

    All pairs must have the same total degree D = deg f_j + deg g_j.
    """
    if not terms:
        raise ValueError("empty product sum")
    ctx = terms[0][1].ctx
    bits = ctx.frac_bits
    D = terms[0][1].degree + terms[0][2].degree
    mag_f = mag_g = wmax = 1
    for w, f, g in terms:
        terms[0][1]._check(f)
        f._check(g)
        if f.degree + g.degree != D:
            raise ValueError("all pairs must share the same total degree")
        wmax = max(wmax, abs(w))
        mag_f = max(mag_f, max(map(abs, f.re + f.im)))
        mag_g = max(mag_g, max(map(abs, g.re + g.im)))
    width = 2 * D + 1
    need = mag_f.bit_length() + mag_g.bit_length() + wmax.bit_length() + (width * len(terms)).bit_length() + 3
    slot = (need + 7) // 8
    acc_rr = acc_ii = acc_ri = acc_ir = 0
    for w, f, g in terms:
        fr, fi = _laurent(f, f.degree, w)
        gr, gi = _laurent(g, g.degree)
        Fr, Fi, Gr, Gi = (_pack(v, slot) for v in (fr, fi, gr, gi))
        acc_rr += Fr * Gr
        acc_ii += Fi * Gi
        acc_ri += Fr * Gi
        acc_ir += Fi * Gr
    rr = _unpack(acc_rr, width, slot)
    ii = _unpack(acc_ii, width, slot)
    ri = _unpack(acc_ri, width, slot)
    ir = _unpack(acc_ir, width, slot)
    re = tuple(round_shift(rr[D + m] - ii[D + m], bits) for m in range(D + 1))
    im = [round_shift(ri[D + m] + ir[D + m], bits) for m in range(D + 1)]
    im[0] = 0
    return TrigPoly(ctx, re, tuple(im))


def mul(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    f._check(g)
    return weighted_product_sum([(1, f, g)])


# -- shifts ----------------------------------------------------------------

def _angle_fixed(delta, bits: int) -> int:
    if isinstance(delta, Frequency):
        return delta.fixed(bits)
    return to_fixed(delta, bits)


def shift(f: TrigPoly, delta, sign: int = 1) -> TrigPoly:
    """f(theta + sign*delta); ``delta`` may be a Frequency or any real scalar."""
    bits = f.frac_bits
    abits = bits + 64
    mask = (1 << abits) - 1
    a = sign * _angle_fixed(delta, abits)
    re, im = [f.re[0]], [0]
    for ell in range(1, f.degree + 1):
        c, s = cos_sin_2pi_fixed((ell * a) & mask, abits, bits)
        x, y = f.re[ell], f.im[ell]
        re.append(round_shift(x * c - y * s, bits))
        im.append(round_shift(x * s + y * c, bits))
    return TrigPoly(f.ctx, tuple(re), tuple(im))


def mean(f: TrigPoly):
    return f.mean()


# -- norms -------------------------------------------------------------------

def _sq(f: TrigPoly) -> list[int]:
    return [x * x + y * y for x, y in zip(f.re, f.im)]


def _finish(f: TrigPoly, total_fixed: int, total_bits: int, convention: str, dft_size: int):
    """total_fixed / 2**total_bits is the printed two-sided sum of |f(l)|^2 w_l."""
    if convention not in NORM_CONVENTIONS:
        raise ConfigurationError(f"norm convention must be one of {NORM_CONVENTIONS}, got {convention!r}")
    prec = f.ctx.prec
    s = libmp.from_man_exp(total_fixed, -total_bits, prec + 16)
    if convention == "literal":
        return f.ctx.mp.mpf(libmp.mpf_pos(s, prec))
    r = libmp.mpf_sqrt(s, prec + 16)
    if convention == "dft":
        r = libmp.mpf_mul(r, libmp.from_int(dft_size), prec + 16)
    return f.ctx.mp.mpf(libmp.mpf_pos(r, prec))


def analytic_norm(f: TrigPoly, rho, convention: str = "sqrt", dft_size: int = DEFAULT_DFT_SIZE):
    """Two-sided sum of |f(l)|^2 exp(2 pi |l| rho), square-rooted unless ``literal``.

    ``dft`` multiplies the square-rooted value by ``dft_size``, i.e. measures
    the coefficients an unnormalised ``dft_size``-point DFT would return.
    """
    ctx = f.ctx
    wbits = ctx.prec + 32
    if libmp.mpf_sign(_to_raw(rho, wbits)) < 0:
        raise ConfigurationError("rho must be non-negative")
    # q = exp(2 pi rho) as a fixed-point number, powers accumulated exactly
    q_raw = libmp.mpf_exp(libmp.mpf_mul(libmp.mpf_shift(libmp.mpf_pi(wbits + 32), 1),
                                        _to_raw(rho, wbits + 32), wbits + 32), wbits + 32)
    sq = _sq(f)
    total = sq[0] << wbits
    w_raw = libmp.fone
    for ell in range(1, f.degree + 1):
        w_raw = libmp.mpf_mul(w_raw, q_raw, wbits + 32)
        if sq[ell]:
            total += 2 * sq[ell] * _raw_to_fixed(w_raw, wbits)
    return _finish(f, total, 2 * f.frac_bits + wbits, convention, dft_size)


def sobolev_norm(f: TrigPoly, r: int, convention: str = "sqrt", dft_size: int = DEFAULT_DFT_SIZE):
    """sqrt of sum over l of (2 pi l)^(2r) |f(l)|^2; ``dft`` as in ``analytic_norm``."""
    if r < 0 or int(r) != r:
        raise ConfigurationError("Sobolev order r must be a non-negative integer")
    r = int(r)
    if convention == "literal":
        raise ConfigurationError("the Sobolev norm is always square-rooted")
    sq = _sq(f)
    total = sum(2 * sq[ell] * ell ** (2 * r) for ell in range(1, f.degree + 1))
    if r == 0:
        total += sq[0]
    wbits = f.ctx.prec + 32
    two_pi_2r = _raw_to_fixed(libmp.mpf_pow_int(libmp.mpf_shift(libmp.mpf_pi(wbits + 32), 1), 2 * r, wbits + 32), wbits)
    return _finish(f, total * two_pi_2r, 2 * f.frac_bits + wbits, convention, dft_size)


def l1_norm(f: TrigPoly):
    """sum over both signs of |f(l)|; bounds the sup norm."""
    mp = f.ctx.mp
    total = abs(f.ctx.from_fixed(f.re[0]))
    for ell in range(1, f.degree + 1):
        total += 2 * mp.sqrt(f.ctx.from_fixed(f.re[ell] ** 2 + f.im[ell] ** 2, 2 * f.frac_bits))
    return total


def _to_raw(x, prec: int):
    if isinstance(x, (int, Fraction, float, str)):
        return to_fixed_raw(x, prec)
    raw = getattr(x, "_mpf_", None)
    if raw is None:
        raise TypeError(f"unsupported scalar {type(x).__name__}")
    return raw


def to_fixed_raw(x, prec: int):
    return libmp.from_man_exp(to_fixed(x, prec + 64), -(prec + 64), prec + 64)


# -- grid evaluation -----------------------------------------------------------

def eval_grid_fixed(f: TrigPoly, size: int | None = None) -> list[int]:
    """Samples f(j/M), j = 0..M-1, as fixed-point integers."""
    M = f.ctx.grid_size if size is None else size
    if M <= 2 * f.degree:
        raise AliasingError(f"grid of {M} points cannot resolve degree {f.degree} (need > {2 * f.degree})")
    re = [0] * M
    im = [0] * M
    re[0] = f.re[0]
    for ell in range(1, f.degree + 1):
        re[ell], im[ell] = f.re[ell], f.im[ell]
        re[M - ell], im[M - ell] = f.re[ell], -f.im[ell]
    cos_t, sin_t = grid_twiddles(M, f.frac_bits)
    vals, _ = kernels.fft(re, im, cos_t, sin_t, f.frac_bits, 1)
    return vals


def eval_grid(f: TrigPoly, size: int | None = None) -> list:
    return [f.ctx.from_fixed(v) for v in eval_grid_fixed(f, size)]


def sup_norm(f: TrigPoly, size: int | None = None):
    vals = eval_grid_fixed(f, size)
    return f.ctx.from_fixed(max(abs(v) for v in vals))


def grid_coefficients(ctx: Context, values: Sequence[int], degree: int) -> tuple[TrigPoly, int]:
    """Discrete Fourier analysis of real fixed-point samples.

    Returns the degree-``degree`` polynomial and the largest fixed-point
    magnitude among the discarded modes (the aliasing/rounding audit).
    """
    M = len(values)
    if M <= 2 * degree:
        raise AliasingError(f"{M} samples cannot determine degree {degree}")
    cos_t, sin_t = grid_twiddles(M, ctx.frac_bits)
    re, im = kernels.fft(list(values), [0] * M, cos_t, sin_t, ctx.frac_bits, -1)
    e = M.bit_length() - 1
    re = [round_shift(x, e) for x in re]
    im = [round_shift(x, e) for x in im]
    spurious = max((abs(re[t]) + abs(im[t]) for t in range(degree + 1, M - degree)), default=0)
    out_im = list(im[: degree + 1])
    out_im[0] = 0
    return TrigPoly(ctx, tuple(re[: degree + 1]), tuple(out_im)), spurious


def two_pi_fixed(bits: int) -> int:
    return 2 * pi_fixed(bits)


def with_context(f: TrigPoly, ctx: Context) -> TrigPoly:
    """Re-express f at another precision (exact when raising, rounded when lowering)."""
    s = f.frac_bits - ctx.frac_bits
    return TrigPoly(ctx, tuple(round_shift(x, s) for x in f.re), tuple(round_shift(x, s) for x in f.im))
