"""Coefficient archives and CSV export.

An archive is a directory holding ``manifest.json`` and ``orders/kNNNNN.json``,
one record per order.  Every scalar is written as an exact hexadecimal float
``[-]0x<hex mantissa>p<binary exponent>``, so a save/load round trip is
bit-exact.  Records are append-only; the manifest is rewritten after each
record so an interrupted run can be resumed from the last complete order.
"""

from __future__ import annotations

import csv
import json
import os
import re
import tempfile
import time
from pathlib import Path

from . import __version__
from .arith import Context, make_context, make_frequency, round_shift
from .errors import ArchiveError, ArchiveVersionError, CorruptRecordError, PrecisionDowngradeError
from .gevrey import FitResult, GrowthSequence, OscillationReport
from .lindstedt import (
    NORMALIZATION,
    SIGN_CONVENTION,
    CompositionState,
    LindstedtSeries,
    expand,
    forcing_term,
)
from .trigpoly import TrigPoly
from .validate import CrossEntry, DegreeReport, ResidualReport, SweepReport

FORMAT = "lindstedt-lab-archive"
FORMAT_VERSION = 1
_HEX = re.compile(r"^(-?)0x([0-9a-f]+)p([+-]\d+)$")


def hex_encode(m: int, bits: int) -> str:
    """Fixed-point integer m / 2**bits as an exact hex float string."""
    if m == 0:
        return "0x0p+0"
    sign = "-" if m < 0 else ""
    return f"{sign}0x{abs(m):x}p{-bits:+d}"


def hex_decode(text: str, bits: int) -> int:
    """Inverse of ``hex_encode`` at ``bits`` fractional bits; must be exact."""
    mt = _HEX.match(text)
    if not mt:
        raise ValueError(f"malformed hex float {text!r}")
    m = int(mt.group(2), 16)
    e = int(mt.group(3))
    if e + bits < 0:
        if m & ((1 << -(e + bits)) - 1):
            raise ValueError(f"{text!r} is not representable with {bits} fractional bits")
        m >>= -(e + bits)
    else:
        m <<= e + bits
    return -m if mt.group(1) else m


def _created() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _poly_payload(p: TrigPoly, bits: int) -> list:
    return [[hex_encode(a, bits), hex_encode(b, bits)] for a, b in zip(p.re, p.im)]


def _record_name(k: int) -> str:
    return f"k{k:05d}.json"


class ArchiveWriter:
    """Append-only writer; use ``append`` as the ``on_order`` hook of ``expand``."""

    def __init__(self, path, series: LindstedtSeries, created: str | None = None):
        self.path = Path(path)
        (self.path / "orders").mkdir(parents=True, exist_ok=True)
        self.bits = series.ctx.frac_bits
        self.manifest = {
            "format": FORMAT,
            "format_version": FORMAT_VERSION,
            "tool_version": __version__,
            "created": created or _created(),
            "omega": {"descriptor": list(series.omega.descriptor), "label": series.omega.label},
            "decimal_digits": series.ctx.decimal_digits,
            "grid_exponent": series.ctx.grid_exponent,
            "frac_bits": self.bits,
            "engine": series.engine,
            "audit_grid": series.audit_grid,
            "normalization": NORMALIZATION,
            "sign_convention": SIGN_CONVENTION,
            "N": 0,
        }

    def append(self, series: LindstedtSeries, k: int):
        if k != self.manifest["N"] + 1:
            raise ArchiveError(f"archive holds orders 1..{self.manifest['N']}; cannot append order {k}")
        b = self.bits
        rec = {
            "k": k,
            "c": hex_encode(series.c_fixed[k], b),
            "degree": series.u[k].degree,
            "u": _poly_payload(series.u[k], b),
            "sigma": _poly_payload(series.sigma[k], b),
            "gamma": _poly_payload(series.gamma[k], b),
        }
        if series.spurious:
            rec["spurious"] = hex_encode(series.spurious[k - 1], b)
        _atomic_write(self.path / "orders" / _record_name(k), _dumps(rec))
        self.manifest["N"] = k
        self.flush()

    def flush(self):
        _atomic_write(self.path / "manifest.json", _dumps(self.manifest))


def save(series: LindstedtSeries, path) -> dict:
    path = Path(path)
    if (path / "manifest.json").exists():
        raise ArchiveError(f"{path} already holds an archive")
    w = ArchiveWriter(path, series)
    for k in range(1, series.N + 1):
        w.append(series, k)
    w.flush()
    return dict(w.manifest)


def read_manifest(path) -> dict:
    path = Path(path)
    try:
        man = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ArchiveError(f"no archive manifest in {path}") from None
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"unreadable manifest in {path}: {exc}") from None
    if man.get("format") != FORMAT or man.get("format_version") != FORMAT_VERSION:
        raise ArchiveVersionError(
            f"archive format {man.get('format')!r} v{man.get('format_version')} is not {FORMAT!r} v{FORMAT_VERSION}"
        )
    return man


def _parse_poly(ctx: Context, rows, stored_bits: int, k: int, what: str) -> TrigPoly:
    shift = stored_bits - ctx.frac_bits
    try:
        re = tuple(round_shift(hex_decode(a, stored_bits), shift) for a, _ in rows)
        im = tuple(round_shift(hex_decode(b, stored_bits), shift) for _, b in rows)
        return TrigPoly(ctx, re, im)
    except (ValueError, TypeError) as exc:
        raise CorruptRecordError(k, f"{what}: {exc}") from None


def load(path, ctx: Context | None = None) -> LindstedtSeries:
    path = Path(path)
    man = read_manifest(path)
    stored = man["frac_bits"]
    if ctx is None:
        ctx = make_context(man["decimal_digits"], man["grid_exponent"])
    if ctx.frac_bits < stored:
        raise PrecisionDowngradeError(
            f"archive stores {man['decimal_digits']} digits; refusing to load at {ctx.decimal_digits}"
        )
    omega = make_frequency(*man["omega"]["descriptor"], ctx, label=man["omega"]["label"])
    state = CompositionState.initial(ctx)
    series = LindstedtSeries(omega, ctx, [TrigPoly.zero(ctx)], [0], state, man["engine"], man.get("audit_grid"))
    for k in range(1, man["N"] + 1):
        f = path / "orders" / _record_name(k)
        try:
            rec = json.loads(f.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CorruptRecordError(k, "record file missing") from None
        except json.JSONDecodeError as exc:
            raise CorruptRecordError(k, f"unparseable JSON ({exc})") from None
        if not isinstance(rec, dict) or rec.get("k") != k:
            raise CorruptRecordError(k, "order index mismatch")
        for key in ("u", "sigma", "gamma", "c", "degree"):
            if key not in rec:
                raise CorruptRecordError(k, f"missing field {key!r}")
        if len(rec["u"]) != rec["degree"] + 1:
            raise CorruptRecordError(k, f"u has {len(rec['u'])} coefficients, degree says {rec['degree'] + 1}")
        u = _parse_poly(ctx, rec["u"], stored, k, "u")
        sig = _parse_poly(ctx, rec["sigma"], stored, k, "sigma")
        gam = _parse_poly(ctx, rec["gamma"], stored, k, "gamma")
        try:
            c = round_shift(hex_decode(rec["c"], stored), stored - ctx.frac_bits)
            spur = rec.get("spurious")
            if spur is not None:
                series.spurious.append(round_shift(hex_decode(spur, stored), stored - ctx.frac_bits))
        except (ValueError, TypeError) as exc:
            raise CorruptRecordError(k, str(exc)) from None
        series.u.append(u)
        series.c_fixed.append(c)
        state.sigma.append(sig)
        state.gamma.append(gam)
        state.S.append(forcing_term(sig, gam))
    series.manifest.update({k: man[k] for k in ("created", "tool_version", "normalization", "sign_convention")})
    return series


def expand_archive(omega, N: int, ctx: Context, path, resume: bool = False, engine: str = "spectral",
                   audit: bool = False) -> LindstedtSeries:
    """Expand to order N while checkpointing every order into ``path``.

    With ``resume`` an existing archive is continued from its last order; the
    result is identical to an uninterrupted run.
    """
    path = Path(path)
    prior = None
    if (path / "manifest.json").exists():
        if not resume:
            raise ArchiveError(f"{path} already holds an archive; pass resume to continue it")
        prior = load(path, ctx)
        man = read_manifest(path)
        if tuple(man["omega"]["descriptor"]) != omega.descriptor or man["frac_bits"] != ctx.frac_bits:
            raise ArchiveError("archive frequency or precision differs from the requested run")
        writer = ArchiveWriter(path, prior, created=man["created"])
        writer.manifest["N"] = man["N"]
    else:
        writer = None
    if writer is None:
        def hook(series, k, _w=[]):
            if not _w:
                _w.append(ArchiveWriter(path, series))
            _w[0].append(series, k)
    else:
        hook = writer.append
    return expand(omega, N, ctx, engine=engine, audit=audit, resume=prior, on_order=hook)


# -- CSV -----------------------------------------------------------------------

def _fmt(x, digits: int) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, str)):
        return str(x)
    if isinstance(x, float):
        return repr(x) if x != x or x in (float("inf"), float("-inf")) else f"{x:.{min(digits, 17)}g}"
    if hasattr(x, "_mpf_"):
        import mpmath
        return mpmath.nstr(x, digits, min_fixed=-4, max_fixed=8)
    return str(x)


def export_csv(obj, path, digits: int = 20):
    """Write a report object as CSV with a header row; returns the path."""
    if isinstance(obj, GrowthSequence):
        header, rows = ["k", "value"], list(obj)
    elif isinstance(obj, FitResult):
        header = ["R", "sigma", "b", "e_inf", "k_lo", "k_hi"]
        rows = [(obj.R, obj.sigma, obj.b, obj.e_inf, obj.k_range[0], obj.k_range[1])]
    elif isinstance(obj, ResidualReport):
        header, rows = ["n", "log10_value"], obj.rows()
    elif isinstance(obj, SweepReport):
        header, rows = ["N", "log10_value"], obj.rows()
    elif isinstance(obj, DegreeReport):
        header = ["n", "degree", "log10_spurious_abs", "log10_spurious_rel", "ok"]
        rows = [(e.n, e.stored_degree, e.spurious_abs, e.spurious_rel, int(e.ok)) for e in obj.entries]
    elif isinstance(obj, OscillationReport):
        header = ["period", "magnitude"]
        rows = sorted(obj.magnitudes.items())
    elif isinstance(obj, list) and obj and isinstance(obj[0], CrossEntry):
        header = ["n", "log10_abs", "log10_rel"]
        rows = [(e.n, e.log10_abs, e.log10_rel) for e in obj]
    elif isinstance(obj, list) and obj and isinstance(obj[0], tuple) and isinstance(obj[0][1], FitResult):
        header = ["norm", "R", "sigma", "b", "e_inf", "k_lo", "k_hi"]
        rows = [(lab, f.R, f.sigma, f.b, f.e_inf, f.k_range[0], f.k_range[1]) for lab, f in obj]
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x, digits) for x in row])
    return path
