"""Command-line front end: expand, analyze, validate, centralize.

Settings come from flags, then an optional JSON config file (``--config``),
then the built-in defaults.  Exit codes: 0 success, 2 configuration,
3 computation, 4 validation gate, 5 archive / I/O.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .arith import PRESETS, make_context, parse_frequency
from .errors import ArchiveError, ComputeError, ConfigurationError, LabError, ValidationGateError
from .gevrey import (
    NormSpec,
    centralize_x,
    centralize_z,
    factorial_scale,
    fit_log,
    fit_log_shifted,
    growth_sequence,
    oscillation_report,
    GrowthSequence,
)
from .store import expand_archive, export_csv, load
from .validate import cohomology_report, cross_compare, degree_check, invariance_sweep

log = logging.getLogger("lindstedt_lab")

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_GATE, EXIT_IO = 0, 2, 3, 4, 5
OUT_ENV = "LINDSTEDT_LAB_OUT"

DEFAULTS = {
    "omega": "golden",
    "digits": 600,
    "orders": 500,
    "grid_exp": 13,
    "rho": [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7],
    "sobolev_r": [1, 2, 3, 4, 5, 6],
    "fit_lo": 100,
    "fit_hi": 300,
    "eps": ["1e-2", "1e-3"],
    "n_lo": 5,
    "n_hi": 35,
    "norm_convention": "dft",
    "dft_size": 8192,
    "engine": "spectral",
    "slope_tol": 0.25,
}


def _rho_value(x) -> str:
    # keep decimal strings exact; floats go through repr
    return x if isinstance(x, str) else repr(float(x))


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over DEFAULTS."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigurationError(f"config file {args.config} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = set(data) - set(DEFAULTS) - {"out"}
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key, val in vars(args).items():
        if val is not None and (key in DEFAULTS or key == "out"):
            cfg[key] = val
    if cfg["norm_convention"] not in ("sqrt", "literal", "dft"):
        raise ConfigurationError(f"norm convention {cfg['norm_convention']!r} not in sqrt|literal|dft")
    for key in ("digits", "orders", "grid_exp", "fit_lo", "fit_hi", "n_lo", "n_hi", "dft_size"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigurationError(f"{key} must be an integer")
    return cfg


def _out_dir(cfg: dict, default: Path) -> Path:
    if cfg.get("out"):
        return Path(cfg["out"])
    root = os.environ.get(OUT_ENV)
    return Path(root) / default if root else default


def _archive_default(cfg: dict) -> Path:
    label = cfg["omega"] if cfg["omega"] in PRESETS else "omega-" + "_".join(str(cfg["omega"]).split())
    return Path(f"{label}-d{cfg['digits']}-N{cfg['orders']}")


def cmd_expand(args) -> int:
    cfg = resolve(args)
    ctx = make_context(cfg["digits"], cfg["grid_exp"])
    omega = parse_frequency(str(cfg["omega"]), ctx)
    out = _out_dir(cfg, _archive_default(cfg))
    log.info("expanding %s to order %d at %d digits into %s", omega.label, cfg["orders"], ctx.decimal_digits, out)
    series = expand_archive(omega, cfg["orders"], ctx, out, resume=args.resume, engine=cfg["engine"],
                            audit=args.audit)
    print(f"archive {out}: orders 1..{series.N}, omega={omega.label}, digits={ctx.decimal_digits}")
    return EXIT_OK


def _norms(cfg: dict, conv: str):
    specs = []
    for rho in cfg["rho"]:
        specs.append((f"rho={_rho_value(rho)}", NormSpec.analytic(float(rho), conv, cfg["dft_size"])))
    for r in cfg["sobolev_r"]:
        specs.append((f"r={int(r)}", NormSpec.sobolev(int(r), "sqrt" if conv == "literal" else conv,
                                                      cfg["dft_size"])))
    return specs


def cmd_analyze(args) -> int:
    cfg = resolve(args)
    if not cfg["rho"] and not cfg["sobolev_r"]:
        raise ConfigurationError("no norms selected: both the rho and r lists are empty")
    series = load(args.archive)
    lo, hi = cfg["fit_lo"], cfg["fit_hi"]
    if hi > series.N:
        raise ArchiveError(f"archive reaches order {series.N}; fit range ends at {hi}")
    out = _out_dir(cfg, Path(args.archive) / "analysis")
    fits = []
    print(f"{'norm':<14}{'R':>12}{'sigma':>12}{'e_inf':>12}")
    for label, spec in _norms(cfg, cfg["norm_convention"]):
        seq = growth_sequence(series, spec, hi)
        export_csv(seq, out / f"sequence_{label}.csv")
        fit = fit_log(seq, lo, hi)
        fits.append((label, fit))
        row = fit.row()
        print(f"{label:<14}{row['R']:>12.6f}{row['sigma']:>12.6f}{row['e_inf']:>12.6f}")
        if args.factorial:
            ff = fit_log(factorial_scale(seq), lo, hi)
            fits.append((label + ":factorial", ff))
        if args.shifted:
            fs = fit_log_shifted(seq, lo, hi)
            fits.append((label + ":shifted", fs))
    export_csv(fits, out / "fits.csv")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = resolve(args)
    series = load(args.archive)
    out = _out_dir(cfg, Path(args.archive) / "validation")
    failures = []
    coh = cohomology_report(series)
    export_csv(coh, out / "cohomology.csv")
    worst = max(r - b for _, r, b in coh.entries)
    print(f"cohomology residuals: {'pass' if coh.passed else 'FAIL'} (worst margin {worst:.1f} decades)")
    if not coh.passed:
        failures.append("cohomology")
    deg = degree_check(series)
    export_csv(deg, out / "degree.csv")
    print(f"degree check: {'pass' if deg.passed else 'FAIL'}")
    if not deg.passed:
        failures.append("degree")
    n_lo, n_hi = cfg["n_lo"], min(cfg["n_hi"], series.N)
    for eps in cfg["eps"]:
        sweep = invariance_sweep(series, str(eps), n_lo, n_hi)
        export_csv(sweep, out / f"sweep_eps={eps}.csv")
        target = math.log10(float(eps))
        ok = sweep.slope is not None and abs(sweep.slope - target) <= cfg["slope_tol"] * abs(target)
        slope = "n/a" if sweep.slope is None else f"{sweep.slope:.4f}"
        print(f"eps={eps}: slope {slope} (law {target:.1f}) {'pass' if ok else 'FAIL'}")
        if not ok:
            failures.append(f"slope eps={eps}")
    if args.compare:
        other = load(args.compare)
        cc = cross_compare(series, other)
        export_csv(cc, out / "cross_compare.csv")
        print(f"cross-compare: max log10 relative difference {max(e.log10_rel for e in cc):.1f}")
    print(f"wrote {out}")
    if failures:
        raise ValidationGateError("failed: " + ", ".join(failures))
    return EXIT_OK


def _read_sequence_csv(path) -> GrowthSequence:
    import mpmath
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise ArchiveError(f"sequence file {path} not found") from None
    try:
        pairs = sorted((int(r["k"]), mpmath.mpf(r["value"])) for r in rows)
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"{path}: expected columns k,value ({exc})") from None
    return GrowthSequence(tuple(k for k, _ in pairs), tuple(v for _, v in pairs), None, {"csv": str(path)})


def cmd_centralize(args) -> int:
    cfg = resolve(args)
    lo, hi = cfg["fit_lo"], cfg["fit_hi"]
    if args.sequence_csv:
        seq = _read_sequence_csv(args.sequence_csv)
        default_out = Path(args.sequence_csv).with_suffix("")
    else:
        if not args.archive:
            raise ConfigurationError("give an archive or --sequence-csv")
        series = load(args.archive)
        rho = cfg["rho"][0] if isinstance(cfg["rho"], list) else cfg["rho"]
        seq = growth_sequence(series, NormSpec.analytic(float(rho), cfg["norm_convention"], cfg["dft_size"]),
                              min(series.N, hi + 2))
        default_out = Path(args.archive) / "centralize"
    rep = oscillation_report(seq, lo, hi)
    out = _out_dir(cfg, default_out)
    export_csv(centralize_x(seq), out / "x.csv")
    export_csv(centralize_z(seq), out / "z.csv")
    export_csv(rep, out / "oscillation.csv")
    if rep.oscillating:
        beta = "n/a" if rep.beta is None else f"{float(rep.beta):.4f}"
        print(f"dominant period {rep.dominant_period}, beta {beta}")
    else:
        print("no oscillation detected")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lindstedt-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with default settings")
        sp.add_argument("--out", help=f"output directory (default from ${OUT_ENV})")
        sp.add_argument("--norm-convention", dest="norm_convention", choices=["sqrt", "literal", "dft"])
        sp.add_argument("--dft-size", dest="dft_size", type=int)

    e = sub.add_parser("expand", help="compute u_k, c_k into an archive")
    common(e)
    e.add_argument("--omega", help='preset name or "p q d r"')
    e.add_argument("--digits", type=int)
    e.add_argument("--orders", type=int)
    e.add_argument("--grid-exp", dest="grid_exp", type=int)
    e.add_argument("--engine", choices=["spectral", "convolution"])
    e.add_argument("--resume", action="store_true")
    e.add_argument("--audit", action="store_true", help="keep padded arrays for the spurious-mode audit")
    e.set_defaults(func=cmd_expand)

    a = sub.add_parser("analyze", help="growth sequences and Gevrey fits")
    common(a)
    a.add_argument("archive")
    a.add_argument("--rho", action="append", type=str)
    a.add_argument("--sobolev-r", dest="sobolev_r", action="append", type=int)
    a.add_argument("--fit-lo", dest="fit_lo", type=int)
    a.add_argument("--fit-hi", dest="fit_hi", type=int)
    a.add_argument("--factorial", action="store_true", help="also fit the factorial-scaled sequences")
    a.add_argument("--shifted", action="store_true", help="also fit log R + sigma log(k + b)")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("validate", help="residuals, order slopes, degree and cross checks")
    common(v)
    v.add_argument("archive")
    v.add_argument("--eps", action="append", type=str)
    v.add_argument("--n-lo", dest="n_lo", type=int)
    v.add_argument("--n-hi", dest="n_hi", type=int)
    v.add_argument("--slope-tol", dest="slope_tol", type=float)
    v.add_argument("--compare", help="second archive for the cross-run comparison")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("centralize", help="x_k, z_k centralizations and oscillation report")
    common(c)
    c.add_argument("archive", nargs="?")
    c.add_argument("--rho", action="append", type=str)
    c.add_argument("--fit-lo", dest="fit_lo", type=int)
    c.add_argument("--fit-hi", dest="fit_hi", type=int)
    c.add_argument("--sequence-csv", dest="sequence_csv", help="analyse a k,value CSV instead of an archive")
    c.set_defaults(func=cmd_centralize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationGateError as exc:
        print(f"validation gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except ComputeError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ArchiveError, OSError) as exc:
        print(f"archive/I-O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LabError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
