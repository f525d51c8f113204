import csv
import filecmp
import json
import shutil
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from lindstedt_lab.arith import make_context, preset_frequency
from lindstedt_lab.errors import (
    ArchiveError,
    ArchiveVersionError,
    CorruptRecordError,
    PrecisionDowngradeError,
)
from lindstedt_lab.gevrey import NormSpec, fit_log, growth_sequence, oscillation_report, synthetic_sequence
from lindstedt_lab.lindstedt import expand
from lindstedt_lab.store import expand_archive, export_csv, hex_decode, hex_encode, load, read_manifest, save
from lindstedt_lab.validate import cohomology_report, cross_compare, degree_check, invariance_sweep

SAMPLE = Path(__file__).parent / "data" / "golden-d40-N12"


def tree_equal(a: Path, b: Path) -> bool:
    fa = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    fb = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    return fa == fb and all(filecmp.cmp(a / p, b / p, shallow=False) for p in fa)


@given(st.integers(-(1 << 700), 1 << 700), st.integers(1, 500))
def test_hex_round_trip(m, bits):
    assert hex_decode(hex_encode(m, bits), bits) == m


def test_hex_rejects():
    with pytest.raises(ValueError):
        hex_decode("0x1.8p+0", 10)
    with pytest.raises(ValueError):
        hex_decode("0x3p-12", 10)  # needs 12 fractional bits
    assert hex_decode("0x3p-12", 20) == 3 << 8


def test_round_trip_is_bit_exact(series60, tmp_path):
    save(series60, tmp_path / "a")
    back = load(tmp_path / "a")
    assert back.u == series60.u and back.c_fixed == series60.c_fixed
    assert back.sigma == series60.sigma and back.gamma == series60.gamma
    assert [back.S(k) for k in range(1, 25)] == [series60.S(k) for k in range(1, 25)]
    assert all(e.log10_abs == float("-inf") for e in cross_compare(series60, back))


def test_load_higher_precision_only(series60, tmp_path):
    save(series60, tmp_path / "a")
    with pytest.raises(PrecisionDowngradeError):
        load(tmp_path / "a", make_context(50, 8))
    up = load(tmp_path / "a", make_context(90, 8))
    assert up.ctx.decimal_digits == 90
    assert max(e.log10_abs for e in cross_compare(series60, up)) == float("-inf")


def test_save_refuses_overwrite(series60, tmp_path):
    save(series60, tmp_path / "a")
    with pytest.raises(ArchiveError):
        save(series60, tmp_path / "a")


def test_reanalysis_is_bit_exact(series60, tmp_path):
    save(series60, tmp_path / "a")
    norm = NormSpec.analytic(1e-7, "dft")
    a = fit_log(growth_sequence(series60, norm), 8, 24)
    b = fit_log(growth_sequence(load(tmp_path / "a"), norm), 8, 24)
    assert (a.R, a.sigma, a.e_inf) == (b.R, b.sigma, b.e_inf)


def test_repeated_runs_byte_identical(golden60, ctx60, tmp_path, fixed_epoch):
    for name in ("a", "b"):
        expand_archive(golden60, 10, ctx60, tmp_path / name)
    assert tree_equal(tmp_path / "a", tmp_path / "b")


def test_resume_matches_uninterrupted(golden60, ctx60, tmp_path, fixed_epoch):
    expand_archive(golden60, 16, ctx60, tmp_path / "full")
    expand_archive(golden60, 7, ctx60, tmp_path / "part")
    with pytest.raises(ArchiveError):
        expand_archive(golden60, 16, ctx60, tmp_path / "part")
    expand_archive(golden60, 16, ctx60, tmp_path / "part", resume=True)
    assert tree_equal(tmp_path / "full", tmp_path / "part")


def test_resume_after_torn_manifest(golden60, ctx60, tmp_path, fixed_epoch):
    # a crash after writing record 6 but before the manifest update
    expand_archive(golden60, 6, ctx60, tmp_path / "x")
    man = json.loads((tmp_path / "x" / "manifest.json").read_text())
    man["N"] = 5
    (tmp_path / "x" / "manifest.json").write_text(json.dumps(man, indent=1, sort_keys=True) + "\n")
    expand_archive(golden60, 12, ctx60, tmp_path / "x", resume=True)
    expand_archive(golden60, 12, ctx60, tmp_path / "y")
    assert tree_equal(tmp_path / "x", tmp_path / "y")


def test_sample_archive_regression(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    ctx = make_context(40, 8)
    expand_archive(preset_frequency("golden", ctx), 12, ctx, tmp_path / "s")
    assert tree_equal(SAMPLE, tmp_path / "s")
    s = load(SAMPLE)
    assert s.N == 12 and s.manifest["created"] == "1970-01-01T00:00:00Z"


def test_corrupt_record_names_order(tmp_path):
    shutil.copytree(SAMPLE, tmp_path / "s")
    rec = tmp_path / "s" / "orders" / "k00007.json"
    rec.write_text(rec.read_text().replace("0x", "0y", 1))
    with pytest.raises(CorruptRecordError) as exc:
        load(tmp_path / "s")
    assert exc.value.k == 7 and "7" in str(exc.value)


def test_missing_record(tmp_path):
    shutil.copytree(SAMPLE, tmp_path / "s")
    (tmp_path / "s" / "orders" / "k00004.json").unlink()
    with pytest.raises(CorruptRecordError) as exc:
        load(tmp_path / "s")
    assert exc.value.k == 4


def test_version_check(tmp_path):
    shutil.copytree(SAMPLE, tmp_path / "s")
    man = json.loads((tmp_path / "s" / "manifest.json").read_text())
    man["format_version"] = 99
    (tmp_path / "s" / "manifest.json").write_text(json.dumps(man))
    with pytest.raises(ArchiveVersionError):
        read_manifest(tmp_path / "s")
    with pytest.raises(ArchiveError):
        read_manifest(tmp_path / "nothing")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestExport:
    def test_sequence(self, series60, tmp_path):
        seq = growth_sequence(series60, NormSpec.sobolev(2))
        rows = read_csv(export_csv(seq, tmp_path / "s.csv"))
        assert rows[0] == ["k", "value"] and len(rows) == 25
        assert rows[1][0] == "1" and abs(float(rows[1][1]) - float(seq.values[0])) < 1e-15

    def test_fit(self, tmp_path):
        seq = synthetic_sequence(lambda k, mp: mp.log(2) + mp.mpf("0.5") * mp.log(k), 10, 20)
        rows = read_csv(export_csv(fit_log(seq, 10, 20), tmp_path / "f.csv"))
        assert rows[0] == ["R", "sigma", "b", "e_inf", "k_lo", "k_hi"] and len(rows) == 2
        assert float(rows[1][0]) == 2.0 and rows[1][4:] == ["10", "20"]

    def test_reports(self, series60, tmp_path):
        assert read_csv(export_csv(cohomology_report(series60, 4), tmp_path / "c.csv"))[0] == ["n", "log10_value"]
        assert len(read_csv(export_csv(invariance_sweep(series60, "1e-2", 2, 6), tmp_path / "w.csv"))) == 6
        assert read_csv(export_csv(degree_check(series60), tmp_path / "d.csv"))[0][0] == "n"
        cc = read_csv(export_csv(cross_compare(series60, series60), tmp_path / "x.csv"))
        assert cc[0] == ["n", "log10_abs", "log10_rel"] and cc[1][1] == "-inf"
        seq = synthetic_sequence(lambda k, mp: mp.cos(2 * mp.pi * k / 3) / k, 1, 60)
        osc = read_csv(export_csv(oscillation_report(seq, 10, 50), tmp_path / "o.csv"))
        assert osc[0] == ["period", "magnitude"] and len(osc) == 10

    def test_unknown(self, tmp_path):
        with pytest.raises(TypeError):
            export_csv({"a": 1}, tmp_path / "z.csv")
