import os

import pytest

from lindstedt_lab.arith import make_context, preset_frequency
from lindstedt_lab.lindstedt import expand


@pytest.fixture(scope="session")
def ctx60():
    return make_context(60, 8)


@pytest.fixture(scope="session")
def golden60(ctx60):
    return preset_frequency("golden", ctx60)


@pytest.fixture(scope="session")
def series60(golden60, ctx60):
    """Golden-mean series to order 24 at 60 digits; cheap enough for unit tests."""
    return expand(golden60, 24, ctx60)


@pytest.fixture(scope="session")
def smoke_ctx():
    return make_context(120, 10)


@pytest.fixture(scope="session")
def smoke_series(smoke_ctx):
    return expand(preset_frequency("golden", smoke_ctx), 60, smoke_ctx)


@pytest.fixture
def fixed_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    return 1700000000


def pytest_configure(config):
    os.environ.setdefault("LINDSTEDT_LAB_KERNELS", "auto")


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (profile, n), (ok, detail) in sorted(RESULTS.items(), key=lambda kv: (kv[0][0] != "desk", kv[0][1])):
        label = "wall time   " if n == 99 else f"criterion {n:2d}"
        terminalreporter.write_line(f"[{profile}] {label}: {'pass' if ok else 'FAIL'}  {detail}")
