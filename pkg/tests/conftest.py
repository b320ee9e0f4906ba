import io

import mpmath
import pytest

from app.main import run
from app.services.numeric_service import CertifiedReal, PrecisionContext

ORACLE_BITS = 400


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    """Pin the knobs that change output or runtime; tests opt back in explicitly."""
    for key in ("ERDOS_PRECISION_BITS", "ERDOS_MAX_PRECISION_BITS", "ERDOS_ENUMERATION_MAX_Q", "ERDOS_MC_CHUNK"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("ERDOS_THREADS", "1")
    monkeypatch.setenv("ERDOS_LOG_LEVEL", "WARNING")


@pytest.fixture
def ctx():
    return PrecisionContext(precision_bits=128)


@pytest.fixture
def oracle():
    """mpmath at ORACLE_BITS for independent reference values."""
    with mpmath.workprec(ORACLE_BITS):
        yield mpmath


def enclosure(value) -> CertifiedReal:
    """A high-precision reference value as a CertifiedReal with a conservative radius."""
    return CertifiedReal(value, mpmath.mpf(2) ** (20 - ORACLE_BITS), ORACLE_BITS)


@pytest.fixture
def run_cli():
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""

    def _run(*argv: str):
        out, err = io.StringIO(), io.StringIO()
        code = run(list(argv), stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()

    return _run
