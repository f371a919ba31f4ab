import numpy as np
import pytest

from tsdist.ingest import SampleMatrix


def synthetic_samples(rng, n, L, name="synthetic", lo=0.0, hi=1.0):
    """Correlated windows squeezed into [lo, hi] with no constant rows."""
    mix = rng.normal(size=(L, L)) / np.sqrt(L)
    raw = rng.normal(size=(n, L)) @ mix + rng.normal(size=L)
    raw = (raw - raw.min()) / (raw.max() - raw.min())
    return SampleMatrix(dataset_name=name, data=lo + (hi - lo) * raw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def make_samples():
    return synthetic_samples


ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    """Remember one criterion outcome for the end-of-run summary."""
    ACCEPTANCE_LINES[number] = f"acceptance {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
