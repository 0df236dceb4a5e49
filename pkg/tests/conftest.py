import numpy as np
import pytest

from dsmff import kernels
from dsmff.geometry import WaveContext, make_directions

BACKENDS = ["numpy"] + (["numba"] if kernels.NUMBA_AVAILABLE else [])

_CRITERIA = []


@pytest.fixture(params=BACKENDS)
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


@pytest.fixture
def ctx2():
    return WaveContext(2, 10.0)


@pytest.fixture
def dirs32():
    return make_directions(2, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, passed, detail)."""

    def record(number, title, passed, detail=""):
        _CRITERIA.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        tag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{tag}] {number:>2}. {title}: {detail}")
