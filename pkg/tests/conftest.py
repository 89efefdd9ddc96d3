import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

# filled by test_acceptance.py, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, integer=False, max_ell=8, max_m=3, max_n=3, hi=8):
    from quantdea import Dataset

    ell = int(rng.integers(1, max_ell + 1))
    m, n = int(rng.integers(1, max_m + 1)), int(rng.integers(1, max_n + 1))
    if integer:
        X = rng.integers(0, hi, size=(ell, m)).astype(float)
        Y = rng.integers(0, hi, size=(ell, n)).astype(float)
    else:
        X = rng.uniform(0, hi, size=(ell, m))
        Y = rng.uniform(0, hi, size=(ell, n))
    return Dataset(X, Y)
