import numpy as np
import pytest

from twistl.forms import MAASS_EVEN, CuspForm, delta_form

# (number, title, passed, detail) lines filled in by test_acceptance.py
ACCEPTANCE: list = []


@pytest.fixture(scope="session")
def delta():
    return delta_form()


@pytest.fixture(scope="session")
def synthetic_maass():
    """Three nonzero coefficients at a real spectral parameter.  Not automorphic,
    but its Mellin transforms are finite Dirichlet sums, which is what the
    routing and Gamma-shift checks need."""
    coeffs = np.zeros(200)
    coeffs[:3] = [1.0, -0.6, 0.3]
    return CuspForm(MAASS_EVEN, 0, coeffs, r=9.533695)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{num:2d}] {title}: {detail}")
