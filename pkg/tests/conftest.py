import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from fbfading.params import ShapeParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def shape_params(min_gbar=0.1, max_gbar=10.0, integer_mu=False, min_m=0.3):
    """Strategy over valid parameter sets with moderate magnitudes."""
    mu = st.integers(1, 4).map(float) if integer_mu else st.floats(0.3, 4.0)
    return st.builds(
        ShapeParams,
        gbar=st.floats(min_gbar, max_gbar),
        kappa=st.floats(0.0, 20.0),
        mu=mu,
        m=st.floats(min_m, 20.0),
        eta=st.floats(0.05, 20.0),
        los_frac=st.floats(0.0, 1.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, title, passed, detail):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
