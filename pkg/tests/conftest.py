import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from inzsmf.se2 import Se2Element
from inzsmf.zonotope import Zonotope

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)


@st.composite
def zonotopes(draw, dim=None, min_order=1, max_order=8):
    d = draw(st.integers(1, 4)) if dim is None else dim
    m = draw(st.integers(min_order, max_order))
    center = draw(arrays(np.float64, d, elements=finite))
    gens = draw(arrays(np.float64, (d, m), elements=st.floats(-5.0, 5.0)))
    return Zonotope(center, gens)


@st.composite
def poses(draw, theta_max=np.pi - 1e-3, pos=20.0):
    theta = draw(st.floats(-theta_max, theta_max))
    x = draw(arrays(np.float64, 2, elements=st.floats(-pos, pos)))
    return Se2Element(theta, x)


@st.composite
def tangents(draw, sigma_max=3.0, pos=10.0):
    sigma = draw(st.floats(-sigma_max, sigma_max))
    u = draw(arrays(np.float64, 2, elements=st.floats(-pos, pos)))
    return np.array([sigma, *u])


def random_poles(rng, n, q):
    poles = []
    while len(poles) < n:
        r, phi = rng.uniform(0.05, 0.95), rng.uniform(0.1, np.pi - 0.1)
        kind = rng.integers(3)
        if kind == 0 and n - len(poles) >= 2:
            poles += [r * np.exp(1j * phi), r * np.exp(-1j * phi)]
        elif kind == 1 and q >= 2 and n - len(poles) >= 2:
            poles += [r, r]
        else:
            poles.append(rng.uniform(-0.95, 0.95))
    return tuple(poles)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
