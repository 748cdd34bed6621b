import cmath
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from inductive_coupling.simulator import synthesize_probe_abcd
from inductive_coupling.twoport import TwoPortAbcd

F_SIG = 91.3e3


def random_complex(rng, lo=-2.0, hi=2.0):
    """Log-uniform magnitude 10**U(lo, hi), uniform phase."""
    return cmath.rect(10 ** rng.uniform(lo, hi), rng.uniform(-math.pi, math.pi))


def random_reciprocal_probe(rng) -> TwoPortAbcd:
    a = random_complex(rng, -0.5, 0.5)
    b = random_complex(rng, -1, 2)
    c = random_complex(rng, -4, -1)
    return TwoPortAbcd(a, b, c, (1 + b * c) / a)


def random_general_probe(rng) -> TwoPortAbcd:
    return TwoPortAbcd(
        random_complex(rng, -0.5, 0.5),
        random_complex(rng, -1, 2),
        random_complex(rng, -4, -1),
        random_complex(rng, -0.5, 0.5),
    )


def random_transformer_probe(rng, f=F_SIG) -> TwoPortAbcd:
    return synthesize_probe_abcd(
        turns_ratio=rng.uniform(0.2, 5.0),
        magnetizing_l=10 ** rng.uniform(-5, -2),
        leakage_l=10 ** rng.uniform(-8, -5),
        winding_r=rng.uniform(0.01, 5.0),
        f=f,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def probes():
    """A fixed, non-trivial reciprocal probe pair at 91.3 kHz."""
    iip = synthesize_probe_abcd(2.0, 1.5e-3, 2e-7, 0.4, F_SIG)
    rip = synthesize_probe_abcd(0.5, 8e-4, 5e-7, 1.1, F_SIG)
    return iip, rip


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
complex_values = st.builds(complex, finite, finite)


@st.composite
def impedances(draw, lo=-2.0, hi=8.0):
    mag = 10 ** draw(st.floats(min_value=lo, max_value=hi))
    ang = draw(st.floats(min_value=-179.9, max_value=180.0))
    return cmath.rect(mag, math.radians(ang))


@st.composite
def reciprocal_probes(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_reciprocal_probe(np.random.default_rng(seed))


# ---------------------------------------------------------------- acceptance

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion for the run summary."""

    def record(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
