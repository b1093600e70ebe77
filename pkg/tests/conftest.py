import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qplane.lattice import QLattice
from qplane.modes import ModeFunction

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("qplane", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qplane")


@pytest.fixture
def lat():
    return QLattice(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


qs = st.sampled_from([0.3, 0.5, 0.7, 0.9])
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)


@st.composite
def mode_functions(draw, q=None, k=(-4, 4), l=(-5, 5), max_terms=8):
    qv = q if q is not None else draw(qs)
    keys = draw(st.lists(st.tuples(st.integers(*k), st.integers(*l)), min_size=0, max_size=max_terms,
                         unique=True))
    return ModeFunction(QLattice(qv), {key: draw(complexes) for key in keys})


@st.composite
def function_pairs(draw, **kw):
    qv = draw(qs)
    return draw(mode_functions(q=qv, **kw)), draw(mode_functions(q=qv, **kw))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for name in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[name])
