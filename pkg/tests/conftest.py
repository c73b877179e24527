from __future__ import annotations

import hypothesis.strategies as st
from hypothesis import settings

from gsleepy.core import Instance, Job

settings.register_profile("default", max_examples=150, deadline=None, derandomize=True)
settings.load_profile("default")


@st.composite
def instances(draw, m_max: int = 4, n_max: int = 7, m_min: int = 1):
    m = draw(st.integers(m_min, m_max))
    n = draw(st.integers(1, n_max))
    # Coarse grids make release/completion ties common.
    rel = st.integers(0, 20).map(lambda k: k / 10)
    proc = st.integers(1, 20).map(lambda k: k / 10)
    jobs = [Job(i + 1, draw(rel), draw(proc)) for i in range(n)]
    return Instance(m, jobs)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
