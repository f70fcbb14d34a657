import numpy as np
import pytest

from latlrr.linalg import ToleranceProfile
from latlrr.problems import ProblemSpec, generate_matrix


@pytest.fixture
def tol():
    return ToleranceProfile()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def X_small():
    """10 x 8, rank 5, generic spectrum."""
    return generate_matrix(ProblemSpec(10, 8, 5, "generic", seed=3))


@pytest.fixture
def X_repeated():
    """12 x 9, rank 5 with singular-value groups of sizes 3 and 2."""
    return generate_matrix(ProblemSpec(12, 9, 5, "repeated", (3, 2), seed=4))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one ``PASS``/``FAIL`` line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def log(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        lines.append((number, line))
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
