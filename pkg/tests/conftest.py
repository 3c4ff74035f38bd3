import numpy as np
import pytest
from hypothesis import settings

from quasilocal import build_metric, make_builtin, perturbation_preset

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sphere():
    return make_builtin("sphere")


@pytest.fixture(scope="session")
def ellipsoid():
    return make_builtin("ellipsoid_112")


@pytest.fixture(scope="session")
def flat():
    return build_metric("euclidean")


@pytest.fixture(scope="session")
def schw():
    return build_metric("schwarzschild", 1.0)


@pytest.fixture(scope="session")
def perturbed():
    return build_metric("perturbed", 1.0, perturbation_preset("combined", 1.0))


@pytest.fixture
def interior_nodes():
    from quasilocal import composite_nodes
    t, _ = composite_nodes(0.0, np.pi, 16, 16)
    return t


ACCEPTANCE_LINES: dict[tuple[int, str], str] = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, passed, detail, tag=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES[(number, tag)] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
