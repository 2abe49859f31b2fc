import numpy as np
import pytest

from nhqc_sim.model import Coupling, DeviceSpec, DriveTone, PulseSchedule, PulseSegment, TransmonSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


@pytest.fixture
def pair_device():
    """One driven transmon exchanging with an undriven partner."""
    return DeviceSpec(
        (
            TransmonSpec("T1", 5335.0, 220.0),
            TransmonSpec("Ta", 5000.0, 210.0),
        ),
        (Coupling("T1", "Ta", 12.0),),
    )


@pytest.fixture
def pair_schedule():
    nu = 335.0
    return PulseSchedule((PulseSegment(0.0, 100.0, (DriveTone("T1", 0.9 * nu, nu, 0.4),)),))


def random_state(rng, dim):
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# one pass/fail line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
