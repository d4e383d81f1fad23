import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    def record(num, title, checks):
        """``checks`` is a list of (description, ok) pairs."""
        bad = [d for d, ok in checks if not ok]
        line = f"{'PASS' if not bad else 'FAIL'} criterion {num:>2}: {title}"
        if bad:
            line += "  [failed: " + "; ".join(bad) + "]"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert not bad, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
