import numpy as np
import pytest

from stochastic_rir import PressureImpulseResponse

SR = 16000


def exponential_rir(t60, sample_rate=SR, duration=None):
    """Amplitude envelope decaying 60 dB (in energy) every ``t60`` seconds."""
    n = int(round((duration or 3 * t60) * sample_rate))
    amp = np.exp(-6.907755278982137 * np.arange(n) / (t60 * sample_rate))
    return PressureImpulseResponse(amp, sample_rate)


@pytest.fixture
def sr():
    return SR


# Acceptance criteria register their verdicts here; printed at session end.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
