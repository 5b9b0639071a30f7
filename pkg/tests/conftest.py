import os

import pytest
from hypothesis import HealthCheck, settings

from hybridopto.params import EffectiveCavityResponse

settings.register_profile(
    "repo", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

ACCEPTANCE_LINES: list[str] = []


def bare_response(k_new: float, delta_new: float) -> EffectiveCavityResponse:
    """Response object for a cavity without feedback (J = 0)."""
    return EffectiveCavityResponse(
        A1=0.0, A2=0.0, k_new=k_new, delta_new=delta_new, kappa_A=k_new, delta_A=delta_new,
        J=0.0, gamma_at=0.0, delta_at=0.0,
    )


@pytest.fixture
def dimless():
    """The dimensionless fixture: omega_m = chi = 1, k_new = 0.1, Delta_new = 1."""
    return bare_response(0.1, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
