"""Shared fixtures and the acceptance summary printed after the run."""

import pytest

from emraman.spectral import PlasmaParams

CRITERIA = {}


def record(number: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'} | {detail}"
    CRITERIA[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])


@pytest.fixture
def base_params():
    return PlasmaParams(epsilon=0.0, theta_e=0.1, alpha_ie=0.0, k=3.0)
