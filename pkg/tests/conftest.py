"""Shared test configuration: deterministic property testing and the
acceptance-criteria summary printed after the run."""

from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

ACCEPTANCE_LINES: dict[str, str] = {}


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    """Register one acceptance-criterion outcome for the final summary."""
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES[name] = f"{name} {status}  {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[name])
