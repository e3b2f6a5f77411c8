from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile("repo", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str = "") -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
