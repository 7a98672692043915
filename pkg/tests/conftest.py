from contextlib import contextmanager

import pytest


def pytest_configure(config):
    config._criterion_lines = []


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    lines = request.config._criterion_lines

    @contextmanager
    def check(number, title):
        info = {"detail": ""}
        try:
            yield info
        except BaseException as exc:
            reason = info["detail"] or f"{type(exc).__name__}: {exc}".splitlines()[0]
            lines.append(f"criterion {number:>2} FAIL  {title}: {reason}")
            raise
        lines.append(f"criterion {number:>2} PASS  {title}: {info['detail']}")

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
