results: dict[int, tuple[str, str, str]] = {}
"""Acceptance-criterion outcomes: number -> (name, status, detail)."""


def record_criterion(number: int, name: str, status: str, detail: str = "") -> None:
    results[number] = (name, status, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        name, status, detail = results[number]
        line = f"criterion {number} ({name}): {status}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)
