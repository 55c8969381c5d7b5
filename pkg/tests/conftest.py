"""Shared pytest plumbing: collect acceptance verdicts for the summary."""

ACCEPTANCE_RESULTS = []


def record_criterion(number: int, label: str, ok: bool, detail: str) -> str:
    word = "PASS" if ok else "FAIL"
    line = f"[ACCEPT] criterion {number:2d} ({label}): {word} - {detail}"
    ACCEPTANCE_RESULTS.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line)
