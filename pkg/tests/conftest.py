"""Collects the acceptance-criterion verdicts and prints them after the run."""

VERDICTS: dict[int, str] = {}


def record(number: int, passed: bool, title: str, detail: str) -> bool:
    VERDICTS[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title} -- {detail}"
    return passed


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
