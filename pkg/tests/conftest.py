"""Shared helpers: the acceptance report printed after the test run."""
import pytest

_RESULTS = []


def record_acceptance(number, label: str, passed: bool, detail: str = ""):
    """Register one acceptance-criterion outcome for the final summary."""
    _RESULTS.append((str(number), label, bool(passed), detail))


def _order(entry):
    number = entry[0]
    digits = "".join(ch for ch in number if ch.isdigit())
    return (int(digits) if digits else 0, number)


@pytest.hookimpl
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.ensure_newline()
    tr.section("acceptance criteria")
    for number, label, passed, detail in sorted(_RESULTS, key=_order):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:>2}: {status}  {label}"
        if detail:
            line += f"  ({detail})"
        tr.write_line(line, green=passed, red=not passed)
