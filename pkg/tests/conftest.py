from __future__ import annotations


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(RESULTS, key=int):
        ok, detail = RESULTS[label]
        terminalreporter.write_line(f"criterion {label:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
