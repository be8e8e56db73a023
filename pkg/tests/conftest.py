"""Shared pytest hooks: print the acceptance checklist after the run."""


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if not LINES:
        return
    terminalreporter.write_sep("=", "acceptance checklist")
    for line in LINES:
        terminalreporter.write_line(line)
