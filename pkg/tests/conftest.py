def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance battery lines after capture ends, so a plain
    ``pytest -v`` run still shows one pass/fail line per criterion."""
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.write_sep("-", "acceptance battery")
        for line in lines:
            terminalreporter.write_line(line)
