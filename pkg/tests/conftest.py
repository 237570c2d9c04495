def pytest_terminal_summary(terminalreporter):
    # print one line per acceptance criterion that ran in this session
    from test_acceptance import CHECKS, CRITERIA

    done = [k for k, check in CHECKS.items() if check.cache_info().currsize]
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for k in done:
        passed, detail = CHECKS[k]()
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {k}: {CRITERIA[k]} ({detail})")
