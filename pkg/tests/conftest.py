from hypothesis import settings

settings.register_profile("whlab", deadline=None, max_examples=25)
settings.load_profile("whlab")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, format_line

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in RESULTS:
        terminalreporter.write_line(format_line(name))
