import pytest

_OUTCOMES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_OUTCOMES] = {}


@pytest.fixture
def report(request):
    """Attach a one-line detail string to the current acceptance criterion."""

    def note(text):
        request.node.user_properties.append(("detail", text))

    return note


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None and (rep.when == "call" or rep.failed):
        number, title = marker.args
        details = [v for k, v in item.user_properties if k == "detail"]
        prev = item.config.stash[_OUTCOMES].get(number)
        if prev is None or prev[1] == "PASS":
            item.config.stash[_OUTCOMES][number] = (title, "PASS" if rep.passed else "FAIL", details)
    return rep


def pytest_terminal_summary(terminalreporter, config):
    outcomes = config.stash[_OUTCOMES]
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(outcomes):
        title, status, details = outcomes[number]
        suffix = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}{suffix}")
