import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, description): acceptance criterion check")
    config.addinivalue_line("markers", "slow: long-running full-size check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when != "call" and not (rep.failed or rep.skipped):
        return
    number, desc = marker.args
    entry = _CRITERIA.setdefault(number, {"desc": desc, "outcomes": [], "measured": []})
    entry["outcomes"].append(rep.outcome)
    if rep.when == "call":
        entry["measured"].extend(f"{k}={v}" for k, v in item.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        if "failed" in e["outcomes"]:
            verdict = "FAIL"
        elif "skipped" in e["outcomes"]:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        measured = "; ".join(e["measured"])
        terminalreporter.write_line(f"ACCEPTANCE {verdict} #{number:02d} {e['desc']} | {measured}")
