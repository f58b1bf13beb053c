import pytest

from cvtransfer.experiments import refine_peaks, resonance_map, sweep


class _Map:
    def __init__(self, family):
        self.scenario = resonance_map(family)
        self.table = sweep(self.scenario)
        self.peaks = refine_peaks(self.table, self.scenario, top_k=4)


# default-grid maps take a few seconds each; share them across modules
@pytest.fixture(scope="session")
def twb_map():
    return _Map("twb")


@pytest.fixture(scope="session")
def tmc_map():
    return _Map("tmc")


# ---------------------------------------------------------------------------
# per-criterion summary for the acceptance suite

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "failed": []})
    if rep.failed or (rep.when == "call" and rep.skipped):
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] else "FAIL"
        line = f"{status}  criterion {number:>2}: {e['title']}"
        if e["failed"]:
            line += f"  (failing: {', '.join(sorted(set(e['failed'])))})"
        tr.write_line(line)
