import numpy as np
import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one acceptance criterion")


@pytest.fixture(autouse=True)
def _isolated_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("GBFLOW_OUTPUT_ROOT", str(tmp_path / "runs"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def measure(request):
    """Attach measured numbers to the current test for the acceptance summary."""
    def record(**values):
        request.node.user_properties.extend(values.items())
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        key = marker.args[0]
        entry = _ACCEPTANCE.setdefault(key, {"title": marker.args[1], "outcomes": [],
                                             "values": []})
        entry["outcomes"].append(rep.outcome)
        entry["values"].extend(item.user_properties)


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[key]
        ok = all(o == "passed" for o in entry["outcomes"])
        values = ", ".join(f"{k}={_fmt(v)}" for k, v in entry["values"])
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {key:>2}. {entry['title']}"
                      + (f"  ({values})" if values else ""))
