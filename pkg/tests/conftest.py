import shutil
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_criteria: dict[int, list[str]] = {}


@pytest.fixture
def golden_dir(tmp_path):
    """Fresh copy of the bundled 12-review fixture (inputs only)."""
    dst = tmp_path / "golden"
    dst.mkdir()
    for name in ("reviews.jsonl", "vectors.txt", "zh_en.tsv", "config.json"):
        shutil.copy(DATA / "golden" / name, dst / name)
    return dst


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for name, args in getattr(report, "criterion_marks", []):
        _criteria.setdefault(args, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marks = [m for m in item.iter_markers("criterion")]
    rep.criterion_marks = [("criterion", m.args[0]) for m in marks]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status} ({len(outcomes)} checks)")
