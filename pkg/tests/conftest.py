"""Per-criterion summary for the acceptance suite."""

from collections import OrderedDict

CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number, title = mark.args
        entry = CRITERIA.setdefault(number, {"title": title, "tests": {}})
        entry["tests"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in CRITERIA.values():
        if report.nodeid in entry["tests"]:
            prev = entry["tests"][report.nodeid]
            if report.failed:
                entry["tests"][report.nodeid] = "failed"
            elif report.when == "call" and prev is None:
                entry["tests"][report.nodeid] = "skipped" if report.skipped else "passed"
            elif report.skipped and prev is None:
                entry["tests"][report.nodeid] = "skipped"


def criterion_lines() -> list[str]:
    lines = []
    for number in sorted(CRITERIA):
        entry = CRITERIA[number]
        outcomes = list(entry["tests"].values())
        if any(o == "failed" for o in outcomes):
            status = "FAIL"
        elif outcomes and all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "NOT RUN"
        lines.append(f"criterion {number:2d}: {status:7s} {entry['title']}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = criterion_lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
