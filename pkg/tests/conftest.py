import os
import sys
import time

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "suite", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

_START = time.perf_counter()
_OUTCOMES: dict = {}


def pytest_runtest_logreport(report):
    if report.when == "call" or report.outcome != "passed":
        _OUTCOMES[report.nodeid] = report.outcome if report.when == "call" or report.failed else "skipped"


def _finish_criterion_13(acc):
    wall = time.perf_counter() - _START
    missing, failed = [], []
    for name, node in acc.PROPERTY_SUITES.items():
        hits = [v for k, v in _OUTCOMES.items() if k.endswith(node)]
        if not hits:
            missing.append(name)
        elif any(v != "passed" for v in hits):
            failed.append(name)
    line = acc.LINES.get(13)
    if line is None:
        return
    ok = line.split()[2] == "PASS" and not failed and not missing and wall < acc.SUITE_LIMIT
    note = f"{len(failed)} failing, {len(missing)} not run, wall time {wall:.1f}s (limit {acc.SUITE_LIMIT:g}s)"
    if missing:
        note += "; run the full suite to judge this criterion"
    what = line.split("  ", 2)[1].split("  (")[0] if "  " in line else ""
    acc.LINES[13] = f"criterion 13: {'PASS' if ok else 'FAIL'}  {what}  ({note})"


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.LINES:
        return
    _finish_criterion_13(acc)
    terminalreporter.section("acceptance criteria")
    for n in sorted(acc.LINES):
        terminalreporter.write_line(acc.LINES[n])
