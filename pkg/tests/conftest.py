import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        title, ok, detail = mod.RESULTS[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if detail and not ok:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
