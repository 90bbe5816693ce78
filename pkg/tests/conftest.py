RESULTS: dict = {}


def record(number: int, name: str, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    RESULTS[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
