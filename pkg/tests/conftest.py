import pytest

from maxorders.bundle import load_bundle


@pytest.fixture(scope="session")
def ex4():
    return load_bundle("example4-main")


@pytest.fixture(scope="session")
def ex4_cs(ex4):
    return ex4.crossed_system()


@pytest.fixture(scope="session")
def ex2():
    return load_bundle("example2-abelian")


@pytest.fixture(scope="session")
def nonprime():
    return load_bundle("nonprime-quotient")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    key = lambda n: (int(str(n).rstrip("ab")), str(n))  # noqa: E731
    for n in sorted(results, key=key):
        ok, title, dt, budget, note = results[n]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({dt:.2f}s / {budget:g}s)"
        tr.write_line(line + (f"  {note}" if note else ""))
