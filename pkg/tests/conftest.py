import pytest

from kdescent.exact import build_triangle


@pytest.fixture(scope="session")
def tri3():
    return build_triangle(3, 200)


@pytest.fixture(scope="session")
def triangles():
    return {k: build_triangle(k, 60) for k in (2, 3, 4, 5)}


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, passed: bool, measured: str):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {measured}"
        _ACCEPTANCE[number] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
