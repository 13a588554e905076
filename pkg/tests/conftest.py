import pytest

from prodperc.base import complete, cycle, edge
from prodperc.product import ProductGraph

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_products():
    K2, K3, C4 = edge(), complete(3), cycle(4)
    return {
        "Q2": ProductGraph([K2, K2]),
        "Q3": ProductGraph([K2] * 3),
        "K3xK3": ProductGraph([K3, K3]),
        "K3xK2": ProductGraph([K3, K2]),
        "C4xK2": ProductGraph([C4, K2]),
        "mixed": ProductGraph([K3, C4, K2, cycle(5)]),
    }
