import sys
from pathlib import Path

import pytest

from partsys.core import GroundSet, PartitionMultiset, SplitMultiset

FIXTURES = Path(__file__).parent / "fixtures"

PI_LISTING = {
    1: ["123|4|56", "1|2|3456", "3|12456", "5|6|1234"],
    2: ["123|4|5|6", "1|2|3456", "3|12456", "56|1234"],
    3: ["12|3|4|56", "1|2|3|456", "5|6|1234"],
    4: ["12|3|4|5|6", "1|2|3|456", "56|1234"],
    5: ["1|2|3|4|56", "12|3|456", "5|6|1234"],
    6: ["1|2|3|4|5|6", "12|3|456", "56|1234"],
}

SIGMA_STAR = [
    ("123|456", 1), ("4|12356", 1), ("56|1234", 2), ("1|23456", 1), ("2|13456", 1),
    ("12|3456", 1), ("3|12456", 2), ("5|12346", 1), ("6|12345", 1),
]


@pytest.fixture
def X6():
    return GroundSet(range(1, 7))


@pytest.fixture
def X4():
    return GroundSet(range(1, 5))


@pytest.fixture
def pis(X6):
    return {k: PartitionMultiset.parse(X6, *v) for k, v in PI_LISTING.items()}


@pytest.fixture
def sigma_star(X6):
    return SplitMultiset.parse(X6, *SIGMA_STAR)


@pytest.fixture
def quartet(X4):
    return SplitMultiset.parse(X4, ("12|34", 2), "1|234", "2|134", "3|124", "4|123")


@pytest.fixture
def fixtures():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
