import pytest

from tfnorm.corpus import build_index
from tfnorm.text import Analyzer

D1 = "Language modeling approach"
D2 = "Language modeling approach Language modeling approach"
D3 = "Information retrieval model Language modeling approach"
QUERY = "language modeling approach"


@pytest.fixture
def plain():
    """Word-level analyzer: the worked examples assume 'model' and 'modeling' stay distinct."""
    return Analyzer(stemming=False)


@pytest.fixture
def sample_index(plain):
    return build_index([("D1", D1), ("D2", D2), ("D3", D3)], plain)


@pytest.fixture
def sample_query(plain):
    from tfnorm.scoring import Query

    return Query.from_tokens("q", plain.analyze(QUERY))


# acceptance criterion outcomes, filled in by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
