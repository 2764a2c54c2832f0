import pytest

from panoguide.analysis import analyze_session
from panoguide.fixtures import evenly_planted_spec, generate


@pytest.fixture(scope="session")
def small_fixture():
    """10 planted epochs, noise-free; shared read-only across tests."""
    spec = evenly_planted_spec(seed=7, epoch_count=10)
    session, truth = generate(spec)
    return spec, session, truth


@pytest.fixture(scope="session")
def small_analysis(small_fixture):
    _, session, _ = small_fixture
    return analyze_session(session)
