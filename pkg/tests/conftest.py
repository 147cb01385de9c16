import pytest

from perspecml import catalog as cat


@pytest.fixture(scope="session")
def catalog():
    return cat.load_catalog()
