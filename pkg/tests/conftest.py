import pytest

from sepkit.domain import DomainConfig


@pytest.fixture
def cfg():
    return DomainConfig()


@pytest.fixture
def cfg2():
    return DomainConfig(model=2)


@pytest.fixture
def small():
    return DomainConfig(values=(0, 1), locations=(1,))
