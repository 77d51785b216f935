import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def rules3():
    from qeuclid.ncalg import get_rules

    return get_rules(3)


@pytest.fixture(scope="session")
def hodge3():
    from qeuclid.calculus import hodge_data

    return hodge_data(3)
