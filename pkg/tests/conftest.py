import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    # keep CLI runs from writing to the user's cache directory
    monkeypatch.setenv("PARETO_GOF_CACHE", str(tmp_path / "cache"))


@pytest.fixture(scope="session")
def shared_cache(tmp_path_factory):
    """Critical values shared by all Monte Carlo tests in one session."""
    from paretogof.resampling import CriticalValueCache
    return CriticalValueCache(tmp_path_factory.mktemp("critvals"))
