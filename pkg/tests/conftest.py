import json
from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from kerrbath.greens import solve_greens
from kerrbath.spectra import BathSpectrum

settings.register_profile(
    "default", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracle_values():
    return json.loads((DATA / "oracle_values.json").read_text())


@lru_cache(maxsize=None)
def cached_table(k, gamma, cutoff, t_max=20.0, h=0.02, tol=1e-8,
                 convention="two-over-pi"):
    """Response tables are deterministic; share them across tests."""
    return solve_greens(BathSpectrum(k, gamma, cutoff), t_max, h, tol,
                        convention=convention)


@pytest.fixture(scope="session")
def table_cache():
    return cached_table
