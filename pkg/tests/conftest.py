"""Shared fixtures: layouts, the cat code, resolved parameters, result cache."""

import pathlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from catghz.catcode import build_code
from catghz.fock import build_layout
from catghz.model import SystemParams, resolve_couplings

settings.register_profile(
    "suite", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
# heavy scenario runs read through the committed cache; delete it to recompute
CACHE_DIR = str(REPO_ROOT / ".sim_cache")


@pytest.fixture(scope="session")
def layout5():
    return build_layout((5, 5, 5))


@pytest.fixture(scope="session")
def layout1():
    """Smallest composite space (two Fock levels per cavity, dim 24)."""
    return build_layout((1, 1, 1))


@pytest.fixture(scope="session")
def code():
    return build_code(0.5)


@pytest.fixture(scope="session")
def paper_like_params():
    """Default parameter set with the designed couplings filled in."""
    return resolve_couplings(SystemParams())


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


def random_hermitian(rng, dim, scale=1.0):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (m + m.conj().T) / 2.0


def random_density(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.real(np.trace(rho))
