"""
Shared pytest fixtures: one lazily built lab per acceptance domain
"""

import pytest

from hodge_core import build_domain_spec
from verification import DomainLab

DOMAINS = {
    "disc": (1, (1, 1)),
    "siegel": (1, (2, 2)),
    "conic": (2, (1, 1, 1)),
    "quadric": (2, (1, 3, 1)),
    "nonclassical": (2, (2, 1, 2)),
}

# Cartan rank, strongly orthogonal rank, noncompact positive roots
EXPECTED = {
    "disc": (1, 1, 1),
    "siegel": (2, 2, 3),
    "conic": (1, 1, 1),
    "quadric": (2, 2, 3),
    "nonclassical": (2, 1, 2),
}


@pytest.fixture(scope="session")
def labs():
    return {name: DomainLab(build_domain_spec(n, h)) for name, (n, h) in DOMAINS.items()}


@pytest.fixture(scope="session")
def disc(labs):
    return labs["disc"]


@pytest.fixture(scope="session")
def siegel(labs):
    return labs["siegel"]


@pytest.fixture(scope="session")
def quadric(labs):
    return labs["quadric"]


@pytest.fixture(scope="session")
def nonclassical(labs):
    return labs["nonclassical"]


@pytest.fixture(params=sorted(DOMAINS))
def domain_name(request):
    return request.param
