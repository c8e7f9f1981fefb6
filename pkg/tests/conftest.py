import numpy as np
import pytest

from gldpc.schemas.code_schema import BaseGraph, CodeSpec, GeneralizationPlan
from gldpc.services.code_service import builtin_component, construct_code, generalize
from gldpc.services.experiment_service import BuiltCode


@pytest.fixture(scope="session")
def hamming74():
    return builtin_component("hamming74")


@pytest.fixture(scope="session")
def hamming_graph(hamming74):
    """The [7,4] Hamming code on its own: one GCN over seven VNs."""
    base = BaseGraph(n=7, m=1, gamma=1, p=7, rows=((0, 1, 2, 3, 4, 5, 6),))
    return generalize(base, hamming74, GeneralizationPlan(m=1, zeta=(0,)))


@pytest.fixture(scope="session")
def toy_graph():
    """Two disjoint single parity checks of length 3."""
    base = BaseGraph(n=6, m=2, gamma=1, p=3, rows=((0, 1, 2), (3, 4, 5)))
    return generalize(base, builtin_component("spc-3"), GeneralizationPlan(m=2))


@pytest.fixture(scope="session")
def desk_code(hamming74):
    """(2,7)-regular, n=49, every CN a Hamming GCN."""
    spec = CodeSpec(gamma=2, p=7, n=49, mu=1.0, base_seed=1, plan_seed=3)
    return BuiltCode(*construct_code(spec, hamming74))


@pytest.fixture(scope="session")
def half_code(hamming74):
    spec = CodeSpec(gamma=2, p=7, n=49, mu=0.5, base_seed=1, plan_seed=3)
    return BuiltCode(*construct_code(spec, hamming74))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
