import numpy as np
import pytest

from netsense import netgen


def pytest_configure(config):
    # criterion id -> (passed, detail); filled by test_acceptance.py
    config.acceptance_log = {}


def pytest_terminal_summary(terminalreporter, config):
    log = config.acceptance_log
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(log, key=lambda k: int(k[1:])):
        ok, detail = log[key]
        terminalreporter.write_line(f"{key:>4} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def acceptance_log(request):
    return request.config.acceptance_log


@pytest.fixture
def graph_factory():
    return random_graph


@pytest.fixture
def star4():
    return netgen.generate(netgen.GraphSpec("star", n=4))


@pytest.fixture
def k4():
    return netgen.generate(netgen.GraphSpec("complete", n=4))


def random_graph(seed, n_max=40):
    """Small connected-ish random graph from a mix of generators."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, n_max))
    kind = ["er", "ba", "watts-strogatz", "random-geometric", "powerlaw-config"][seed % 5]
    weights = "uniform" if seed % 2 else "constant"
    if kind == "er":
        spec = netgen.GraphSpec("er", n=n, p=0.3, weights=weights, seed=seed)
    elif kind == "ba":
        spec = netgen.GraphSpec("ba", n=n, m=2, weights=weights, seed=seed)
    elif kind == "watts-strogatz":
        spec = netgen.GraphSpec("watts-strogatz", n=n, k=2, rewire=0.2, weights=weights, seed=seed)
    elif kind == "random-geometric":
        spec = netgen.GraphSpec("random-geometric", n=n, radius=0.4, weights=weights, seed=seed)
    else:
        spec = netgen.GraphSpec("powerlaw-config", n=n, gamma=2.5, k_min=2, weights=weights, seed=seed)
    return netgen.generate(spec)
