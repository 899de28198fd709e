import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualhg.netio import MultiplexBipartiteNetwork, generate_synthetic

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_network(rng, n_u, n_v, k, density=0.3, labels=False):
    edges = []
    for _ in range(k):
        mask = rng.random((n_u, n_v)) < density
        edges.append(np.argwhere(mask).astype(np.int64))
    return MultiplexBipartiteNetwork(
        u_ids=tuple(f"u{i}" for i in range(n_u)),
        v_ids=tuple(f"v{j}" for j in range(n_v)),
        edge_types=tuple(f"t{i}" for i in range(k)),
        edges=tuple(edges),
        labels_v=(np.arange(n_v) % 2).astype(np.int64) if labels else None,
        class_names=("a", "b") if labels else (),
    )


@pytest.fixture
def toy_net():
    """6 x 8 two-type network used by the gradient checks."""
    return random_network(np.random.default_rng(3), 6, 8, 2, density=0.35)


@pytest.fixture(scope="session")
def small_synth():
    net, blocks = generate_synthetic(30, 40, 2, 2, 0.4, 0.02, seed=5)
    return net, blocks


# acceptance outcomes, echoed in the terminal summary even without -s
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
