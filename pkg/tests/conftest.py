import numpy as np
import pytest

from rancca.pairing import PairedDataset

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def correlated_blocks(seed, m, p, q, latent=2, noise=1.0):
    """Raw X (m x p) and Y (m x q) sharing ``latent`` hidden factors."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(m, latent))
    X = z @ rng.normal(size=(latent, p)) + noise * rng.normal(size=(m, p))
    Y = z @ rng.normal(size=(latent, q)) + noise * rng.normal(size=(m, q))
    X = X * rng.uniform(0.5, 20, p) + rng.uniform(-100, 100, p)
    Y = Y * rng.uniform(0.5, 20, q) + rng.uniform(-100, 100, q)
    return X, Y


def random_dataset(seed, m, p, q, **kw) -> PairedDataset:
    X, Y = correlated_blocks(seed, m, p, q, **kw)
    return PairedDataset.from_arrays(X, Y)


@pytest.fixture
def make_dataset():
    return random_dataset


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
