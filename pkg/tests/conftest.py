import time

import numpy as np
import pytest

from coherence_spectra.spectra import default_sweep, run_sweep

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_density(rng, n, rank=None):
    a = rand_complex(rng, (n, rank or n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def three_level_envelope_sweep():
    """Default three-level sweep with envelopes; ~1 min, computed once."""
    return run_sweep(default_sweep("three-level", envelope=True))


@pytest.fixture(scope="session")
def jc_sweeps():
    """Default JC sweeps per dissipator, plus the wall time of each under ``"wall"``."""
    out, wall = {}, {}
    for d in ("none", "relaxation", "dephasing"):
        start = time.perf_counter()
        out[d] = run_sweep(default_sweep("jc", d))
        wall[d] = time.perf_counter() - start
    out["wall"] = wall
    return out
