import math

import numpy as np
import pytest
from scipy.linalg import expm

from lorentzsl2.dynamics import StructureParams, timelike_covector

# exact su(1,1) generators matching the structure constants of the package
E1 = np.array([[0.5j, 0], [0, -0.5j]])
E2 = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
E3 = np.array([[0, 0.5j], [-0.5j, 0]])


def algebra_matrix(x1, x2, x3):
    return x1 * E1 + x2 * E2 + x3 * E3


def matrix_exp(x1, x2, x3):
    return expm(algebra_matrix(x1, x2, x3))


def params_for(mu: float, I1: float = 1.0) -> StructureParams:
    if mu == -1:
        return StructureParams(I1, math.inf)
    return StructureParams.from_mu(mu, I1=I1)


def random_timelike(p: StructureParams, rng: np.random.Generator, n: int):
    """Normalised Kil < 0 covectors, plus Kil > 0 ones when the regime allows it."""
    mu = p.mu
    out = []
    for i in range(n):
        h2 = rng.normal()
        if mu > 0:
            b3 = rng.uniform(-0.95, 0.95) / math.sqrt(mu)
            out.append(timelike_covector(b3, p, h2bar=h2))
        elif i % 4 == 3:
            lo = 1.05 / math.sqrt(-mu) if mu > -1 else 1.05
            b3 = math.copysign(rng.uniform(lo, lo + 1.0), rng.normal())
            out.append(timelike_covector(b3, p, h2bar=h2, kil_sign=1))
        else:
            out.append(timelike_covector(rng.uniform(-1.5, 1.5), p, h2bar=h2))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


REPORT: dict = {}


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for key in sorted(REPORT, key=lambda k: (k[0], str(k[1]))):
            terminalreporter.write_line(REPORT[key])
