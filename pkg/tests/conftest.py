import warnings

import numpy as np
import pytest
from scipy import integrate

from dilquant import distributions as dist
from dilquant.greedy import build_greedy

NORMAL = dist.DistributionSpec.normal()
EXPONENTIAL = dist.DistributionSpec.exponential()
UNIFORM = dist.DistributionSpec.uniform01()
HYPER_EXP = dist.DistributionSpec.hyper_exponential(1.0, 1.0)
HYPER_GAMMA = dist.DistributionSpec.hyper_gamma(1.0, 2.0, 2.0)
HYPER_CAUCHY = dist.DistributionSpec.hyper_cauchy(2.0)

CATALOG_1D = [UNIFORM, NORMAL, EXPONENTIAL, HYPER_EXP, HYPER_GAMMA, HYPER_CAUCHY]


def quad_oracle(func, lo, hi, points=None):
    """scipy.integrate.quad with tight tolerances; the independent route for checks."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=500,
                                points=points if points and np.isfinite([lo, hi]).all() else None)
    return val


def quad_distortion(points, pdf, r, lo=-np.inf, hi=np.inf):
    """e_r^r by scipy quad on every half cell."""
    p = np.sort(np.asarray(points, dtype=float))
    mids = np.concatenate([[lo], 0.5 * (p[1:] + p[:-1]), [hi]])
    total = 0.0
    for i, c in enumerate(p):
        a, b = mids[i], mids[i + 1]
        m = min(max(c, a), b)
        for u, v in ((a, m), (m, b)):
            if u < v:
                total += quad_oracle(lambda x: abs(x - c) ** r * pdf(x), u, v)
    return total


_SEQUENCES = {}


def greedy_sequence(spec, r, size):
    """Greedy sequences are expensive; build each (spec, r) once per session at the largest size."""
    key = (spec, r)
    seq = _SEQUENCES.get(key)
    if seq is None or seq.size < size:
        seq = build_greedy(spec, r, size)
        _SEQUENCES[key] = seq
    return seq


@pytest.fixture(scope="session")
def normal_greedy_r2():
    return greedy_sequence(NORMAL, 2, 1023)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, seconds, detail=""):
    """Store one acceptance line; they are printed together in the terminal summary."""
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number}: {title} ({seconds:.1f} s)"
    if detail:
        line += f" | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
