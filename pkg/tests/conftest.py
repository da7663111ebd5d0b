import math
import sys

import numpy as np
import pytest

from ectbernstein.expspace import ExpSpace, Interval, Spectrum
from ectbernstein.expspace import POLY_EXP, POLY_EXP_COS, POLY_EXP_SIN


def poly_space(n):
    return ExpSpace(Spectrum(((0.0, 0.0, n + 1),)))


def one(space):
    return space.member(POLY_EXP, 0, 0.0)


def xfun(space):
    return space.member(POLY_EXP, 1, 0.0)


def expfun(space, lam):
    return space.member(POLY_EXP, 0, lam)


def cosfun(space):
    return space.member(POLY_EXP_COS, 0, 0.0, 1.0)


def sinfun(space):
    return space.member(POLY_EXP_SIN, 0, 0.0, 1.0)


@pytest.fixture
def unit():
    return Interval(0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def sup_rel(a, b):
    """max |a - b| / max |b|."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def binom_basis(n, k, x):
    return math.comb(n, k) * x ** k * (1 - x) ** (n - k)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[num])
