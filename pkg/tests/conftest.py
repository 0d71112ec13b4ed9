import math

import numpy as np
import pytest

from weakmeter import engine as en
from weakmeter import probe as pm
from weakmeter import spin as sp
from weakmeter.quantum_core import bloch_to_spinor, spin_observable

SEED = 20240611

ACCEPTANCE_RESULTS = []


def spin_pair(theta, gamma, phi, lam, delta_P=1.0, delta_p=1.0, kappa_sq=1.0,
              p_phi=math.inf, hbar=1.0):
    """Matching (SpinScenario, MeasurementSetup) for the same physical setup."""
    probe, window = pm.probe_for_kappa(delta_P, delta_p, kappa_sq, p_phi, hbar)
    moments = pm.coupling_moments(window)
    geom = sp.SpinGeometry(theta, gamma, phi)
    sc = sp.SpinScenario(geom, probe, moments, lam)
    setup = en.MeasurementSetup(bloch_to_spinor(geom.n_i), bloch_to_spinor(geom.n_f),
                                spin_observable(geom.n), probe, window, lam)
    return sc, setup


def reference_pair(phi, gamma=1.0, theta=math.pi / 2):
    """Reference probe: lambda/delta_p = 0.01, p_phi = inf, delta_p = delta_P = p_H = 1."""
    return spin_pair(theta, gamma, phi, 0.01, 1.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
