"""Mixed Gaussian probe with a free quadratic Hamiltonian ``p**2 / 2M``.

The probe density matrix in the momentum basis is

    rho(p, p') = exp(-(p+p')**2 / 8 dP**2 - (p-p')**2 / 8 dp**2
                     + i (p-p') / 2 p_phi) / (sqrt(2 pi) dP)

with ``dP`` the classical spread, ``dp`` the coherence scale and ``p_phi``
the scale of a linear phase (``inf`` meaning no phase). The coupling window
enters only through three time moments of ``h(s) = int_s^{T_f} g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidProbeError, ValidationError

INSTANTANEOUS = "instantaneous"
RECTANGULAR = "rectangular"
WINDOW_KINDS = (INSTANTANEOUS, RECTANGULAR)


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class GaussianProbe:
    delta_P: float
    delta_p: float
    p_phi: float = math.inf
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        validate(self)

    @property
    def inv_p_phi(self):
        """``1 / p_phi``, exactly zero for the infinite sentinel."""
        return 0.0 if math.isinf(self.p_phi) else 1.0 / self.p_phi


@dataclass(frozen=True)
class CouplingWindow:
    """Time profile ``g(t)`` of the interaction, normalized to unit area.

    ``prep_lead`` is the delay between probe preparation and the start of the
    interaction; ``T`` is ignored for the instantaneous kind.
    """

    kind: str = RECTANGULAR
    T: float = 1.0
    prep_lead: float = 0.0

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValidationError(f"window kind must be one of {WINDOW_KINDS}, got {self.kind!r}")
        if self.kind == RECTANGULAR:
            _positive("window T", self.T)
        if not (math.isfinite(self.prep_lead) and self.prep_lead >= 0):
            raise ValidationError(f"prep_lead must be >= 0, got {self.prep_lead!r}")


@dataclass(frozen=True)
class PhaseMoments:
    """``m0 = T_f - t_p``, ``m1 = int h``, ``m2 = int h**2`` over ``[t_p, T_f]``."""

    m0: float
    m1: float
    m2: float


class DerivedScales(NamedTuple):
    p_H: float
    kappa_sq: float
    nu: float
    Q_0: float


def validate(probe):
    """Raise unless ``probe`` describes a valid density matrix."""
    _positive("delta_P", probe.delta_P)
    _positive("delta_p", probe.delta_p)
    _positive("mass", probe.mass)
    _positive("hbar", probe.hbar)
    p_phi = probe.p_phi
    if (not isinstance(p_phi, (int, float)) or math.isnan(p_phi) or p_phi == 0
            or p_phi == -math.inf):
        raise ValidationError(f"p_phi must be nonzero finite or +inf, got {p_phi!r}")
    if probe.delta_p > probe.delta_P:
        raise InvalidProbeError(
            f"coherence scale delta_p = {probe.delta_p!r} exceeds spread "
            f"delta_P = {probe.delta_P!r}: density matrix is not positive semidefinite")
    return True


def rho_elem(probe, p, p_prime):
    """Density matrix element ``rho(p, p')``; broadcasts over array inputs."""
    p = np.asarray(p, dtype=float)
    p_prime = np.asarray(p_prime, dtype=float)
    s = p + p_prime
    d = p - p_prime
    expo = (-s**2 / (8 * probe.delta_P**2) - d**2 / (8 * probe.delta_p**2)
            + 0.5j * d * probe.inv_p_phi)
    return np.exp(expo) / (math.sqrt(2 * math.pi) * probe.delta_P)


def marginal(probe, p):
    """Initial pointer distribution ``rho(p, p)``."""
    p = np.asarray(p, dtype=float)
    return np.exp(-p**2 / (2 * probe.delta_P**2)) / (math.sqrt(2 * math.pi) * probe.delta_P)


def coupling_moments(window):
    lead = window.prep_lead
    if window.kind == INSTANTANEOUS:
        return PhaseMoments(lead, lead, lead)
    T = window.T
    return PhaseMoments(lead + T, lead + T / 2, lead + T / 3)


def phase_phi(probe, moments, lam, a, p):
    """Hamiltonian phase ``Phi_a(p)`` accumulated from preparation to ``T_f``."""
    p = np.asarray(p, dtype=float)
    return (p**2 * moments.m0 - 2 * p * lam * a * moments.m1
            + lam**2 * a**2 * moments.m2) / (2 * probe.hbar * probe.mass)


def phase_difference(probe, moments, lam, a, a_prime, p):
    """``Phi_a - Phi_a'`` without the common ``p**2`` term (better conditioned)."""
    p = np.asarray(p, dtype=float)
    return (-2 * p * lam * (a - a_prime) * moments.m1
            + lam**2 * (a**2 - a_prime**2) * moments.m2) / (2 * probe.hbar * probe.mass)


def g_function(probe, moments, p):
    """Weak-limit phase gradient ``G(p) = 2 m1 p / (hbar M) - 1/p_phi``."""
    p = np.asarray(p, dtype=float)
    return 2 * moments.m1 * p / (probe.hbar * probe.mass) - probe.inv_p_phi


def kappa_sq(probe, moments):
    return 2 * probe.delta_P**2 * moments.m1 / (probe.hbar * probe.mass)


def derived_scales(probe, moments):
    k2 = kappa_sq(probe, moments)
    if moments.m1 > 0:
        p_H = math.sqrt(probe.hbar * probe.mass / (2 * moments.m1))
    else:
        p_H = math.inf
    nu = (1 / probe.delta_p**2 + k2**2 / probe.delta_P**2) ** -0.5
    assert nu <= probe.delta_P / math.sqrt(1 + k2**2) * (1 + 1e-12)
    Q_0 = probe.hbar * probe.inv_p_phi / 2
    return DerivedScales(p_H, k2, nu, Q_0)


def beta(probe, moments):
    """Initial growth rate of the position variance, ``hbar kappa**2 / M``."""
    return probe.hbar * kappa_sq(probe, moments) / probe.mass


def probe_for_kappa(delta_P, delta_p, kappa_squared, p_phi=math.inf, hbar=1.0, T=1.0):
    """Probe plus rectangular window realizing a requested ``kappa**2``.

    The mass is solved from ``kappa**2 = 2 dP**2 (T/2) / (hbar M)``; a zero
    ``kappa_squared`` returns an instantaneous window instead.
    """
    if kappa_squared == 0:
        return (GaussianProbe(delta_P, delta_p, p_phi, 1.0, hbar),
                CouplingWindow(INSTANTANEOUS, T, 0.0))
    mass = delta_P**2 * T / (hbar * kappa_squared)
    return GaussianProbe(delta_P, delta_p, p_phi, mass, hbar), CouplingWindow(RECTANGULAR, T, 0.0)
