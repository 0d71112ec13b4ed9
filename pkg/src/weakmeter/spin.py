"""Closed-form spin-1/2 results for a Gaussian probe.

Geometry gauge: the preselection axis is ``n_i = z``, the observable axis
``n = (sin theta, 0, cos theta)`` lies in the XZ plane, and the postselection
axis is ``n_f = (sin gamma cos phi, sin gamma sin phi, cos gamma)``. Note the
ranges: ``gamma`` runs over ``[0, 2 pi]`` and ``phi`` over ``[0, pi]``, the
reverse of the usual polar/azimuthal convention. With this choice the weak
value is ``cos theta + sin theta exp(-i phi) tan(gamma/2)``.

All closed forms below are written in terms of five geometric scalars

    x  = n.n_i            y = n.n_f            c = n_i.n_f
    S  = n.(n_i x n_f)    C = (n x n_i).(n x n_f) = c - x y

and of the probe quantities ``E = exp(-lam**2 / 2 nu**2)`` and
``r = lam / p_phi``. The ``*_curve`` helpers broadcast over angle arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import probe as pm
from .errors import (DegenerateGeometryError, OrthogonalPostselectionError,
                     RegimeNotApplicableError, ValidationError,
                     VanishingPostselectionError)
from .quantum_core import direction_from_angles

NORMALIZER_FLOOR = 1e-12
REGIME_FACTOR = 10.0
SWEEP_POINTS = 100_001


@dataclass(frozen=True)
class SpinGeometry:
    theta: float
    gamma: float
    phi: float

    def __post_init__(self):
        if not 0 <= self.theta <= math.pi:
            raise ValidationError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not 0 <= self.gamma <= 2 * math.pi:
            raise ValidationError(f"gamma must lie in [0, 2 pi], got {self.gamma!r}")
        if not 0 <= self.phi <= math.pi:
            raise ValidationError(f"phi must lie in [0, pi], got {self.phi!r}")

    @property
    def n(self):
        return direction_from_angles(self.theta, 0.0)

    @property
    def n_i(self):
        return np.array([0.0, 0.0, 1.0])

    @property
    def n_f(self):
        return direction_from_angles(self.gamma, self.phi)


@dataclass(frozen=True)
class SpinScenario:
    geometry: SpinGeometry
    probe: pm.GaussianProbe
    moments: pm.PhaseMoments
    lam: float

    def __post_init__(self):
        pm.validate(self.probe)
        if not (math.isfinite(self.lam) and self.lam != 0):
            raise ValidationError(f"coupling lambda must be finite and nonzero, got {self.lam!r}")

    def with_angles(self, **angles):
        geom = self.geometry
        new = SpinGeometry(angles.get("theta", geom.theta), angles.get("gamma", geom.gamma),
                           angles.get("phi", geom.phi))
        return SpinScenario(new, self.probe, self.moments, self.lam)

    @property
    def scales(self):
        return pm.derived_scales(self.probe, self.moments)


class Extremum(NamedTuple):
    gamma_star: float
    A_m: float
    label: str      # "analytic" or "numeric"
    regime: str


class SpreadExtrema(NamedTuple):
    min: float
    max: float
    min_locations: tuple    # ((gamma, phi), (gamma, phi))
    max_location: tuple     # (gamma, phi); phi is arbitrary at gamma = pi


def _terms(theta, gamma, phi):
    st, ct = np.sin(theta), np.cos(theta)
    sg, cg = np.sin(gamma), np.cos(gamma)
    x = ct
    y = st * sg * np.cos(phi) + ct * cg
    c = cg
    S = -st * sg * np.sin(phi)
    C = c - x * y
    return x, y, c, S, C


def _probe_factors(sc):
    """``(kappa**2, E, r)`` for a scenario."""
    k2, nu = sc.scales.kappa_sq, sc.scales.nu
    E = math.exp(-sc.lam**2 / (2 * nu**2))
    r = sc.lam * sc.probe.inv_p_phi
    return k2, E, r


def epsilon(phi, kappa_squared):
    """Azimuthal weight ``cos phi + kappa**2 sin phi``."""
    return np.cos(phi) + kappa_squared * np.sin(phi)


def epsilon_prime(phi, kappa_squared):
    return -np.sin(phi) + kappa_squared * np.cos(phi)


# --- weak value ---------------------------------------------------------------

def spin_weak_value(geom):
    if math.isclose(geom.gamma, math.pi, rel_tol=0, abs_tol=1e-12):
        raise OrthogonalPostselectionError("gamma = pi: pre- and postselection are orthogonal")
    return (math.cos(geom.theta)
            + math.sin(geom.theta) * complex(math.cos(geom.phi), -math.sin(geom.phi))
            * math.tan(geom.gamma / 2))


def spin_weak_value_vector(n, n_i, n_f):
    """Weak value from unit vectors: ``n.(n_i + n_f + i n_i x n_f) / (1 + n_i.n_f)``."""
    denom = 1 + float(np.dot(n_i, n_f))
    if abs(denom) < 1e-14:
        raise OrthogonalPostselectionError("antiparallel pre- and postselection axes")
    num = np.dot(n, n_i + n_f) + 1j * np.dot(n, np.cross(n_i, n_f))
    return complex(num) / denom


# --- exact closed forms -------------------------------------------------------

def normalizer_curve(sc, theta, gamma, phi):
    k2, E, r = _probe_factors(sc)
    x, y, c, S, C = _terms(theta, gamma, phi)
    return 1 + c + E * math.sin(r) * S - (1 - E * math.cos(r)) * C


def normalizer(sc):
    """Normalizer ``N``; the postselection probability is ``N / 2``."""
    g = sc.geometry
    return float(normalizer_curve(sc, g.theta, g.gamma, g.phi))


def average_curve(sc, theta, gamma, phi):
    """Exact inferred average over broadcast angle arrays (no floor check)."""
    k2, E, r = _probe_factors(sc)
    x, y, c, S, C = _terms(theta, gamma, phi)
    N = 1 + c + E * math.sin(r) * S - (1 - E * math.cos(r)) * C
    num = x + y - k2 * E * (math.cos(r) * S - math.sin(r) * C)
    return num / N


def variance_curve(sc, theta, gamma, phi):
    """Exact inferred variance over broadcast angle arrays (no floor check)."""
    k2, E, r = _probe_factors(sc)
    lam, dP2 = sc.lam, sc.probe.delta_P**2
    x, y, c, S, C = _terms(theta, gamma, phi)
    interference = E * (math.cos(r) * C + math.sin(r) * S)
    N = 1 + x * y + interference
    mean_p = lam * (x + y - k2 * E * (math.cos(r) * S - math.sin(r) * C)) / N
    second = ((1 + x * y) * (dP2 + lam**2) + (dP2 - lam**2 * k2**2) * interference) / N
    return (second - mean_p**2) / lam**2


def _checked_normalizer(sc):
    N = normalizer(sc)
    if not N > NORMALIZER_FLOOR:
        raise VanishingPostselectionError(
            f"spin normalizer N = {N:.3e} is below floor {NORMALIZER_FLOOR:g}", probability=N / 2)
    return N


def exact_average_spin(sc):
    _checked_normalizer(sc)
    g = sc.geometry
    return float(average_curve(sc, g.theta, g.gamma, g.phi))


def exact_variance_spin(sc):
    _checked_normalizer(sc)
    g = sc.geometry
    return float(variance_curve(sc, g.theta, g.gamma, g.phi))


def conditional_pdf_spin(sc, p):
    """Conditional pointer density from the two-Gaussian-plus-interference form."""
    N = _checked_normalizer(sc)
    g = sc.geometry
    x, y, c, S, C = _terms(g.theta, g.gamma, g.phi)
    p = np.asarray(p, dtype=float)
    dP, lam = sc.probe.delta_P, sc.lam
    G = pm.g_function(sc.probe, sc.moments, p)
    total = 0.0
    for sigma in (1, -1):
        total = total + (1 + sigma * x) * (1 + sigma * y) * np.exp(-(p - sigma * lam) ** 2 / (2 * dP**2))
        total = total + ((C * np.cos(lam * G) - S * np.sin(lam * G))
                         * np.exp(-p**2 / (2 * dP**2) - lam**2 / (2 * sc.probe.delta_p**2)))
    return 0.5 * total / (math.sqrt(2 * math.pi) * dP * N)


# --- extrema of the average over gamma ----------------------------------------

def _regime_scale(sc):
    """``max(lam/|p_phi|, lam/nu)``: the azimuthal weight is compared to this."""
    lam = abs(sc.lam)
    return max(lam * abs(sc.probe.inv_p_phi), lam / sc.scales.nu)


def _wrap(gamma):
    return float(np.mod(gamma, 2 * math.pi))


def numeric_extremum(sc, branch="upper", n_points=SWEEP_POINTS):
    """Brute-force sweep of the exact average over ``gamma`` in ``[0, 2 pi]``."""
    g = sc.geometry
    gammas = np.linspace(0.0, 2 * math.pi, n_points)
    A = average_curve(sc, g.theta, gammas, g.phi)
    N = normalizer_curve(sc, g.theta, gammas, g.phi)
    A = np.where(N > NORMALIZER_FLOOR, A, np.nan)
    k = int(np.nanargmax(A) if branch == "upper" else np.nanargmin(A))
    return Extremum(float(gammas[k]), float(A[k]), "numeric", "sweep")


def extremum(sc, branch="upper"):
    """Position ``gamma*`` and value of an extremum of the average over ``gamma``.

    ``branch`` picks the upper (+) or lower (-) sign of the closed forms. The
    validity regime is decided from the azimuthal weight ``eps(phi)`` against
    ``max(lam/p_phi, lam/nu)``:

    * ``|eps|`` large and ``p_phi >= 10 nu``: ``eta* = +-sin(theta) lam/nu``,
      ``A_m = +-eps nu/lam`` (regime ``"i"``);
    * ``|eps|`` large and ``kappa**2 <= 0.01``: the ``kappa -> 0`` forms
      (regime ``"ii"``);
    * ``|eps|`` large otherwise: the full near-``pi`` forms (regime ``"general"``);
    * ``|eps|`` small with finite ``p_phi`` and ``kappa**2 > 0.01``: one
      extremum leaves the neighbourhood of ``pi`` (``A_m ~ cos theta``), the
      other tends to a finite limit near ``pi`` (regime ``"small-eps"``).

    Anything in between falls back to :func:`numeric_extremum`. In every
    analytic case ``gamma* = pi - eta*``.
    """
    if branch not in ("upper", "lower"):
        raise ValidationError(f"branch must be 'upper' or 'lower', got {branch!r}")
    g = sc.geometry
    if min(g.theta, math.pi - g.theta) < 1e-12:
        raise DegenerateGeometryError("theta = 0 or pi: the average does not depend on gamma")
    sign = 1.0 if branch == "upper" else -1.0
    k2, nu = sc.scales.kappa_sq, sc.scales.nu
    lam, ip = sc.lam, sc.probe.inv_p_phi
    st = math.sin(g.theta)
    eps = float(epsilon(g.phi, k2))
    epsp = float(epsilon_prime(g.phi, k2))
    cphi, sphi = math.cos(g.phi), math.sin(g.phi)
    scale = _regime_scale(sc)

    if abs(eps) > REGIME_FACTOR * scale:
        # The special-case forms assume eps > 0; flipping with sign(eps) keeps
        # "upper" the maximum. The general form is sign-safe (A_m ~ eps**2).
        s = sign * math.copysign(1.0, eps)
        if abs(ip) * REGIME_FACTOR * nu <= 1:
            eta = s * st * lam / nu
            return Extremum(_wrap(math.pi - eta), s * eps * nu / lam, "analytic", "i")
        if k2 <= 0.01:
            root = math.sqrt(1 / nu**2 + ip**2)
            eta = s * st * lam * root
            A_m = cphi / (lam * (s * root - sphi * ip))
            return Extremum(_wrap(math.pi - eta), A_m, "analytic", "ii")
        root = math.sqrt(eps**2 / nu**2 + (1 + k2**2) * cphi**2 * ip**2)
        eta = lam * st / eps * (k2 * ip + sign * root)
        A_m = (eps**2 / lam) / (cphi * epsp * ip + sign * root)
        return Extremum(_wrap(math.pi - eta), A_m, "analytic", "general")

    if ip != 0 and k2 > 0.01 and abs(eps) < scale / REGIME_FACTOR:
        r = lam * ip
        # Two stationary points: one far from pi with A_m = cos(theta), and the
        # eps -> 0 limit of the lower-sign near-pi forms. Which one is the
        # maximum depends on their values.
        eta = lam * st * ip / math.sqrt(1 + k2**2)
        near = Extremum(_wrap(math.pi - eta),
                        -2 * k2 * r / (k2**2 * r**2 / (1 + k2**2) + lam**2 / nu**2),
                        "analytic", "small-eps")
        far_is_upper = math.cos(g.theta) > near.A_m
        if (branch == "upper") != far_is_upper:
            return near
        q = eps + epsp * r * math.cos(g.theta)
        sin_g = -2 * k2 * r * st * q / ((k2 * r * st) ** 2 + q**2)
        base = math.asin(max(-1.0, min(1.0, sin_g)))
        candidates = [_wrap(base), _wrap(math.pi - base)]
        values = [float(average_curve(sc, g.theta, c, g.phi)) for c in candidates]
        pick = np.argmax(values) if far_is_upper else np.argmin(values)
        return Extremum(candidates[int(pick)], math.cos(g.theta), "analytic", "small-eps")

    return numeric_extremum(sc, branch)


def joint_extremum(sc, branch="upper"):
    """Extremum over both ``gamma`` and ``phi`` for ``p_phi >> nu``.

    Returns ``(gamma*, phi*, A_m)`` with ``phi* = arctan(kappa**2)`` and
    ``A_m = +-sqrt(1 + kappa**4) nu / lam``.
    """
    _require_large_p_phi(sc)
    g = sc.geometry
    if min(g.theta, math.pi - g.theta) < 1e-12:
        raise DegenerateGeometryError("theta = 0 or pi: the average does not depend on gamma")
    k2, nu = sc.scales.kappa_sq, sc.scales.nu
    s = 1.0 if branch == "upper" else -1.0
    gamma_star = math.pi - s * math.sin(g.theta) * sc.lam / nu
    return gamma_star, math.atan(k2), s * math.sqrt(1 + k2**2) * nu / sc.lam


def _require_large_p_phi(sc):
    nu = sc.scales.nu
    if abs(sc.probe.inv_p_phi) * REGIME_FACTOR * nu > 1:
        raise RegimeNotApplicableError(
            f"closed form needs p_phi >= {REGIME_FACTOR:g} nu "
            f"(p_phi = {sc.probe.p_phi!r}, nu = {nu!r})")


def spread_extrema(sc):
    """Closed-form minimum and maximum of the inferred variance (``p_phi >> nu``)."""
    _require_large_p_phi(sc)
    k2, nu = sc.scales.kappa_sq, sc.scales.nu
    dP2, lam = sc.probe.delta_P**2, sc.lam
    w = (1 + k2**2) * nu**2
    vmin = (dP2 - w / 4) / lam**2
    vmax = (dP2 + 2 * w) / lam**2
    eta = math.sqrt(3) * math.sin(sc.geometry.theta) * abs(lam) / nu
    phi_star = math.atan(k2)
    return SpreadExtrema(vmin, vmax,
                         ((math.pi - eta, phi_star), (math.pi + eta, phi_star)),
                         (math.pi, phi_star))


def numeric_spread_extrema(sc, n_gamma=2001, n_phi=361, gamma_window=None):
    """Brute-force ``(gamma, phi)`` sweep of the exact variance.

    Returns ``((vmin, gamma, phi), (vmax, gamma, phi))``. ``gamma_window``
    restricts ``gamma`` to ``pi +- window``; by default the window spans
    ``20 lam/nu`` on each side, which holds both extrema.
    """
    nu = sc.scales.nu
    half = gamma_window if gamma_window is not None else min(math.pi, 20 * abs(sc.lam) / nu)
    gammas = np.linspace(math.pi - half, math.pi + half, n_gamma)[:, None]
    phis = np.linspace(0.0, math.pi, n_phi)[None, :]
    th = sc.geometry.theta
    V = variance_curve(sc, th, gammas, phis)
    N = normalizer_curve(sc, th, gammas, phis)
    V = np.where(N > NORMALIZER_FLOOR, V, np.nan)
    i = np.unravel_index(np.nanargmin(V), V.shape)
    j = np.unravel_index(np.nanargmax(V), V.shape)
    return ((float(V[i]), float(gammas[i[0], 0]), float(phis[0, i[1]])),
            (float(V[j]), float(gammas[j[0], 0]), float(phis[0, j[1]])))
