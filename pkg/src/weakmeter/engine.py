"""Exact pointer statistics for pre- and postselected measurements.

The joint density of pointer outcome ``p`` and successful postselection is
the double sum over eigenvalues ``a, a'`` of the observable

    P(p, S_f) = sum_{a,a'} rho(p - lam a, p - lam a') exp(-i (Phi_a - Phi_a'))
                <f|a><a|i><i|a'><a'|f>

evaluated on a uniform momentum grid. Dividing by its integral gives the
conditional pointer density, whose moments (scaled by ``1/lam``) are the
inferred average and variance of the observable. The module also holds the
weak-coupling closed forms built on the complex weak value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import probe as pm
from .errors import (NumericalAssertionError, OrthogonalPostselectionError,
                     ValidationError, VanishingPostselectionError)
from .quantum_core import ObservableOp, SystemState

OVERLAP_FLOOR = 1e-10
POSTSELECTION_FLOOR = 1e-12
NEGATIVITY_TOL = 1e-12
IMAG_TOL = 1e-12
DEFAULT_POINTS = 4001
DEFAULT_HALF_WIDTH = 10.0  # in units of delta_P
MIN_HALF_WIDTH = 6.0


@dataclass(frozen=True, eq=False)
class MeasurementSetup:
    pre: SystemState
    post: SystemState
    observable: ObservableOp
    probe: pm.GaussianProbe
    window: pm.CouplingWindow
    lam: float

    def __post_init__(self):
        d = self.observable.dim
        if self.pre.dim != d or self.post.dim != d:
            raise ValidationError(
                f"dimension mismatch: pre {self.pre.dim}, post {self.post.dim}, observable {d}")
        if not (math.isfinite(self.lam) and self.lam != 0):
            raise ValidationError(f"coupling lambda must be finite and nonzero, got {self.lam!r}")
        pm.validate(self.probe)

    @cached_property
    def moments(self):
        return pm.coupling_moments(self.window)

    @cached_property
    def amplitudes(self):
        """``c_a = <f|a><a|i>`` for each eigenvector ``a``."""
        vecs = self.observable.eigenvectors
        return (vecs.conj().T @ self.post.amplitudes).conj() * (vecs.conj().T @ self.pre.amplitudes)

    @property
    def max_abs_eigenvalue(self):
        return float(np.abs(self.observable.eigenvalues).max())


@dataclass(frozen=True)
class PointerGrid:
    p_min: float
    p_max: float
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ValidationError(f"grid needs p_min < p_max, got [{self.p_min}, {self.p_max}]")
        if self.n_points < 101 or self.n_points % 2 == 0:
            raise ValidationError(f"grid needs an odd n_points >= 101, got {self.n_points}")

    @classmethod
    def default_for(cls, setup, n_points=DEFAULT_POINTS, half_width=DEFAULT_HALF_WIDTH):
        half = half_width * setup.probe.delta_P + abs(setup.lam) * setup.max_abs_eigenvalue
        return cls(-half, half, n_points)

    @property
    def points(self):
        return np.linspace(self.p_min, self.p_max, self.n_points)

    def covers(self, setup):
        half = MIN_HALF_WIDTH * setup.probe.delta_P + abs(setup.lam) * setup.max_abs_eigenvalue
        return self.p_min <= -half and self.p_max >= half


@dataclass(frozen=True, eq=False)
class PointerDistribution:
    grid: PointerGrid
    density: np.ndarray
    postselection_probability: float
    # True when the postselection overlap is small enough that the first-order
    # weak-value formulas are not expected to hold.
    weak_limit_suspect: bool = False

    @property
    def p(self):
        return self.grid.points

    def moment(self, k):
        return float(np.trapezoid(self.p**k * self.density, self.p))

    def mean(self):
        return self.moment(1)

    def variance(self):
        mu = self.mean()
        return float(np.trapezoid((self.p - mu) ** 2 * self.density, self.p))


@dataclass(frozen=True)
class WeakValueReport:
    A_w: complex
    A2_w: complex
    DeltaA2_w: complex
    overlap: float


def weak_value(pre, post, obs, overlap_floor=OVERLAP_FLOOR):
    """Weak values of ``A`` and ``A**2`` between ``pre`` and ``post``."""
    amp = post.inner(pre)
    if abs(amp) <= overlap_floor:
        raise OrthogonalPostselectionError(
            f"|<post|pre>| = {abs(amp):.3e} is below {overlap_floor:g}: weak value undefined")
    a_pre = obs.matrix @ pre.amplitudes
    A_w = complex(np.vdot(post.amplitudes, a_pre)) / amp
    A2_w = complex(np.vdot(post.amplitudes, obs.matrix @ a_pre)) / amp
    return WeakValueReport(A_w, A2_w, A2_w - A_w**2, abs(amp) ** 2)


def _joint_terms(setup, p):
    """Per-pair terms of the double sum, shape ``p.shape + (d, d)``."""
    p = np.asarray(p, dtype=float)
    vals = setup.observable.eigenvalues
    c = setup.amplitudes
    a = vals[:, None]
    ap = vals[None, :]
    pe = p[..., None, None]
    rho = pm.rho_elem(setup.probe, pe - setup.lam * a, pe - setup.lam * ap)
    dphi = pm.phase_difference(setup.probe, setup.moments, setup.lam, a, ap, pe)
    return rho * np.exp(-1j * dphi) * (c[:, None] * c.conj()[None, :])


def joint_density(setup, p):
    """Joint density of pointer value ``p`` and successful postselection.

    Works on scalars or arrays. The double sum is real up to rounding; the
    imaginary residue and any negativity are checked against the magnitude
    of the individual terms and then discarded or clamped.
    """
    terms = _joint_terms(setup, p)
    total = terms.sum(axis=(-2, -1))
    scale = np.abs(terms).sum(axis=(-2, -1))
    peak = float(np.max(scale)) if np.size(scale) else 0.0
    if peak > 0:
        if np.max(np.abs(total.imag)) > IMAG_TOL * peak:
            raise NumericalAssertionError("joint density has a non-negligible imaginary part")
        if np.min(total.real) < -NEGATIVITY_TOL * peak:
            raise NumericalAssertionError("joint density is negative beyond rounding")
    out = np.clip(total.real, 0.0, None)
    return float(out) if out.ndim == 0 else out


def conditional_distribution(setup, grid=None):
    """Pointer density conditioned on postselection, on ``grid``."""
    if grid is None:
        grid = PointerGrid.default_for(setup)
    p = grid.points
    joint = joint_density(setup, p)
    prob = float(np.trapezoid(joint, p))
    if not prob > POSTSELECTION_FLOOR:
        raise VanishingPostselectionError(
            f"postselection probability {prob:.3e} is below floor {POSTSELECTION_FLOOR:g}",
            probability=prob)
    overlap = abs(setup.post.inner(setup.pre)) ** 2
    suspect = overlap**2 < abs(setup.lam) / setup.probe.delta_p
    return PointerDistribution(grid, joint / prob, prob, suspect)


def inferred_average(setup, grid=None):
    """``<p>/lam`` under the conditional pointer density."""
    return conditional_distribution(setup, grid).mean() / setup.lam


def inferred_variance(setup, grid=None):
    return conditional_distribution(setup, grid).variance() / setup.lam**2


def inferred_moments(setup, grid=None):
    """``(average, variance, postselection probability)`` from one distribution."""
    dist = conditional_distribution(setup, grid)
    return (dist.mean() / setup.lam, dist.variance() / setup.lam**2,
            dist.postselection_probability)


def weak_average_approx(report, probe, moments):
    """First-order average ``Re A_w - kappa**2 Im A_w``."""
    return report.A_w.real - pm.kappa_sq(probe, moments) * report.A_w.imag


def weak_variance_approx(report, probe, moments, lam):
    k2 = pm.kappa_sq(probe, moments)
    d2 = report.DeltaA2_w
    return probe.delta_P**2 / lam**2 + 0.5 * (1 - k2**2) * d2.real - k2 * d2.imag


def velocity_expectation_weak(report, probe, moments, lam):
    """Weak-limit mean of the probe velocity ``p/M`` (zero-mean probe).

    The imaginary-part term is ``lam * beta / hbar``; the ``1/hbar`` keeps it a
    velocity and makes ``M <V>`` equal ``lam * weak_average_approx`` for any hbar.
    """
    b = pm.beta(probe, moments)
    return (lam / probe.mass) * report.A_w.real - lam * b / probe.hbar * report.A_w.imag
