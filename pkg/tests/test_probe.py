import math

import numpy as np
import pytest
from scipy import integrate

from weakmeter import probe as pm
from weakmeter.errors import InvalidProbeError, ValidationError


def h_profile(window, s):
    """h(s) = int_s^{T_f} g, with preparation at s = 0 and T_i = prep_lead."""
    t_i = window.prep_lead
    if window.kind == pm.INSTANTANEOUS:
        return 1.0 if s <= t_i else 0.0
    t_f = t_i + window.T
    if s <= t_i:
        return 1.0
    return max(0.0, (t_f - s) / window.T)


def window_end(window):
    return window.prep_lead + (window.T if window.kind == pm.RECTANGULAR else 0.0)


def test_validate():
    assert pm.validate(pm.GaussianProbe(1, 1))
    assert pm.validate(pm.GaussianProbe(1, 0.3, math.inf))
    with pytest.raises(InvalidProbeError):
        pm.GaussianProbe(1, 2)
    for bad in (dict(delta_P=0, delta_p=0), dict(delta_P=1, delta_p=-1),
                dict(delta_P=1, delta_p=1, mass=0), dict(delta_P=1, delta_p=1, p_phi=0),
                dict(delta_P=1, delta_p=1, hbar=-1), dict(delta_P=1, delta_p=1, p_phi=-math.inf)):
        with pytest.raises(ValidationError):
            pm.GaussianProbe(**bad)


def test_rho_origin_and_trace():
    probe = pm.GaussianProbe(1.3, 0.4, 2.0)
    assert pm.rho_elem(probe, 0, 0) == pytest.approx(1 / (math.sqrt(2 * math.pi) * 1.3), rel=1e-15)
    p = np.linspace(-13, 13, 4001)
    assert abs(np.trapezoid(pm.rho_elem(probe, p, p).real, p) - 1) < 1e-8


def test_rho_coherence_decay():
    # delta_P >> delta_p: the (p+p') term vanishes for p' = -p
    probe = pm.GaussianProbe(1e6, 0.5)
    ratio = abs(pm.rho_elem(probe, 0.5, -0.5)) / pm.rho_elem(probe, 0, 0).real
    assert ratio == pytest.approx(math.exp(-0.5), rel=1e-10)


def test_rho_hermitian(rng):
    probe = pm.GaussianProbe(1.0, 0.7, 0.9)
    p, q = rng.normal(scale=2, size=(2, 1000))
    assert np.array_equal(pm.rho_elem(probe, p, q), np.conj(pm.rho_elem(probe, q, p)))
    diag = pm.rho_elem(probe, p, p)
    assert np.all(diag.imag == 0) and np.all(diag.real > 0)


def test_rho_positive_semidefinite_kernel():
    p = np.linspace(-4, 4, 201)
    for dp in (0.2, 0.6, 1.0):
        probe = pm.GaussianProbe(1.0, dp, 1.5)
        k = pm.rho_elem(probe, p[:, None], p[None, :])
        assert np.linalg.eigvalsh(k).min() > -1e-12


@pytest.mark.parametrize("T", [0.3, 1.0, 4.0])
def test_rectangular_moments(T):
    m = pm.coupling_moments(pm.CouplingWindow(pm.RECTANGULAR, T, 0.0))
    assert (m.m0, m.m1, m.m2) == pytest.approx((T, T / 2, T / 3), rel=1e-15)


def test_instantaneous_moments():
    m = pm.coupling_moments(pm.CouplingWindow(pm.INSTANTANEOUS, prep_lead=0.7))
    assert (m.m0, m.m1, m.m2) == (0.7, 0.7, 0.7)


def test_moments_against_double_quadrature():
    window = pm.CouplingWindow(pm.RECTANGULAR, 1.0, 2.0)
    t_i, t_f = 2.0, 3.0

    def g(s):
        return 1.0 if t_i <= s <= t_f else 0.0

    # Delta t = int_{t_p}^{T_f} ds int_s^{T_f} ds' g(s'), nested quad split at the step
    def inner(s):
        lo = max(s, t_i)
        return integrate.quad(g, lo, t_f, epsabs=1e-13)[0] if lo < t_f else 0.0

    m1, _ = integrate.quad(inner, 0, t_f, points=[t_i], epsabs=1e-12, limit=200)
    m2, _ = integrate.quad(lambda s: h_profile(window, s) ** 2, 0, t_f, points=[t_i])
    m = pm.coupling_moments(window)
    assert m1 == pytest.approx(2.5, abs=1e-9)
    assert m.m1 == pytest.approx(m1, abs=1e-9)
    assert m.m2 == pytest.approx(m2, abs=1e-9)
    assert m.m0 == t_f


@pytest.mark.parametrize("window", [pm.CouplingWindow(pm.RECTANGULAR, 0.5, 0.0),
                                    pm.CouplingWindow(pm.RECTANGULAR, 3.0, 1.2),
                                    pm.CouplingWindow(pm.INSTANTANEOUS, prep_lead=0.4)])
def test_moment_ordering(window):
    m = pm.coupling_moments(window)
    assert 0 <= m.m2 <= m.m1 <= m.m0


def test_phase_zero_coupling():
    probe = pm.GaussianProbe(1, 1, mass=2.0, hbar=0.5)
    m = pm.PhaseMoments(1.5, 0.75, 0.5)
    for a in (-1, 0.3, 2):
        assert pm.phase_phi(probe, m, 0.0, a, 0.8) == pytest.approx(0.8**2 * 1.5 / (2 * 0.5 * 2.0))


def test_phase_spin_difference_has_no_m2():
    probe = pm.GaussianProbe(1, 1, mass=1.7)
    p, lam = 0.9, 0.2
    m = pm.PhaseMoments(2.0, 1.0, 0.6)
    m_other = pm.PhaseMoments(2.0, 1.0, 0.1)
    diff = pm.phase_phi(probe, m, lam, 1, p) - pm.phase_phi(probe, m, lam, -1, p)
    diff_other = pm.phase_phi(probe, m_other, lam, 1, p) - pm.phase_phi(probe, m_other, lam, -1, p)
    assert diff == pytest.approx(-2 * p * lam * m.m1 / (probe.hbar * probe.mass), rel=1e-13)
    assert diff == pytest.approx(diff_other, rel=1e-13)
    assert pm.phase_difference(probe, m, lam, 1, -1, p) == pytest.approx(diff, rel=1e-13)


def test_phase_against_simpson_quadrature(rng):
    """Phi_a from composite Simpson over s of H_p(p - lam a h(s))."""
    worst = 0.0
    for _ in range(100):
        kind = pm.RECTANGULAR if rng.uniform() < 0.7 else pm.INSTANTANEOUS
        window = pm.CouplingWindow(kind, rng.uniform(0.1, 3), rng.uniform(0, 2))
        probe = pm.GaussianProbe(1.0, 1.0, mass=rng.uniform(0.2, 5), hbar=rng.uniform(0.5, 2))
        lam, a, p = rng.uniform(-1, 1), rng.uniform(-3, 3), rng.uniform(-3, 3)
        t_end = window_end(window)
        if kind == pm.INSTANTANEOUS:
            # h = 1 on [t_p, T_i]; the delta kick itself has zero measure
            s = np.linspace(0, t_end, 10_001)
            h = np.ones_like(s)
            pieces = [(s, h)]
        else:
            pieces = []
            if window.prep_lead > 0:
                s0 = np.linspace(0, window.prep_lead, 10_001)
                pieces.append((s0, np.ones_like(s0)))
            s1 = np.linspace(window.prep_lead, t_end, 10_001)
            pieces.append((s1, (t_end - s1) / window.T))
        total = sum(integrate.simpson((p - lam * a * h) ** 2 / (2 * probe.mass), x=s)
                    for s, h in pieces) / probe.hbar
        ours = pm.phase_phi(probe, pm.coupling_moments(window), lam, a, p)
        worst = max(worst, abs(ours - total) / max(abs(total), 1e-300))
    assert worst < 1e-9


def test_g_function():
    probe = pm.GaussianProbe(1, 1)
    m = pm.PhaseMoments(1, 0.5, 1 / 3)
    assert pm.g_function(probe, m, 0.0) == 0.0
    probe2 = pm.GaussianProbe(1, 1, p_phi=4.0)
    assert pm.g_function(probe2, m, 0.0) == -0.25


def test_g_function_from_density_phase():
    """G(p) = (2 m1/hbar) dH/dp - 2 d(alpha)/dp with alpha read off rho numerically."""
    probe = pm.GaussianProbe(1.2, 0.8, p_phi=1.7, mass=0.6, hbar=1.3)
    m = pm.PhaseMoments(2.0, 0.9, 0.5)
    p0, h = 0.4, 1e-5
    alpha = lambda p, q: np.angle(pm.rho_elem(probe, p, q))
    dalpha = (alpha(p0 + h, p0) - alpha(p0 - h, p0)) / (2 * h)
    expected = 2 * m.m1 / probe.hbar * p0 / probe.mass - 2 * dalpha
    assert pm.g_function(probe, m, p0) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("dP,mass,hbar,m1", [(1.0, 1.0, 1.0, 0.5), (2.0, 0.3, 1.7, 1.1)])
def test_mean_pG_is_kappa_sq(dP, mass, hbar, m1):
    probe = pm.GaussianProbe(dP, dP / 2, p_phi=3.0, mass=mass, hbar=hbar)
    m = pm.PhaseMoments(2 * m1, m1, m1 / 2)
    p = np.linspace(-12 * dP, 12 * dP, 8001)
    mean = np.trapezoid(p * pm.g_function(probe, m, p) * pm.marginal(probe, p), p)
    k2 = pm.derived_scales(probe, m).kappa_sq
    assert mean == pytest.approx(k2, rel=1e-8)
    assert k2 == pytest.approx(dP**2 / pm.derived_scales(probe, m).p_H ** 2, rel=1e-14)


def test_derived_scales_reference_probe():
    probe = pm.GaussianProbe(1, 1, mass=1, hbar=1)
    m = pm.coupling_moments(pm.CouplingWindow(pm.RECTANGULAR, 1.0))
    s = pm.derived_scales(probe, m)
    assert s.p_H == pytest.approx(1.0)
    assert s.kappa_sq == pytest.approx(1.0)
    assert s.nu == pytest.approx(1 / math.sqrt(2))
    assert s.Q_0 == 0.0


def test_derived_scales_no_dynamics():
    probe = pm.GaussianProbe(2.0, 0.5, p_phi=0.25, hbar=3.0)
    s = pm.derived_scales(probe, pm.PhaseMoments(0, 0, 0))
    assert s.p_H == math.inf and s.kappa_sq == 0 and s.nu == 0.5
    assert s.Q_0 == pytest.approx(3.0 / (2 * 0.25))


def test_nu_bound(rng):
    for _ in range(200):
        dP = rng.uniform(0.1, 5)
        probe = pm.GaussianProbe(dP, dP * rng.uniform(0.01, 1), mass=rng.uniform(0.1, 10))
        m = pm.PhaseMoments(3, rng.uniform(0, 3), 0.1)
        s = pm.derived_scales(probe, m)
        assert s.nu <= dP / math.sqrt(1 + s.kappa_sq**2) * (1 + 1e-12)


def test_beta():
    probe = pm.GaussianProbe(1, 1, mass=2.5, hbar=0.7)
    assert pm.beta(probe, pm.PhaseMoments(0, 0, 0)) == 0
    ref = pm.GaussianProbe(1, 1)
    m = pm.coupling_moments(pm.CouplingWindow(pm.RECTANGULAR, 1.0))
    assert pm.beta(ref, m) == pytest.approx(ref.hbar / ref.mass)


def _deriv4(f, dx, axis):
    """Fourth-order central difference; edges are left at zero (density is negligible there)."""
    f = np.moveaxis(f, axis, 0)
    out = np.zeros_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dx)
    return np.moveaxis(out, 0, axis)


def test_beta_is_initial_position_variance_rate():
    """Var q(t) for the free probe via q = i hbar d/dp acting on rho, differentiated in t."""
    dP, dp, p_phi, mass, hbar = 1.1, 0.6, 2.3, 0.8, 1.4
    lead = 0.9  # instantaneous coupling: m1 = time from preparation to T_i
    probe = pm.GaussianProbe(dP, dp, p_phi, mass, hbar)
    m = pm.coupling_moments(pm.CouplingWindow(pm.INSTANTANEOUS, prep_lead=lead))
    p = np.linspace(-9, 9, 1201)
    dx = p[1] - p[0]

    def var_q(t):
        # rho_t(p, p') = rho(p, p') exp(-i (p**2 - p'**2) t / (2 M hbar))
        P, Q = np.meshgrid(p, p, indexing="ij")
        rho = pm.rho_elem(probe, P, Q) * np.exp(-1j * (P**2 - Q**2) * t / (2 * mass * hbar))
        # <q> = i hbar int d/dp rho(p,p')|_{p'=p}; <q^2> = hbar^2 int d2/dpdp' rho|_{p'=p}
        d1 = _deriv4(rho, dx, 0)
        d12 = _deriv4(d1, dx, 1)
        mean_q = np.trapezoid(1j * hbar * np.diag(d1), p).real
        mean_q2 = np.trapezoid(hbar**2 * np.diag(d12), p).real
        return mean_q2 - mean_q**2

    eps = 1e-3
    rate = (var_q(lead + eps) - var_q(lead - eps)) / (2 * eps)
    assert rate == pytest.approx(pm.beta(probe, m), rel=1e-4)


def test_probe_for_kappa():
    probe, window = pm.probe_for_kappa(1.5, 1.0, 0.5)
    assert pm.derived_scales(probe, pm.coupling_moments(window)).kappa_sq == pytest.approx(0.5)
    probe0, window0 = pm.probe_for_kappa(1.5, 1.0, 0.0)
    assert pm.derived_scales(probe0, pm.coupling_moments(window0)).kappa_sq == 0.0
