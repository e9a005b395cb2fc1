import logging
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ellipe, gammaln

from fbfading.errors import ConvergenceError, DomainError
from fbfading.first_order import cdf_envelope
from fbfading.params import ShapeParams
from fbfading.second_order import DopplerContext, LcrConfig, afd, afd_curve, lcr

U_RAYLEIGH = np.geomspace(0.05, 3.0, 40)
RAYLEIGH = ShapeParams(1.0, 1e-8, 1.0, 1.0, 1.0, 1.0)


def rice_formula_lcr(kappa, eta, m, u, fd=1.0):
    """Rice's formula for one cluster with all LoS power in phase, integrated numerically.

    Given xi, the envelope at angle theta has density u f_X(u cos th - p xi) f_Y(u sin th)
    and its derivative is zero-mean Gaussian with variance
    rho''(0) (sx2 cos^2 th + sy2 sin^2 th).
    """
    sx2 = eta / ((1 + eta) * (1 + kappa))
    sy2 = 1 / ((1 + eta) * (1 + kappa))
    p = math.sqrt(kappa / (1 + kappa))
    rdd = 2 * math.pi ** 2 * fd ** 2

    def given_xi(xi):
        def f(th):
            c, s = math.cos(th), math.sin(th)
            dens = math.exp(-(u * c - p * xi) ** 2 / (2 * sx2) - (u * s) ** 2 / (2 * sy2))
            dens /= 2 * math.pi * math.sqrt(sx2 * sy2)
            return u * dens * math.sqrt(rdd * (sx2 * c * c + sy2 * s * s) / (2 * math.pi))
        return 2 * quad(f, 0, math.pi, epsabs=0, epsrel=1e-12, limit=200)[0]

    log_norm = math.log(2) + m * math.log(m) - gammaln(m)
    xi_pdf = lambda xi: math.exp(log_norm + (2 * m - 1) * math.log(xi) - m * xi * xi) if xi > 0 else 0.0
    hi = math.sqrt((m + 40 + 10 * math.sqrt(m)) / m)
    return quad(lambda xi: given_xi(xi) * xi_pdf(xi), 0, hi, epsabs=0, epsrel=1e-10, limit=200)[0]


def test_rayleigh_limit_lcr():
    ref = math.sqrt(2 * math.pi) * U_RAYLEIGH * np.exp(-U_RAYLEIGH ** 2)
    assert np.max(np.abs(lcr(RAYLEIGH, U_RAYLEIGH) / ref - 1)) < 1e-4


def test_rayleigh_limit_afd():
    ref = (np.exp(U_RAYLEIGH ** 2) - 1) / (math.sqrt(2 * math.pi) * U_RAYLEIGH)
    assert np.max(np.abs(afd(RAYLEIGH, U_RAYLEIGH) / ref - 1)) < 1e-4


@pytest.mark.parametrize("m", [0.5, 1.0, 2.5, 4.0])
def test_nakagami_limit(m):
    # Classical Nakagami-m LCR: sqrt(2 pi) fd m^(m-1/2) / Gamma(m) u^(2m-1) exp(-m u^2)
    p = ShapeParams(1.0, 0.0, m, 1.0, 1.0, 1.0)
    u = np.geomspace(0.05, 3.0, 15)
    ref = np.sqrt(2 * np.pi) * np.exp((m - 0.5) * np.log(m) - gammaln(m)) * u ** (2 * m - 1) * np.exp(-m * u * u)
    assert np.max(np.abs(lcr(p, u) / ref - 1)) < 1e-9


@pytest.mark.parametrize("kappa, eta, m", [(1.0, 1.4, 1.0), (5.0, 0.5, 1.0), (3.0, 0.2, 2.5), (10.0, 3.0, 0.7),
                                           (1.0, 1.0, 1.0)])
def test_against_rice_formula(kappa, eta, m):
    p = ShapeParams(1.0, kappa, 1.0, m, eta, 1.0)
    for x_db in (-20.0, -5.0, 0.0, 4.0):
        u = 10 ** (x_db / 20)
        assert lcr(p, u) == pytest.approx(rice_formula_lcr(kappa, eta, m, u), rel=1e-7)


def test_linear_in_doppler():
    p = ShapeParams(1.0, 5.0, 2.0, 1.0, 0.5, 1.0)
    u = np.geomspace(0.05, 2.0, 9)
    assert np.allclose(lcr(p, u, DopplerContext(2.0)), 2 * lcr(p, u, DopplerContext(1.0)), rtol=1e-14, atol=0)


def test_afd_times_lcr_is_cdf():
    p = ShapeParams(1.0, 5.0, 2.0, 1.0, 0.5, 1.0)
    u = np.geomspace(0.05, 2.5, 12)
    res = afd_curve(p, u)
    assert np.allclose(res.afd * res.lcr, cdf_envelope(p, u), rtol=1e-12, atol=0)
    assert not res.underflow.any()


def test_afd_underflow_flag():
    p = ShapeParams(1.0, 5.0, 3.0, 1.0, 0.5, 1.0)
    res = afd_curve(p, np.array([1e-150, 0.5]))
    assert res.underflow.tolist() == [True, False]
    assert math.isinf(res.afd[0])


def test_quadrature_schemes_agree():
    u = 10 ** (np.array([-30.0, -10.0, 0.0, 6.0]) / 20)
    for p in (ShapeParams(1.0, 10.0, 0.5, 3.0, 2.0, 1.0), ShapeParams(1.0, 1.0, 3.0, 1.0, 0.04, 1.0),
              ShapeParams(1.0, 5.0, 1.3, 0.6, 1.0, 1.0)):
        a = lcr(p, u)
        b = lcr(p, u, cfg=LcrConfig(quad_scheme="gauss_jacobi"))
        assert np.max(np.abs(a / b - 1)) < 1e-8


def test_limits_at_small_and_large_threshold():
    p = ShapeParams(1.0, 2.0, 1.0, 1.0, 0.5, 1.0)
    assert lcr(p, 1e-6) < 1e-5
    assert lcr(p, 6.0) < 1e-10


@pytest.mark.parametrize("kwargs", [dict(los_frac=0.5), dict(eta=0.0), dict(eta=math.inf)])
def test_domain(kwargs):
    base = dict(gbar=1.0, kappa=2.0, mu=1.0, m=1.0, eta=1.0, los_frac=1.0)
    base.update(kwargs)
    with pytest.raises(DomainError):
        lcr(ShapeParams(**base), 0.5)


def test_threshold_must_be_positive():
    with pytest.raises(DomainError):
        lcr(RAYLEIGH, 0.0)


def test_config_and_context_invariants():
    with pytest.raises(DomainError):
        LcrConfig(quad_points=8)
    with pytest.raises(DomainError):
        LcrConfig(quad_scheme="simpson")
    with pytest.raises(DomainError):
        DopplerContext(0.0)
    assert DopplerContext(3.0).rho_dd0 == pytest.approx(18 * math.pi ** 2)


def test_doubling_check_reports_unconverged_quadrature():
    p = ShapeParams(1.0, 200.0, 0.5, 0.5, 0.05, 1.0)
    with pytest.raises(ConvergenceError):
        lcr(p, 2.0, cfg=LcrConfig(quad_points=16, rel_tol=1e-14))


def test_unit_eta_needs_no_special_case():
    p = ShapeParams(1.0, 5.0, 2.0, 1.0, 1.0, 1.0)
    near = ShapeParams(1.0, 5.0, 2.0, 1.0, 1.0 + 1e-9, 1.0)
    u = np.geomspace(0.05, 2.5, 8)
    assert np.allclose(lcr(p, u), lcr(near, u), rtol=1e-7)


def test_deep_fade_trends():
    u = 10 ** (-30 / 20)
    base = dict(gbar=1.0, kappa=1.0, mu=1.0, m=1.0, eta=1.0, los_frac=1.0)
    at = lambda **kw: lcr(ShapeParams(**{**base, **kw}), u)
    assert at(mu=3.0) < at(mu=1.0)
    assert at(kappa=10.0) < at(kappa=1.0)
    assert at(eta=1.0) > at(eta=0.04)


@pytest.mark.parametrize("kappa, eta, m", [(1.0, 0.04, 1.0), (1.0, 1.0, 1.0), (10.0, 0.3, 2.0), (3.0, 4.0, 0.6)])
def test_deep_fade_duration_elliptic_asymptote(kappa, eta, m):
    # For one cluster the LoS factor cancels as u -> 0 and T(u)/u tends to
    # pi sqrt(2 pi) / integral_0^{2pi} sqrt(rho''(0) (sx2 cos^2 + sy2 sin^2)) dtheta,
    # a complete elliptic integral of the second kind.
    sx2 = eta / ((1 + eta) * (1 + kappa))
    sy2 = 1 / ((1 + eta) * (1 + kappa))
    lo, hi = sorted((sx2, sy2))
    perimeter = 4 * math.sqrt(hi) * ellipe(1 - lo / hi)
    limit = math.pi * math.sqrt(2 * math.pi) / (math.sqrt(2 * math.pi ** 2) * perimeter)
    u = 10 ** (-70 / 20)
    assert afd(ShapeParams(1.0, kappa, 1.0, m, eta, 1.0), u) / u == pytest.approx(limit, rel=1e-5)


@pytest.mark.parametrize("p", [ShapeParams(1.0, 5.0, 2.0, 1.0, 0.5, 1.0), ShapeParams(1.0, 1.0, 1.0, 1.0, 1.4, 1.0),
                               ShapeParams(1.0, 10.0, 3.0, 0.5, 0.04, 1.0)])
def test_single_interior_maximum(p, caplog):
    u = np.geomspace(1e-3, 4.0, 200)
    n = lcr(p, u)
    assert np.all(n >= 0)
    changes = np.count_nonzero(np.diff(np.sign(np.diff(n))) != 0)
    if changes > 1:
        logging.getLogger(__name__).warning("LCR has %d slope changes for %s", changes, p)
