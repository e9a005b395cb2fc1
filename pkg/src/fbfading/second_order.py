"""Level crossing rate and average fade duration of the envelope for rho -> inf.

Thresholds ``u`` are envelope values normalized to the RMS level
(``Omega = E[R^2] = 1``).  The rate is

    N(u) = P * u^(2mu-1) * exp(-mu/2 (1+eta)(1+kappa) u^2)
           * integral_0^1 sqrt(1 + (eta-1) x) [x (1-x)]^(mu/2-1)
             exp(-B u^2 x) 1F1(m; mu/2; A u^2 x) dx

with ``B = mu (1-eta^2)(1+kappa) / (2 eta)`` and
``A = [kappa mu^2 (1+eta)^2 (1+kappa) / (4 eta^2)] / [mu kappa (1+eta) / (2 eta) + m]``.
The integral is evaluated in log space so that the exponential growth of
``1F1`` and the Gaussian decay never overflow separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConvergenceError, DomainError
from .first_order import cdf_envelope
from .laplace import DEFAULT_INVERSION, InversionConfig
from .params import ShapeParams, validate
from .quadrature import tanh_sinh_nodes
from .special import Kummer1F1Config, log_gamma, log_kummer_1f1

_KUMMER = Kummer1F1Config(series_max_terms=20000)


@dataclass(frozen=True)
class DopplerContext:
    """Maximum Doppler shift ``fd`` (Hz) and ``-rho''(0)`` of the diffuse autocorrelation.

    ``rho_dd0`` defaults to the isotropic-scattering value ``2 pi^2 fd^2``.
    """

    fd: float = 1.0
    rho_dd0: float | None = None

    def __post_init__(self):
        if not self.fd > 0:
            raise DomainError("fd", "Doppler shift must be > 0")
        if self.rho_dd0 is None:
            object.__setattr__(self, "rho_dd0", 2.0 * math.pi ** 2 * self.fd ** 2)
        if not self.rho_dd0 > 0:
            raise DomainError("rho_dd0")


@dataclass(frozen=True)
class LcrConfig:
    quad_scheme: str = "tanh_sinh"
    quad_points: int = 200
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.quad_scheme not in ("tanh_sinh", "gauss_jacobi"):
            raise DomainError("quad_scheme")
        if self.quad_points < 16:
            raise DomainError("quad_points", "quad_points must be >= 16")


DEFAULT_LCR = LcrConfig()


def _check(params: ShapeParams) -> ShapeParams:
    params = validate(params)
    if params.los_frac != 1.0:
        raise DomainError("los_frac", "the closed-form LCR needs rho = inf (los_frac = 1)")
    if params.eta == 0 or math.isinf(params.eta):
        raise DomainError("eta", "the closed-form LCR needs 0 < eta < inf")
    return params


def _log_prefactor(p: ShapeParams, ctx: DopplerContext) -> float:
    k, mu, m, eta = p.kappa, p.mu, p.m, p.eta
    return (m * math.log(m)
            + (mu - 0.5) * math.log(mu * (1 + eta) * (1 + k))
            + 0.5 * math.log(ctx.rho_dd0)
            - (mu - 1) * math.log(2.0)
            - 2.0 * log_gamma(mu / 2)
            - 0.5 * mu * math.log(eta)
            - m * math.log(mu * k * (1 + eta) / (2 * eta) + m)
            - 0.5 * math.log(2 * math.pi))


def _log_integral(p: ShapeParams, u: float, cfg: LcrConfig, n: int) -> float:
    k, mu, m, eta = p.kappa, p.mu, p.m, p.eta
    u2 = u * u
    slope = mu * (1 - eta * eta) * (1 + k) / (2 * eta) * u2
    arg = (k * mu * mu * (1 + eta) ** 2 * (1 + k) / (4 * eta * eta)) / (mu * k * (1 + eta) / (2 * eta) + m) * u2
    a = mu / 2 - 1
    if cfg.quad_scheme == "tanh_sinh":
        x, omx, w = tanh_sinh_nodes(n, decay=mu / 2)
        keep = (x > 0) & (omx > 0) & (w > 0)
        x, omx, w = x[keep], omx[keep], w[keep]
        logw = np.log(w) + a * (np.log(x) + np.log(omx))
    else:
        y, w = roots_jacobi(n, a, a)
        x, omx = 0.5 * (1 + y), 0.5 * (1 - y)
        logw = np.log(w) - (2 * a + 1) * math.log(2.0)
    kum = np.array([log_kummer_1f1(m, mu / 2, arg * xi, _KUMMER) if arg > 0 else 0.0 for xi in x])
    logs = logw + 0.5 * np.log1p((eta - 1) * x) - slope * x + kum
    peak = logs.max()
    return peak + math.log(np.exp(logs - peak).sum())


def log_lcr(params: ShapeParams, u: float, ctx: DopplerContext = DopplerContext(),
            cfg: LcrConfig = DEFAULT_LCR) -> float:
    """Natural log of the level crossing rate; see :func:`lcr`."""
    p = _check(params)
    u = float(u)
    if not u > 0:
        raise DomainError("u", "threshold must be > 0")
    outer = (_log_prefactor(p, ctx) + (2 * p.mu - 1) * math.log(u)
             - 0.5 * p.mu * (1 + p.eta) * (1 + p.kappa) * u * u)
    first = _log_integral(p, u, cfg, cfg.quad_points)
    second = _log_integral(p, u, cfg, 2 * cfg.quad_points)
    if abs(math.expm1(first - second)) > cfg.rel_tol:
        raise ConvergenceError(
            f"LCR quadrature not converged at u={u:g}: {cfg.quad_points} vs {2 * cfg.quad_points} points "
            f"differ by {abs(math.expm1(first - second)):.2e}")
    return outer + second


def lcr(params: ShapeParams, u, ctx: DopplerContext = DopplerContext(), cfg: LcrConfig = DEFAULT_LCR):
    """Upward level crossings per second of the RMS-normalized envelope.

    Requires ``los_frac == 1`` (all LoS power in the in-phase branch) and
    ``0 < eta < inf``; any ``kappa == 0`` input qualifies after validation.
    ``u`` may be a scalar or an array of thresholds.
    """
    scalar = np.ndim(u) == 0
    us = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.array([math.exp(log_lcr(params, ui, ctx, cfg)) for ui in us])
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class AfdResult:
    """AFD values with a mask of thresholds where the crossing rate underflowed."""

    afd: np.ndarray
    underflow: np.ndarray
    cdf: np.ndarray
    lcr: np.ndarray


def afd_curve(params: ShapeParams, u, ctx: DopplerContext = DopplerContext(), cfg: LcrConfig = DEFAULT_LCR,
              inv_cfg: InversionConfig = DEFAULT_INVERSION) -> AfdResult:
    """``T(u) = F_R(u) / N(u)`` on a threshold array; ``inf`` plus a flag where ``N`` underflows."""
    p = _check(params)
    us = np.atleast_1d(np.asarray(u, dtype=float))
    n = lcr(p, us, ctx, cfg)
    F = np.atleast_1d(cdf_envelope(p, us, 1.0, inv_cfg))
    under = n <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(under, math.inf, F / np.where(under, 1.0, n))
    return AfdResult(t, under, F, n)


def afd(params: ShapeParams, u, ctx: DopplerContext = DopplerContext(), cfg: LcrConfig = DEFAULT_LCR,
        inv_cfg: InversionConfig = DEFAULT_INVERSION):
    """Average fade duration in seconds below the normalized threshold ``u``.

    Returns ``inf`` where the crossing rate underflows; use :func:`afd_curve`
    to get the underflow mask.
    """
    res = afd_curve(params, u, ctx, cfg, inv_cfg)
    return float(res.afd[0]) if np.ndim(u) == 0 else res.afd
