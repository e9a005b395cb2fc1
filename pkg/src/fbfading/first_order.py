"""First-order statistics of the Fluctuating Beckmann distribution.

The MGF is written per quadrature branch.  With ``x = gbar * s``,
``d = mu (1 + kappa)`` and the diffuse weights ``w_x, w_y``::

    f_x = 1 - 2 w_x x / d          f_y = 1 - 2 w_y x / d
    L   = kappa / (1 + kappa) * x * (t / f_x + (1 - t) / f_y)
    M   = f_x^(-mu/2) f_y^(-mu/2) (1 - L / m)^(-m)

which is the closed form in the usual ``(kappa, mu, m, eta, rho)`` notation
rearranged so that ``eta = 0`` and ``eta = inf`` need no special casing.
PDF and CDF come from numerical inversion of ``M(-s)`` and ``M(-s) / s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, DomainError, NumericalError
from .laplace import DEFAULT_INVERSION, InversionConfig, invert
from .params import ShapeParams, factorize, validate
from .special import log_gamma

#: Negative inversion noise smaller than this (in gbar-normalized units) is zeroed.
NEGATIVE_NOISE = 1e-9
#: Smallest evaluation point relative to gbar; the t -> 0 value follows by continuity.
MIN_REL_ARG = 1e-8


@dataclass(frozen=True)
class EvalGrid:
    """Strictly increasing positive abscissae, spaced linearly or in dB."""

    points: tuple
    scale: str = "linear"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("points", "grid must be a non-empty 1-D sequence")
        if np.any(pts <= 0):
            raise DomainError("points", "grid points must be > 0")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("points", "grid points must be strictly increasing")
        if self.scale not in ("linear", "dB"):
            raise DomainError("scale")

    @classmethod
    def build(cls, lo: float, hi: float, n: int, scale: str = "linear") -> "EvalGrid":
        if n < 1:
            raise DomainError("n")
        if scale == "dB":
            if lo <= 0 or hi <= 0:
                raise DomainError("grid", "dB-spaced grids need positive endpoints")
            pts = np.geomspace(lo, hi, n)
        else:
            pts = np.linspace(lo, hi, n)
        return cls(tuple(float(p) for p in pts), scale)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)


def _mgf_parts(params: ShapeParams, x):
    """Return the three MGF factor bases ``f_x, f_y, 1 - L/m`` at ``x = gbar*s``."""
    wx, wy = params.eta_weights()
    d = params.mu * (1.0 + params.kappa)
    fx = 1.0 - 2.0 * wx * x / d
    fy = 1.0 - 2.0 * wy * x / d
    if params.kappa == 0:
        return fx, fy, None
    t = params.los_frac
    los = (params.kappa / (1.0 + params.kappa)) * x
    los = los * (t / fx if t > 0 else 0.0) + los * ((1.0 - t) / fy if t < 1 else 0.0)
    return fx, fy, 1.0 - los / params.m


def _mgf_from_parts(params, fx, fy, bracket):
    half = -0.5 * params.mu
    out = fx ** half * fy ** half
    if bracket is not None:
        out = out * bracket ** (-params.m)
    return out


def singularity_bound(params: ShapeParams) -> float:
    """Smallest real part among the MGF singularities (``s``-units)."""
    fac = factorize(params)
    roots = [r for r in (fac.c1, fac.c2, fac.delta1, fac.delta2) if r is not None]
    return min(r.real for r in roots) / params.gbar


def mgf(params: ShapeParams, s):
    """Moment generating function ``E[exp(s gamma)]``.

    ``s`` may be a real or complex scalar or array with ``Re(s)`` below the
    nearest singularity.  Real input gives real output; ``mgf(p, 0) == 1``.
    """
    params = validate(params)
    arr = np.asarray(s)
    is_real = not np.iscomplexobj(arr)
    if np.any(arr.real >= singularity_bound(params)):
        raise DomainError("s", "s lies at or beyond an MGF singularity")
    x = params.gbar * arr.astype(complex)
    out = _mgf_from_parts(params, *_mgf_parts(params, x))
    if is_real:
        out = out.real
    return out.item() if out.ndim == 0 else out


def laplace_image(params: ShapeParams, cdf: bool = False):
    """``s -> M(-s)`` (density) or ``s -> M(-s)/s`` (distribution) for inversion.

    The returned callable checks that every factor base has positive real
    part, i.e. the principal branch is continuous along the contour.
    """
    params = validate(params)

    def image(s):
        fx, fy, bracket = _mgf_parts(params, -params.gbar * s)
        bases = [fx, fy] if bracket is None else [fx, fy, bracket]
        for b in bases:
            if np.any(np.real(b) <= 0):
                raise NumericalError("MGF factor left the right half-plane on the contour")
        out = _mgf_from_parts(params, fx, fy, bracket)
        return out / s if cdf else out

    return image


def _normalized(params):
    return params.with_gbar(1.0)


def _prepare(params, x):
    params = validate(params)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("gamma", "evaluation points must be > 0")
    rel = np.maximum(x / params.gbar, MIN_REL_ARG)
    return params, scalar, x, rel


def pdf_snr(params: ShapeParams, gamma, cfg: InversionConfig = DEFAULT_INVERSION):
    """Density of the instantaneous SNR, by inversion of ``M(-s)``."""
    params, scalar, _, rel = _prepare(params, gamma)
    f = invert(laplace_image(_normalized(params)), rel, cfg)
    if np.any(f < -NEGATIVE_NOISE):
        raise NumericalError(f"inverted density is negative ({f.min():.3g}); check the configuration")
    f = np.where(f < 0, 0.0, f) / params.gbar
    return float(f[0]) if scalar else f


def cdf_snr(params: ShapeParams, gamma, cfg: InversionConfig = DEFAULT_INVERSION):
    """Distribution function of the SNR, by inversion of ``M(-s) / s``.

    Values are clipped to ``[0, 1]`` and, across the points of one call,
    made non-decreasing (a running maximum in sorted order) so that
    inversion noise cannot produce a decreasing step.
    """
    params, scalar, x, rel = _prepare(params, gamma)
    F = invert(laplace_image(_normalized(params), cdf=True), rel, cfg)
    F = np.clip(F, 0.0, 1.0)
    if F.size > 1:
        order = np.argsort(x, kind="stable")
        F[order] = np.maximum.accumulate(F[order])
    return float(F[0]) if scalar else F


def pdf_envelope(params: ShapeParams, r, omega: float = 1.0, cfg: InversionConfig = DEFAULT_INVERSION):
    """Envelope density ``2 r f_gamma(r^2)`` with ``gbar`` replaced by ``omega = E[R^2]``."""
    r = np.asarray(r, dtype=float)
    return 2.0 * r * pdf_snr(validate(params).with_gbar(omega), r * r, cfg)


def cdf_envelope(params: ShapeParams, r, omega: float = 1.0, cfg: InversionConfig = DEFAULT_INVERSION):
    r = np.asarray(r, dtype=float)
    return cdf_snr(validate(params).with_gbar(omega), r * r, cfg)


def tail_bound(params: ShapeParams, x: float) -> float:
    """Chernoff bound on ``P(gamma > x)``: ``min_{s>0} M(s) e^(-s x)``."""
    from scipy.optimize import minimize_scalar

    params = validate(params)
    hi = singularity_bound(params)

    def log_bound(u):
        s = hi * u
        return math.log(mgf(params, s)) - s * x

    res = minimize_scalar(log_bound, bounds=(0.0, 1.0 - 1e-12), method="bounded",
                          options={"xatol": 1e-10})
    return min(1.0, math.exp(min(res.fun, 0.0)))


@lru_cache(maxsize=64)
def _laguerre_rule(n: int, alpha: float):
    """Generalized Gauss-Laguerre nodes and weights normalized to sum to 1 (Golub-Welsch)."""
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    nodes, vecs = eigh_tridiagonal(diag, off)
    weights = vecs[0, :] ** 2
    return nodes, weights / weights.sum()


def mgf_via_conditional_average(params: ShapeParams, s, quad_nodes: int = 64, max_nodes: int = 2048):
    """MGF as the average of the LoS-conditioned MGF over the Nakagami fluctuation.

    Given ``xi``, the LoS term enters as ``exp(xi^2 L)``.  With
    ``u = m xi^2 ~ Gamma(m, 1)`` the average is a generalized Gauss-Laguerre
    sum with weight ``u^(m-1) e^-u``.  The node count doubles until two
    consecutive rules agree.
    """
    params = validate(params)
    if quad_nodes < 64:
        raise DomainError("quad_nodes", "quad_nodes must be >= 64")
    arr = np.asarray(s)
    is_real = not np.iscomplexobj(arr)
    if np.any(arr.real >= singularity_bound(params)):
        raise DomainError("s", "s lies at or beyond an MGF singularity")
    x = params.gbar * arr.astype(complex)
    fx, fy, bracket = _mgf_parts(params, x)
    diffuse = _mgf_from_parts(params, fx, fy, None)
    if bracket is None:
        out = diffuse
    else:
        los = (1.0 - bracket) * params.m

        def average(n):
            u, w = _laguerre_rule(n, float(params.m - 1.0))
            return np.exp(np.multiply.outer(los / params.m, u)) @ w

        n = quad_nodes
        prev = average(n)
        while True:
            n *= 2
            cur = average(n)
            gap = np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300))
            if gap <= 1e-12 or n >= max_nodes:
                break
            prev = cur
        if gap > 1e-8:
            raise ConvergenceError(f"conditional average not converged (gap {gap:.2e} at {n} nodes)")
        out = diffuse * cur
    if is_real:
        out = out.real
    return out.item() if np.ndim(out) == 0 else out


def phi2_series_oracle(exponents, denominator: float, args, max_order: int = 30) -> float:
    """Truncated confluent Lauricella series ``Phi2^(n)(b_1..b_n; c; x_1..x_n)``.

    Sums ``prod (b_i)_{k_i} x_i^{k_i} / k_i! / (c)_{|k|}`` over all multi-indices
    of total order ``|k| <= max_order``.  Terms are grouped by total order: the
    order-N shell numerator is the ``z^N`` coefficient of ``prod (1 - x_i z)^(-b_i)``,
    built by power-series convolution.  Test oracle for small arguments only.
    """
    b = [float(v) for v in exponents]
    xs = [complex(v) for v in args]
    if len(b) != len(xs):
        raise DomainError("args", "exponents and args must have equal length")
    if max_order > 30 or max_order < 1:
        raise DomainError("max_order", "max_order must lie in [1, 30]")
    if sum(abs(v) for v in xs) >= 5.0:
        raise DomainError("args", "sum of |args| must be < 5 for the truncated series")
    coeffs = np.zeros(max_order + 1, dtype=complex)
    coeffs[0] = 1.0
    for bi, xi in zip(b, xs):
        factor = np.empty(max_order + 1, dtype=complex)
        factor[0] = 1.0
        for k in range(max_order):
            factor[k + 1] = factor[k] * (bi + k) * xi / (k + 1)
        coeffs = np.convolve(coeffs, factor)[: max_order + 1]
    poch = np.ones(max_order + 1)
    for k in range(max_order):
        poch[k + 1] = poch[k] * (denominator + k)
    shells = coeffs / poch
    total = shells.sum()
    if abs(shells[-1]) > 1e-10 * abs(total):
        raise ConvergenceError("last shell of the truncated series is not negligible")
    return float(total.real)


def _phi2_assembly(params: ShapeParams, gamma: float, denominator: float, max_order: int) -> float:
    params = validate(params)
    fac = factorize(params)
    if None in (fac.c1, fac.c2, fac.delta1, fac.delta2):
        raise DomainError("eta", "series assembly needs both quadratics non-degenerate")
    mu, m, g = params.mu, params.m, params.gbar
    scale = -gamma / g
    exps = (mu / 2, mu / 2, -m, -m, m, m)
    args = (scale * fac.c1, scale * fac.c2, scale * fac.c1, scale * fac.c2,
            scale * fac.delta1, scale * fac.delta2)
    series = phi2_series_oracle(exps, denominator, args, max_order)
    log_pref = ((m - mu / 2) * math.log(fac.alpha2) - m * math.log(fac.alpha1)
                + (denominator - 1) * math.log(gamma) - mu * math.log(g) - log_gamma(denominator))
    return math.exp(log_pref) * series


def pdf_snr_series(params: ShapeParams, gamma: float, max_order: int = 30) -> float:
    """SNR density from the ``Phi2^(6)`` series; valid for small ``gamma / gbar`` only.

    The ``alpha1`` roots (``delta``) carry exponent ``+m`` in the series and the
    ``alpha2`` roots (``c``) carry ``-m``, matching ``M = D^(m-mu/2) N^(-m)``.
    """
    return _phi2_assembly(params, gamma, params.mu, max_order)


def cdf_snr_series(params: ShapeParams, gamma: float, max_order: int = 30) -> float:
    return _phi2_assembly(params, gamma, params.mu + 1.0, max_order)
