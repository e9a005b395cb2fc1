"""Special functions: log-gamma, Kummer's 1F1 and the modified Bessel function I.

Everything here works on real scalars.  ``log_kummer_1f1`` and ``bessel_ie``
return log-scaled / exponentially scaled values for arguments where the
plain functions overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

_EULER_GAMMA = 0.57721566490153286060651209
_HALF_LOG_2PI = 0.91893853320467274178032973

# B_2k / (2k (2k-1)) for the Stirling series.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_2k / (2k)! for the Euler-Maclaurin tail of zeta.
_EM = (1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0)


def _zeta_minus_one(k: int, n: int = 20) -> float:
    """``zeta(k) - 1`` for integer ``k >= 2`` by Euler-Maclaurin."""
    head = math.fsum(j ** -k for j in range(2, n))
    tail = n ** (1 - k) / (k - 1) + 0.5 * n ** -k
    rising = float(k)
    for j, c in enumerate(_EM, start=1):
        tail += c * rising * n ** (-k - 2 * j + 1)
        rising *= (k + 2 * j - 1) * (k + 2 * j)
    return head + tail


_ZETA_M1 = tuple(_zeta_minus_one(k) for k in range(2, 64))


def _log_gamma_1p(z: float) -> float:
    """``ln Gamma(1 + z)`` for ``|z| <= 0.5``, accurate near the zeros at z = 0, 1."""
    acc = 0.0
    zk = -z
    for k, zm1 in enumerate(_ZETA_M1, start=2):
        zk *= -z
        term = zm1 * zk / k
        acc += term
        if abs(term) < 1e-18 * max(abs(acc), 1e-300):
            break
    return (1.0 - _EULER_GAMMA) * z - math.log1p(z) + acc


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise DomainError("x", f"log_gamma needs x > 0, got {x}")
    if math.isinf(x):
        return math.inf
    if x == 1.0 or x == 2.0:
        return 0.0
    if x < 0.5:
        return _log_gamma_1p(x) - math.log(x)
    if x <= 1.5:
        return _log_gamma_1p(x - 1.0)
    if x <= 2.5:
        return math.log1p(x - 2.0) + _log_gamma_1p(x - 2.0)
    shift = 0.0
    if x < 15.0:
        prod = 1.0
        while x < 15.0:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    inv = 1.0 / x
    inv2 = inv * inv
    corr = 0.0
    for c in reversed(_STIRLING):
        corr = corr * inv2 + c
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + corr * inv - shift


@dataclass(frozen=True)
class Kummer1F1Config:
    series_max_terms: int = 500
    series_tol: float = 1e-13
    asymptotic_threshold: float = 50.0
    asymptotic_terms: int = 12

    def __post_init__(self):
        if self.series_max_terms < 1:
            raise DomainError("series_max_terms")
        if not self.series_tol > 0:
            raise DomainError("series_tol")
        if not self.asymptotic_threshold > 0:
            raise DomainError("asymptotic_threshold")


DEFAULT_1F1 = Kummer1F1Config()
_ASYMPTOTIC_TOL = 1e-9


def _nonpositive_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _series_log_terms(a, b, z, cfg):
    """Log of each term of the 1F1 series for a, b, z > 0 (all terms positive)."""
    logs = [0.0]
    cur = 0.0
    peak = 0.0
    logz = math.log(z)
    stop = math.log(cfg.series_tol) - 5.0
    for k in range(cfg.series_max_terms):
        cur += math.log((a + k) / ((b + k) * (k + 1))) + logz
        logs.append(cur)
        peak = max(peak, cur)
        ratio = (a + k + 1) * z / ((b + k + 1) * (k + 2))
        if ratio < 1.0 and cur - peak < stop:
            return logs
    raise ConvergenceError(f"1F1({a}; {b}; {z}) series did not converge in {cfg.series_max_terms} terms")


def _series_plain(a, b, z, cfg):
    terms = [1.0]
    t = 1.0
    for k in range(cfg.series_max_terms):
        if a + k == 0:
            return math.fsum(terms)
        t *= (a + k) / (b + k) * z / (k + 1)
        terms.append(t)
        s = math.fsum(terms)
        if abs(t) <= cfg.series_tol * abs(s) and abs((a + k + 1) * z / ((b + k + 1) * (k + 2))) < 1.0:
            return s
    raise ConvergenceError(f"1F1({a}; {b}; {z}) series did not converge in {cfg.series_max_terms} terms")


def _asymptotic_log(a, b, z, cfg):
    """Large-z expansion; returns log value or None if the truncated sum is not accurate."""
    terms = [1.0]
    t = 1.0
    exact = False
    for k in range(cfg.asymptotic_terms):
        t *= (b - a + k) * (1.0 - a + k) / ((k + 1) * z)
        if t == 0.0:
            exact = True
            break
        terms.append(t)
    s = math.fsum(terms)
    if not exact and (abs(terms[-1]) > _ASYMPTOTIC_TOL * 0.1 * abs(s) or s <= 0):
        return None
    return z + (a - b) * math.log(z) + log_gamma(b) - log_gamma(a) + math.log(s)


def log_kummer_1f1(a: float, b: float, z: float, cfg: Kummer1F1Config = DEFAULT_1F1) -> float:
    """``ln 1F1(a; b; z)`` for ``a > 0, b > 0, z >= 0``; does not overflow."""
    if not (a > 0 and b > 0):
        raise DomainError("a" if not a > 0 else "b", "log_kummer_1f1 needs a > 0 and b > 0")
    if z < 0:
        raise DomainError("z", f"z must be >= 0, got {z}")
    if z == 0:
        return 0.0
    if z > cfg.asymptotic_threshold:
        val = _asymptotic_log(a, b, z, cfg)
        if val is not None:
            return val
    logs = _series_log_terms(a, b, z, cfg)
    peak = max(logs)
    return peak + math.log(math.fsum(math.exp(v - peak) for v in logs))


def kummer_1f1(a: float, b: float, z: float, cfg: Kummer1F1Config = DEFAULT_1F1) -> float:
    """Confluent hypergeometric function ``1F1(a; b; z)`` for real ``z >= 0``.

    Below ``cfg.asymptotic_threshold`` the Taylor series is summed with
    ``math.fsum``; above it the leading large-z expansion
    ``e^z z^(a-b) Gamma(b)/Gamma(a) sum_k (b-a)_k (1-a)_k / (k! z^k)`` is used
    when its truncation error is small enough, otherwise the series again.

    Raises
    ------
    DomainError
        ``b`` a non-positive integer or ``z < 0``.
    ConvergenceError
        Neither regime reaches tolerance within its term budget.
    """
    a, b, z = float(a), float(b), float(z)
    if _nonpositive_int(b):
        raise DomainError("b", f"b must not be a non-positive integer, got {b}")
    if z < 0:
        raise DomainError("z", f"z must be >= 0, got {z}")
    if z == 0 or a == 0:
        return 1.0
    if a > 0 and b > 0:
        return math.exp(log_kummer_1f1(a, b, z, cfg))
    return _series_plain(a, b, z, cfg)


def _bessel_log_series(nu, z):
    """``ln I_nu(z)`` from the power series; terms are positive so no cancellation."""
    logq = 2.0 * math.log(0.5 * z)
    logs = [0.0]
    cur = 0.0
    k = 0
    while True:
        cur += logq - math.log((k + 1) * (nu + k + 1))
        logs.append(cur)
        k += 1
        if cur < max(logs) - 40.0 and 0.25 * z * z < (k + 1) * (nu + k + 1):
            break
        if k > 200000:
            raise ConvergenceError(f"I_{nu}({z}) series did not converge")
    peak = max(logs)
    total = math.log(math.fsum(math.exp(v - peak) for v in logs)) + peak
    return nu * math.log(0.5 * z) - log_gamma(nu + 1.0) + total


def _bessel_asymptotic_scaled(nu, z, max_terms=40, tol=1e-12):
    """``e^-z I_nu(z)`` from the large-argument expansion, or None if inaccurate."""
    mu4 = 4.0 * nu * nu
    terms = [1.0]
    t = 1.0
    for k in range(1, max_terms):
        t *= -(mu4 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if t == 0.0:
            break
        if abs(t) > abs(terms[-1]):
            return None
        terms.append(t)
        if abs(t) < tol:
            break
    else:
        return None
    return math.fsum(terms) / math.sqrt(2.0 * math.pi * z)


def bessel_ie(nu: float, z: float) -> float:
    """Exponentially scaled modified Bessel function ``e^-z I_nu(z)``."""
    nu, z = float(nu), float(z)
    if nu < 0:
        raise DomainError("nu", f"nu must be >= 0, got {nu}")
    if z < 0:
        raise DomainError("z", f"z must be >= 0, got {z}")
    if z == 0:
        return 1.0 if nu == 0 else 0.0
    if z > max(30.0, 2.0 * nu * nu):
        val = _bessel_asymptotic_scaled(nu, z)
        if val is not None:
            return val
    return math.exp(_bessel_log_series(nu, z) - z)


def bessel_i(nu: float, z: float) -> float:
    """Modified Bessel function of the first kind ``I_nu(z)`` for ``nu, z >= 0``."""
    val = bessel_ie(nu, z)
    return val * math.exp(z) if val else val
