"""Symbol error probability over fluctuating Beckmann fading.

Both schemes have AWGN error kernels that are sums of exponentials in the
SNR, so the average over fading is a finite combination of MGF values:

* DBPSK: ``P = 1/2 M(-1)``
* noncoherent orthogonal M-FSK:
  ``P = sum_{n=1}^{M-1} (-1)^(n+1) C(M-1, n) / (n+1) M(-n/(n+1))``

Every public function evaluates an explicit closed form written directly in
the shape parameters and checks it against :func:`fbfading.first_order.mgf`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, NumericalError
from .first_order import mgf
from .montecarlo import RngSpec, sample_power
from .params import ShapeParams, to_physical, validate

ROUTE_TOL = 1e-12
CANCELLATION_TOL = 1e-10
MAX_M_ARY = 64
_EPS = np.finfo(float).eps


class Scheme(str, enum.Enum):
    DBPSK = "dbpsk"
    MFSK = "mfsk"


@dataclass(frozen=True)
class SepQuery:
    """A modulation scheme, its order (M-FSK only) and a sweep of mean SNRs."""

    scheme: Scheme
    m_ary: int = 2
    gbar_grid: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.m_ary < 2:
            raise DomainError("m_ary", "M must be >= 2")
        grid = tuple(float(g) for g in np.atleast_1d(self.gbar_grid))
        if not grid or any(not g > 0 for g in grid):
            raise DomainError("gbar_grid", "mean SNRs must be > 0")
        object.__setattr__(self, "gbar_grid", grid)

    def evaluate(self, params: ShapeParams) -> np.ndarray:
        if self.scheme is Scheme.DBPSK:
            return np.array([sep_dbpsk(params.with_gbar(g)) for g in self.gbar_grid])
        return np.array([sep_mfsk_noncoherent(params.with_gbar(g), self.m_ary) for g in self.gbar_grid])


def _explicit_mgf_neg(p: ShapeParams, y: float) -> float:
    """``M(-y)`` for ``y >= 0`` written out term by term (no shared code with ``mgf``)."""
    # Numerators and denominators divided by (1 + eta) so eta = inf is allowed.
    k, mu, m, t = p.kappa, p.mu, p.m, p.los_frac
    wx, wy = p.eta_weights()
    g = p.gbar * y
    base = mu * (1 + k)
    diffuse = (1 + 2 * wx * g / base) ** (-mu / 2) * (1 + 2 * wy * g / base) ** (-mu / 2)
    los = (mu * k * t * g / (base + 2 * wx * g)
           + mu * k * (1 - t) * g / (base + 2 * wy * g))
    return diffuse * (1 + los / m) ** (-m)


def _check_routes(a: float, b: float, slack: float = 0.0) -> None:
    if abs(a - b) > ROUTE_TOL * abs(a) + slack:
        raise NumericalError(f"closed form {a!r} and MGF route {b!r} disagree")


def sep_dbpsk(params: ShapeParams) -> float:
    """Average DBPSK symbol error probability ``1/2 M(-1)``, in ``[0, 1/2]``."""
    p = validate(params)
    explicit = 0.5 * _explicit_mgf_neg(p, 1.0)
    _check_routes(explicit, 0.5 * float(mgf(p, -1.0)))
    return explicit


def mfsk_weights(M: int) -> np.ndarray:
    """Signed weights ``(-1)^(n+1) C(M-1, n) / (n+1)`` for ``n = 1..M-1``.

    Binomials are exact integers, so each weight is correctly rounded.
    """
    if not (isinstance(M, (int, np.integer)) and M >= 2):
        raise DomainError("M", "M must be an integer >= 2")
    if M > MAX_M_ARY:
        raise DomainError("M", f"M must be <= {MAX_M_ARY}")
    return np.array([(-1.0) ** (n + 1) * float(math.comb(M - 1, n)) / (n + 1) for n in range(1, M)])


def _exact_weights(M: int):
    return [Fraction((-1) ** (n + 1) * math.comb(M - 1, n), n + 1) for n in range(1, M)]


def _alternating_sum(M: int, values) -> float:
    """Correctly rounded ``sum w_n v_n`` with exact rational weights.

    Raises if the error bound inherited from the values exceeds ``CANCELLATION_TOL``.
    """
    weights = _exact_weights(M)
    total = float(sum(w * Fraction(v) for w, v in zip(weights, values)))
    bound = 16 * _EPS * math.fsum(abs(float(w)) * abs(v) for w, v in zip(weights, values))
    if bound > CANCELLATION_TOL * abs(total):
        raise NumericalError(
            f"alternating sum lost too much precision (error bound {bound:.2e} vs value {total:.2e})")
    return total


def sep_mfsk_noncoherent(params: ShapeParams, M: int) -> float:
    """Average SEP of orthogonal M-FSK with noncoherent detection, in ``[0, (M-1)/M]``.

    Raises
    ------
    DomainError
        ``M < 2`` or ``M > 64``.
    NumericalError
        The alternating sum cancels beyond ``1e-10`` relative accuracy
        (grows like ``2^M / M`` at low SNR).
    """
    p = validate(params)
    w = mfsk_weights(M)
    ys = np.arange(1, M) / np.arange(2, M + 1)
    explicit = [_explicit_mgf_neg(p, y) for y in ys]
    a = _alternating_sum(M, explicit)
    b = math.fsum(w * np.asarray(mgf(p, -ys), dtype=float))
    _check_routes(a, b, 16 * _EPS * math.fsum(abs(w) * np.abs(explicit)))
    return a


def awgn_kernel(scheme, snr, M: int = 2):
    """Conditional symbol error probability at instantaneous SNR ``snr``."""
    snr = np.asarray(snr, dtype=float)
    if Scheme(scheme) is Scheme.DBPSK:
        return 0.5 * np.exp(-snr)
    w = mfsk_weights(M)
    out = np.zeros_like(snr)
    for n, wi in enumerate(w, start=1):
        out += wi * np.exp(-n / (n + 1) * snr)
    return out


def sep_monte_carlo(params: ShapeParams, scheme, M: int = 2, n: int = 10 ** 7,
                    rng: RngSpec = RngSpec(), gbar_grid=None):
    """Average the AWGN kernel over ``n`` simulated SNR draws.

    The draws are made once at unit mean and rescaled for every entry of
    ``gbar_grid`` (default ``params.gbar``), so points share random numbers.
    Returns ``(estimate, standard_error)`` arrays.  Needs integer ``mu``.
    """
    p = validate(params)
    grid = np.atleast_1d(np.asarray(p.gbar if gbar_grid is None else gbar_grid, dtype=float))
    unit = sample_power(to_physical(p.with_gbar(1.0), omega=1.0), n, rng)
    est, se = np.empty(grid.size), np.empty(grid.size)
    for i, g in enumerate(grid):
        v = awgn_kernel(scheme, g * unit, M)
        est[i] = v.mean()
        se[i] = v.std(ddof=1) / math.sqrt(n)
    return est, se
