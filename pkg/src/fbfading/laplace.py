"""Numerical inverse Laplace transform by Euler summation of the Bromwich integral.

The Bromwich integral along ``Re(s) = A / (2t)`` is discretized with the
trapezoidal rule at spacing ``pi / t`` (Abate-Whitt), which gives the
alternating series::

    f(t) ~ e^(A/2) / t * [ Re F(A/2t) / 2 + sum_k (-1)^k Re F((A + 2 pi i k) / 2t) ]

with discretization error about ``e^-A``.  The tail of the series is
accelerated with a binomial (Euler) average of ``euler_m + 1`` consecutive
partial sums starting at ``euler_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError


@dataclass(frozen=True)
class InversionConfig:
    euler_m: int = 20
    euler_n: int = 25
    precision_decimals: float = 12.0
    max_arg: float = math.inf

    def __post_init__(self):
        if self.euler_m < 1:
            raise DomainError("euler_m")
        if self.euler_n < self.euler_m:
            raise DomainError("euler_n", "euler_n must be >= euler_m")
        if not 4 <= self.precision_decimals <= 15:
            raise DomainError("precision_decimals", "precision_decimals must lie in [4, 15]")

    @property
    def A(self) -> float:
        return self.precision_decimals * math.log(10.0)

    def abscissa(self, t):
        """Real part of the Bromwich contour used for evaluation point ``t``."""
        return self.A / (2.0 * np.asarray(t, dtype=float))


DEFAULT_INVERSION = InversionConfig()


def _binomial_weights(m: int) -> np.ndarray:
    w = np.array([math.comb(m, j) for j in range(m + 1)], dtype=float)
    return w / 2.0 ** m


def contour_nodes(t, cfg: InversionConfig = DEFAULT_INVERSION) -> np.ndarray:
    """Complex evaluation points, shape ``t.shape + (euler_n + euler_m + 1,)``."""
    t = np.asarray(t, dtype=float)
    k = np.arange(cfg.euler_n + cfg.euler_m + 1)
    return (cfg.A + 2j * math.pi * k) / (2.0 * t[..., None])


def invert(image, t, cfg: InversionConfig = DEFAULT_INVERSION):
    """Evaluate ``f(t)`` from its Laplace transform ``F``.

    Parameters
    ----------
    image : callable
        Vectorized ``F``; receives a complex ndarray of contour points with
        positive real part and returns an array of the same shape.
    t : float or array_like
        Evaluation points, all ``> 0``.
    cfg : InversionConfig

    Returns
    -------
    float or ndarray
        Same shape as ``t``.

    Raises
    ------
    NumericalError
        Non-finite image values, or Euler averages that fail to settle.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(t > 0)):
        raise DomainError("t", "inversion points must be > 0")
    if np.any(t > cfg.max_arg):
        raise DomainError("t", f"inversion point exceeds max_arg={cfg.max_arg}")

    s = contour_nodes(t, cfg)
    values = np.asarray(image(s))
    if values.shape != s.shape:
        raise NumericalError(f"image returned shape {values.shape}, expected {s.shape}")
    if not np.all(np.isfinite(values)):
        raise NumericalError("non-finite Laplace image value on the contour")

    terms = values.real.copy()
    terms[..., 0] *= 0.5
    terms[..., 1::2] *= -1.0
    partial = np.cumsum(terms, axis=-1)

    n, m = cfg.euler_n, cfg.euler_m
    w = _binomial_weights(m)
    scale = math.exp(0.5 * cfg.A) / t
    est = scale * (partial[..., n:n + m + 1] @ w)
    prev = scale * (partial[..., n - 1:n + m] @ w)
    if not np.all(np.isfinite(est)):
        raise NumericalError("inversion overflowed")
    drift = np.abs(est - prev)
    bound = 1e-4 * np.maximum(1.0, np.abs(est))
    if np.any(drift > bound):
        bad = int(np.argmax(drift / bound))
        raise NumericalError(
            f"Euler averages did not settle at t={t[bad]:.6g} (drift {drift[bad]:.3g})"
        )
    return float(est[0]) if scalar else est
