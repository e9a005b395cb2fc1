"""Quadrature on [0, 1] for integrands with algebraic endpoint singularities."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError


def tanh_sinh_nodes(n: int, decay: float = 1.0):
    """Nodes ``x``, ``1 - x`` and weights of an ``n``-point tanh-sinh rule on [0, 1].

    ``x = 1 / (1 + exp(-pi sinh t))`` so both ``x`` and ``1 - x`` are formed
    without cancellation.  ``decay`` is the smallest endpoint exponent
    ``p`` for which ``x^(p-1)`` must be integrable; it sets the truncation
    of the ``t`` range so the discarded tails are below ~1e-16.
    """
    if n < 3:
        raise DomainError("n", "need at least 3 nodes")
    p = min(max(decay, 1e-3), 1.0)
    t_max = math.asinh(37.0 / (math.pi * p))
    t_max = min(t_max, math.asinh(700.0 / math.pi))
    t = np.linspace(-t_max, t_max, n)
    h = t[1] - t[0]
    u = math.pi * np.sinh(t)
    x = 1.0 / (1.0 + np.exp(-u))
    omx = 1.0 / (1.0 + np.exp(u))
    w = h * math.pi * np.cosh(t) * x * omx
    return x, omx, w


def tanh_sinh(integrand, n: int, decay: float = 1.0) -> float:
    """``integral_0^1 g(x) dx`` where ``integrand(x, 1 - x)`` evaluates ``g``."""
    x, omx, w = tanh_sinh_nodes(n, decay)
    keep = (x > 0) & (omx > 0)
    vals = integrand(x[keep], omx[keep])
    return float(np.dot(vals, w[keep]))


def gauss_jacobi(integrand, n: int, a: float) -> float:
    """``integral_0^1 x^a (1-x)^a g(x) dx``; ``integrand(x, 1 - x)`` evaluates ``g`` only."""
    if not a > -1:
        raise DomainError("a", "Jacobi exponent must exceed -1")
    y, w = roots_jacobi(n, a, a)
    x = 0.5 * (1.0 + y)
    omx = 0.5 * (1.0 - y)
    return float(np.dot(integrand(x, omx), w)) * 2.0 ** (-2.0 * a - 1.0)
