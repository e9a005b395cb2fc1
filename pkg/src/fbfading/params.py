"""Fluctuating Beckmann parameterization.

The model is described by a mean SNR ``gbar`` and five shape parameters
``kappa, mu, m, eta, rho``.  The LoS imbalance ``rho**2 = p**2 / q**2`` is
stored as ``los_frac = rho**2 / (1 + rho**2) = p**2 / (p**2 + q**2)`` so that
both ``rho = 0`` and ``rho = inf`` are representable exactly.

The diffuse imbalance is handled the same way internally: with
``w_x = eta / (1 + eta)`` and ``w_y = 1 / (1 + eta)`` (``w_x = 1`` for
``eta = inf``) every formula stays finite at both extremes.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace

from .errors import DomainError

#: Surrogate for the ``m -> inf`` rows of the reduction table.  The MGF error
#: relative to the limit is about ``A**2 / (2 * M_LARGE)`` where ``A`` is the
#: (bounded) LoS exponent, i.e. below 1e-3 whenever ``|A| < 10``.
M_LARGE = 5.0e4


@dataclass(frozen=True)
class ShapeParams:
    """Mean SNR plus the five shape parameters of the model.

    Attributes
    ----------
    gbar : float
        Mean SNR (linear).
    kappa : float
        Total LoS power over total diffuse power.
    mu : float
        Cluster count; real-valued except for the samplers.
    m : float
        Nakagami shape of the LoS fluctuation.
    eta : float
        Diffuse in-phase/quadrature power ratio, may be ``inf``.
    los_frac : float
        ``rho**2 / (1 + rho**2)``; 1 encodes ``rho = inf``.
    """

    gbar: float = 1.0
    kappa: float = 0.0
    mu: float = 1.0
    m: float = 1.0
    eta: float = 1.0
    los_frac: float = 0.5

    @classmethod
    def from_rho(cls, gbar=1.0, kappa=0.0, mu=1.0, m=1.0, eta=1.0, rho=1.0):
        """Build from the LoS amplitude ratio ``rho = p / q`` (``inf`` allowed)."""
        return cls(gbar, kappa, mu, m, eta, rho_to_los_frac(rho))

    @property
    def rho(self) -> float:
        return los_frac_to_rho(self.los_frac)

    @property
    def inert_fields(self) -> tuple:
        """Fields that cannot influence any statistic for these parameters."""
        return ("m", "los_frac") if self.kappa == 0 else ()

    def eta_weights(self):
        """Return ``(eta / (1 + eta), 1 / (1 + eta))``."""
        return eta_weights(self.eta)

    def with_gbar(self, gbar: float) -> "ShapeParams":
        return replace(self, gbar=float(gbar))


@dataclass(frozen=True)
class PhysicalParams:
    """Generative-model quantities for ``W = sum (X_i + p_i xi)^2 + (Y_i + q_i xi)^2``.

    ``p`` and ``q`` are the aggregated LoS amplitudes, ``p**2 = sum p_i**2``.
    ``gbar`` is the mean SNR the power samples are rescaled to.
    """

    sigma_x2: float
    sigma_y2: float
    p: float
    q: float
    mu_int: int
    m: float
    omega: float
    gbar: float


@dataclass(frozen=True)
class MgfFactorization:
    """Coefficients and roots of the two quadratics behind the MGF.

    With ``x = gbar * s`` the MGF is ``D(x)**(m - mu/2) * N(x)**(-m)`` where
    ``N(x) = alpha1 x^2 + beta1 x + 1`` (roots ``delta1, delta2``) and
    ``D(x) = alpha2 x^2 + beta2 x + 1`` (roots ``c1, c2``).  ``D`` collects the
    two diffuse factors, so ``c1, c2`` are the diffuse singularities.  A root is
    ``None`` when its quadratic degenerates to a linear polynomial (``alpha = 0``).
    """

    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    delta1: complex | None
    delta2: complex | None
    c1: complex | None
    c2: complex | None
    gbar: float
    mu: float
    m: float

    def evaluate(self, s):
        """MGF rebuilt from the roots, ``prod (1 - x/c)^(m-mu/2) prod (1 - x/delta)^(-m)``.

        Each factor stays off the principal branch cut for ``Re(s) <= 0`` because
        all roots lie in the open right half-plane.
        """
        x = self.gbar * s
        out = 1.0 + 0j
        for c in (self.c1, self.c2):
            if c is not None:
                out *= (1.0 - x / c) ** (self.m - self.mu / 2.0)
        for d in (self.delta1, self.delta2):
            if d is not None:
                out *= (1.0 - x / d) ** (-self.m)
        return out


class SpecialCase(str, enum.Enum):
    ONE_SIDED_GAUSSIAN = "OneSidedGaussian"
    RAYLEIGH = "Rayleigh"
    NAKAGAMI_M = "NakagamiM"
    HOYT = "Hoyt"
    ETA_MU = "EtaMu"
    RICE = "Rice"
    ETA_KAPPA_SYM = "EtaKappaSym"
    ETA_KAPPA_ASYM = "EtaKappaAsym"
    BECKMANN = "Beckmann"
    KAPPA_MU = "KappaMu"
    RICIAN_SHADOWED = "RicianShadowed"
    KAPPA_MU_SHADOWED = "KappaMuShadowed"


def rho_to_los_frac(rho: float) -> float:
    rho = float(rho)
    if rho < 0 or math.isnan(rho):
        raise DomainError("rho", f"rho must be >= 0, got {rho}")
    if math.isinf(rho):
        return 1.0
    r2 = rho * rho
    return r2 / (1.0 + r2)


def los_frac_to_rho(t: float) -> float:
    if t >= 1.0:
        return math.inf
    return math.sqrt(t / (1.0 - t))


def eta_weights(eta: float):
    if math.isinf(eta):
        return 1.0, 0.0
    return eta / (1.0 + eta), 1.0 / (1.0 + eta)


def validate(params: ShapeParams) -> ShapeParams:
    """Check the parameter domain and return the canonical form.

    For ``kappa == 0`` the LoS fluctuation ``m`` and the LoS split
    ``los_frac`` have no effect; they are reset to 1 so that equal
    distributions compare equal.

    Raises
    ------
    DomainError
        Naming the first offending field.
    """
    checks = (
        ("gbar", params.gbar > 0 and math.isfinite(params.gbar)),
        ("kappa", params.kappa >= 0 and math.isfinite(params.kappa)),
        ("mu", params.mu > 0 and math.isfinite(params.mu)),
        ("m", params.m > 0),
        ("eta", params.eta >= 0),
        ("los_frac", 0.0 <= params.los_frac <= 1.0),
    )
    for name, ok in checks:
        if not ok:
            raise DomainError(name, f"{name}={getattr(params, name)!r} is out of range")
    if params.kappa == 0 and (params.m != 1.0 or params.los_frac != 1.0):
        return replace(params, m=1.0, los_frac=1.0)
    return params


def to_physical(params: ShapeParams, omega: float | None = None) -> PhysicalParams:
    """Invert the shape definitions for a given total power ``omega`` (default ``gbar``)."""
    params = validate(params)
    if not float(params.mu).is_integer():
        raise DomainError("mu", f"the physical model needs an integer cluster count, got {params.mu}")
    omega = params.gbar if omega is None else float(omega)
    if not omega > 0:
        raise DomainError("omega")
    mu = int(params.mu)
    wx, wy = params.eta_weights()
    diffuse = omega / (1.0 + params.kappa)
    los = omega * params.kappa / (1.0 + params.kappa)
    return PhysicalParams(
        sigma_x2=diffuse * wx / mu,
        sigma_y2=diffuse * wy / mu,
        p=math.sqrt(los * params.los_frac),
        q=math.sqrt(los * (1.0 - params.los_frac)),
        mu_int=mu,
        m=params.m,
        omega=omega,
        gbar=params.gbar,
    )


def to_shape(phys: PhysicalParams) -> ShapeParams:
    diffuse = phys.mu_int * (phys.sigma_x2 + phys.sigma_y2)
    los = phys.p ** 2 + phys.q ** 2
    if phys.sigma_y2 == 0:
        eta = math.inf if phys.sigma_x2 > 0 else 1.0
    else:
        eta = phys.sigma_x2 / phys.sigma_y2
    kappa = los / diffuse
    los_frac = phys.p ** 2 / los if los > 0 else 1.0
    return validate(ShapeParams(phys.gbar, kappa, float(phys.mu_int), phys.m, eta, los_frac))


def _unit_quadratic_roots(a: float, b: float):
    """Roots of ``a x^2 + b x + 1`` without cancellation.

    ``q = -(b + sign(b) sqrt(b^2 - 4a)) / 2`` gives the roots ``q / a`` and ``1 / q``;
    the first is dropped (``None``) when ``a == 0``.
    """
    disc = b * b - 4.0 * a
    sq = math.sqrt(disc) if disc >= 0 else cmath.sqrt(disc)
    q = -0.5 * (b + math.copysign(1.0, b) * sq)
    small = complex(1.0 / q)
    if a == 0:
        return None, small
    return complex(q / a), small


def factorize(params: ShapeParams) -> MgfFactorization:
    """Coefficients of the two quadratics in ``x = gbar * s``.

    In terms of ``t = los_frac`` the LoS part of ``alpha1`` is::

        2 kappa (t w_y + (1 - t) w_x) / (m mu (1 + kappa)^2)

    which equals ``2 kappa (rho^2 + eta) / (m (1 + rho^2) mu (1 + eta) (1 + kappa)^2)``.
    """
    params = validate(params)
    k, mu, m = params.kappa, params.mu, params.m
    wx, wy = params.eta_weights()
    t = params.los_frac
    alpha2 = 4.0 * wx * wy / (mu * mu * (1.0 + k) ** 2)
    beta2 = -2.0 / (mu * (1.0 + k))
    alpha1 = alpha2 + 2.0 * k * (t * wy + (1.0 - t) * wx) / (m * mu * (1.0 + k) ** 2)
    beta1 = -(2.0 / mu + k / m) / (1.0 + k)
    d1, d2 = _unit_quadratic_roots(alpha1, beta1)
    c1, c2 = _unit_quadratic_roots(alpha2, beta2)
    return MgfFactorization(alpha1, beta1, alpha2, beta2, d1, d2, c1, c2, params.gbar, mu, m)


def _require(name, value, ok):
    if not ok:
        raise DomainError(name, f"{name}={value!r} is invalid for this model")


def special_case(name, gbar: float = 1.0, **legacy) -> ShapeParams:
    """Map a classical fading model onto the equivalent shape parameters.

    Legacy keyword arguments per model:

    ========================  ===========================================
    OneSidedGaussian, Rayleigh  (none)
    NakagamiM                 ``m``
    Hoyt                      ``q`` (in-phase/quadrature *power* ratio)
    EtaMu                     ``eta``, ``mu`` (``2 mu`` clusters)
    Rice                      ``K``
    EtaKappaSym/Asym          ``kappa``, ``eta``
    Beckmann                  ``K``, ``q`` (power ratio), ``r`` (LoS amplitude ratio)
    KappaMu                   ``kappa``, ``mu``
    RicianShadowed            ``K``, ``m``
    KappaMuShadowed           ``kappa``, ``mu``, ``m``
    ========================  ===========================================

    The ``m -> inf`` reductions use ``m = M_LARGE``.
    """
    case = SpecialCase(name)
    g = float(gbar)

    def get(key):
        if key not in legacy:
            raise DomainError(key, f"{case.value} requires parameter {key!r}")
        return float(legacy[key])

    if case is SpecialCase.ONE_SIDED_GAUSSIAN:
        out = ShapeParams(g, 0.0, 1.0, 1.0, 0.0, 1.0)
    elif case is SpecialCase.RAYLEIGH:
        out = ShapeParams(g, 0.0, 1.0, 1.0, 1.0, 1.0)
    elif case is SpecialCase.NAKAGAMI_M:
        m = get("m")
        _require("m", m, m > 0)
        out = ShapeParams(g, 0.0, m, 1.0, 1.0, 1.0)
    elif case is SpecialCase.HOYT:
        q = get("q")
        _require("q", q, q >= 0)
        out = ShapeParams(g, 0.0, 1.0, 1.0, q, 1.0)
    elif case is SpecialCase.ETA_MU:
        eta, mu = get("eta"), get("mu")
        _require("eta", eta, eta >= 0)
        _require("mu", mu, mu > 0)
        out = ShapeParams(g, 0.0, 2.0 * mu, 1.0, eta, 1.0)
    elif case is SpecialCase.RICE:
        K = get("K")
        _require("K", K, K >= 0)
        out = ShapeParams(g, K, 1.0, M_LARGE, 1.0, 1.0)
    elif case in (SpecialCase.ETA_KAPPA_SYM, SpecialCase.ETA_KAPPA_ASYM):
        kappa, eta = get("kappa"), get("eta")
        _require("kappa", kappa, kappa >= 0)
        _require("eta", eta, eta >= 0)
        t = rho_to_los_frac(eta) if case is SpecialCase.ETA_KAPPA_SYM else 0.0
        out = ShapeParams(g, kappa, 1.0, M_LARGE, eta, t)
    elif case is SpecialCase.BECKMANN:
        K, q, r = get("K"), get("q"), get("r")
        _require("K", K, K >= 0)
        _require("q", q, q >= 0)
        _require("r", r, r >= 0)
        out = ShapeParams(g, K, 1.0, M_LARGE, q, rho_to_los_frac(r))
    elif case is SpecialCase.KAPPA_MU:
        kappa, mu = get("kappa"), get("mu")
        _require("kappa", kappa, kappa >= 0)
        _require("mu", mu, mu > 0)
        out = ShapeParams(g, kappa, mu, M_LARGE, 1.0, 1.0)
    elif case is SpecialCase.RICIAN_SHADOWED:
        K, m = get("K"), get("m")
        _require("K", K, K >= 0)
        _require("m", m, m > 0)
        out = ShapeParams(g, K, 1.0, m, 1.0, 1.0)
    else:
        kappa, mu, m = get("kappa"), get("mu"), get("m")
        _require("kappa", kappa, kappa >= 0)
        _require("mu", mu, mu > 0)
        _require("m", m, m > 0)
        out = ShapeParams(g, kappa, mu, m, 1.0, 1.0)
    return validate(out)
