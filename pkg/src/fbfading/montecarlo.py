"""Monte Carlo generators and empirical estimators for fluctuating Beckmann fading.

Power samples follow the physical construction
``W = sum_i (X_i + p_i xi)^2 + (Y_i + q_i xi)^2`` with ``xi^2 ~ Gamma(m, 1/m)``.
Time-correlated traces replace each Gaussian ``X_i, Y_i`` by a
sum-of-sinusoids process with Clarke autocorrelation ``J0(2 pi fd tau)``.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincinv

from .errors import DomainError
from .params import PhysicalParams
from .second_order import DopplerContext

MAX_DT_FD = 0.01
MIN_CROSSINGS = 50
TRACE_MAGIC = b"FBTR"
TRACE_VERSION = 1
_HEADER = struct.Struct("<4sIdddQ")
_CHUNK = 1 << 20


@dataclass(frozen=True)
class RngSpec:
    """Seed plus sub-stream id; equal specs give bit-identical streams."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v < 2 ** 64):
                raise DomainError(name, f"{name} must be an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, k: int) -> "RngSpec":
        return RngSpec(self.seed, (int(self.stream) + int(k)) % 2 ** 64)


def thread_count(default: int | None = None) -> int:
    """Worker cap from ``FB_THREADS`` (falls back to the CPU count)."""
    env = os.environ.get("FB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DomainError("FB_THREADS", f"FB_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise DomainError("FB_THREADS", "FB_THREADS must be >= 1")
        return n
    return default or os.cpu_count() or 1


def gamma_variates(gen: np.random.Generator, shape: float, n: int, scale: float = 1.0) -> np.ndarray:
    """Gamma(shape, scale) draws by Marsaglia-Tsang squeeze-free rejection.

    For ``shape < 1`` a Gamma(shape + 1) draw is multiplied by ``U^(1/shape)``.
    """
    if not shape > 0:
        raise DomainError("shape", "gamma shape must be > 0")
    boost = shape < 1.0
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    todo = np.arange(n)
    while todo.size:
        k = todo.size
        x = gen.standard_normal(k)
        u = gen.random(k)
        v = (1.0 + c * x) ** 3
        ok = v > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            ok &= np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0))
        out[todo[ok]] = d * v[ok]
        todo = todo[~ok]
    if boost:
        out *= gen.random(n) ** (1.0 / shape)
    return out * scale


def _los_split(phys: PhysicalParams, split: str):
    mu = phys.mu_int
    if split == "uniform":
        r = 1.0 / math.sqrt(mu)
        return np.full(mu, phys.p * r), np.full(mu, phys.q * r)
    if split == "single":
        p = np.zeros(mu)
        q = np.zeros(mu)
        p[0], q[0] = phys.p, phys.q
        return p, q
    raise DomainError("split", f"unknown LoS split {split!r}")


def sample_power(phys: PhysicalParams, n: int, rng: RngSpec = RngSpec(), split: str = "uniform") -> np.ndarray:
    """``n`` i.i.d. SNR samples, scaled so their mean is ``gbar``.

    ``split`` distributes the LoS amplitudes over clusters: ``"uniform"``
    gives ``p_i = p / sqrt(mu)``; ``"single"`` puts all of it in one cluster.
    Only ``p^2`` and ``q^2`` enter the distribution, so both agree.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n", "need at least one sample")
    gen = rng.generator()
    pi, qi = _los_split(phys, split)
    sx, sy = math.sqrt(phys.sigma_x2), math.sqrt(phys.sigma_y2)
    out = np.empty(n)
    for lo in range(0, n, _CHUNK):
        k = min(_CHUNK, n - lo)
        xi = np.sqrt(gamma_variates(gen, phys.m, k, 1.0 / phys.m))
        w = np.zeros(k)
        for i in range(phys.mu_int):
            w += (sx * gen.standard_normal(k) + pi[i] * xi) ** 2
            w += (sy * gen.standard_normal(k) + qi[i] * xi) ** 2
        out[lo:lo + k] = w
    return out * (phys.gbar / phys.omega)


def stratified_xi(m: float, n: int, rng: RngSpec = RngSpec()) -> np.ndarray:
    """``n`` LoS fluctuation values, one per equal-probability stratum of ``xi^2``.

    Stratum ``r`` gets ``xi^2 = F^-1((r + U_r) / n)`` with ``F`` the
    Gamma(m, 1/m) CDF.  Averages over the strata are unbiased for ``E_xi``.
    """
    gen = rng.generator()
    p = (np.arange(n) + gen.random(n)) / n
    return np.sqrt(gammaincinv(m, p) / m)


@dataclass
class FadingTrace:
    """Sampled envelope ``R(t)``, normalized so that the long-run mean of ``R^2`` is ``omega``.

    ``xi_blocks`` holds the LoS fluctuation of each block of ``block_len``
    samples; ``xi`` is its single value, or NaN if the trace has several blocks.
    """

    samples: np.ndarray
    dt: float
    fd: float
    xi: float
    params: PhysicalParams | None = None
    xi_blocks: np.ndarray = field(default_factory=lambda: np.array([]))
    block_len: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if not self.dt * self.fd <= MAX_DT_FD:
            raise DomainError("dt", f"dt*fd = {self.dt * self.fd:g} exceeds {MAX_DT_FD}")
        if self.samples.size and self.samples.min() < 0:
            raise DomainError("samples", "envelope samples must be >= 0")
        if self.block_len <= 0:
            self.block_len = self.samples.size
        if self.xi_blocks.size == 0:
            self.xi_blocks = np.array([self.xi])

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt


def _sos_process(gen, n, dt, fd, n_sin, chunk):
    """Unit-variance Clarke-Doppler Gaussian process by sum of sinusoids.

    Arrival angles are stratified on the circle.  The sample index is split
    as ``j + chunk * b`` so the phasors factor into a ``(chunk x N) @ (N x nb)``
    complex matrix product.
    """
    alpha = 2.0 * math.pi * (np.arange(n_sin) + gen.random(n_sin)) / n_sin
    phase = 2.0 * math.pi * gen.random(n_sin)
    omega = 2.0 * math.pi * fd * np.cos(alpha)
    nb = -(-n // chunk)
    inner = np.exp(1j * np.outer(np.arange(chunk) * dt, omega))
    outer = np.exp(1j * (np.outer(omega, np.arange(nb) * (chunk * dt)) + phase[:, None]))
    x = (inner @ outer).real.T.reshape(-1)[:n]
    return x * math.sqrt(2.0 / n_sin)


def sample_trace(phys: PhysicalParams, duration: float, dt: float, ctx: DopplerContext = DopplerContext(),
                 ts_ratio: float = math.inf, rng: RngSpec = RngSpec(), n_sinusoids: int = 64,
                 xi: float | None = None) -> FadingTrace:
    """Envelope trace of ``duration`` seconds sampled every ``dt``.

    Parameters
    ----------
    phys : PhysicalParams
        The envelope is normalized by ``sqrt(omega)``.
    ts_ratio : float
        ``xi`` is redrawn every ``ts_ratio / fd`` seconds; ``inf`` keeps one
        value for the whole trace.
    xi : float, optional
        Fix the LoS fluctuation instead of drawing it (only with ``ts_ratio = inf``).
    """
    if not dt > 0 or not duration > 0:
        raise DomainError("dt", "dt and duration must be > 0")
    if dt * ctx.fd > MAX_DT_FD:
        raise DomainError("dt", f"dt*fd = {dt * ctx.fd:g} exceeds {MAX_DT_FD}; crossings would be missed")
    if not ts_ratio >= 1:
        raise DomainError("ts_ratio", "ts_ratio must be >= 1")
    if xi is not None and not math.isinf(ts_ratio):
        raise DomainError("xi", "a fixed xi needs ts_ratio = inf")
    if n_sinusoids < 16:
        raise DomainError("n_sinusoids", "need at least 16 sinusoids per process")
    n = int(round(duration / dt))
    gen = rng.generator()
    block = n if math.isinf(ts_ratio) else max(1, int(round(ts_ratio / (ctx.fd * dt))))
    nblocks = -(-n // block)
    if xi is None:
        xis = np.sqrt(gamma_variates(gen, phys.m, nblocks, 1.0 / phys.m))
    else:
        xis = np.array([float(xi)])
    xi_t = np.repeat(xis, block)[:n]
    pi, qi = _los_split(phys, "uniform")
    sx, sy = math.sqrt(phys.sigma_x2), math.sqrt(phys.sigma_y2)
    chunk = max(1, int(math.isqrt(n)))
    w = np.zeros(n)
    for i in range(phys.mu_int):
        w += (sx * _sos_process(gen, n, dt, ctx.fd, n_sinusoids, chunk) + pi[i] * xi_t) ** 2
        w += (sy * _sos_process(gen, n, dt, ctx.fd, n_sinusoids, chunk) + qi[i] * xi_t) ** 2
    env = np.sqrt(w / phys.omega)
    return FadingTrace(env, dt, ctx.fd, float(xis[0]) if nblocks == 1 else math.nan, phys, xis, block)


@dataclass
class EmpiricalSecondOrder:
    """Crossing counts and fade time per threshold; merge by adding counts."""

    thresholds: np.ndarray
    n_crossings: np.ndarray
    time_below: np.ndarray
    total_time: float

    @property
    def lcr_hat(self) -> np.ndarray:
        return self.n_crossings / self.total_time

    @property
    def afd_hat(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.n_crossings > 0, self.time_below / np.maximum(self.n_crossings, 1), math.inf)

    @property
    def insufficient(self) -> np.ndarray:
        """Thresholds with fewer than ``MIN_CROSSINGS`` upcrossings."""
        return self.n_crossings < MIN_CROSSINGS

    def merge(self, other: "EmpiricalSecondOrder") -> "EmpiricalSecondOrder":
        if not np.array_equal(self.thresholds, other.thresholds):
            raise DomainError("thresholds", "cannot merge estimates on different thresholds")
        return EmpiricalSecondOrder(self.thresholds, self.n_crossings + other.n_crossings,
                                    self.time_below + other.time_below, self.total_time + other.total_time)


def empirical_second_order(trace: FadingTrace, thresholds) -> EmpiricalSecondOrder:
    """Count upcrossings (sample strictly below ``u``, next at or above) and time below ``u``.

    Transitions across ``xi`` block boundaries are not counted.
    """
    u = np.atleast_1d(np.asarray(thresholds, dtype=float))
    if np.any(~(u > 0)):
        raise DomainError("thresholds", "thresholds must be > 0")
    s = trace.samples
    cont = np.ones(max(s.size - 1, 0), dtype=bool)
    if trace.block_len < s.size:
        cont[trace.block_len - 1::trace.block_len] = False
    counts = np.empty(u.size, dtype=np.int64)
    below_t = np.empty(u.size)
    for k, level in enumerate(u):
        below = s < level
        counts[k] = np.count_nonzero(below[:-1] & ~below[1:] & cont)
        below_t[k] = np.count_nonzero(below) * trace.dt
    return EmpiricalSecondOrder(u, counts, below_t, trace.duration)


def simulate_second_order(phys: PhysicalParams, thresholds, n_realizations: int, n_samples: int, dt: float,
                          ctx: DopplerContext = DopplerContext(), ts_ratio: float = math.inf,
                          rng: RngSpec = RngSpec(), xi_sampling: str = "stratified",
                          n_sinusoids: int = 64, workers: int | None = None) -> EmpiricalSecondOrder:
    """Pool crossing statistics over independent trace realizations.

    Realization ``r`` uses sub-stream ``rng.stream + 1 + r``.  With
    ``xi_sampling="stratified"`` and ``ts_ratio = inf`` the per-trace ``xi``
    values come from :func:`stratified_xi` (sub-stream ``rng.stream``);
    ``"independent"`` draws each one inside its trace.  Results do not
    depend on the worker count.
    """
    if n_realizations < 1:
        raise DomainError("n_realizations")
    if xi_sampling not in ("stratified", "independent"):
        raise DomainError("xi_sampling")
    fixed = None
    if xi_sampling == "stratified" and math.isinf(ts_ratio):
        fixed = stratified_xi(phys.m, n_realizations, rng)
    duration = n_samples * dt

    def one(r):
        tr = sample_trace(phys, duration, dt, ctx, ts_ratio, rng.child(1 + r), n_sinusoids,
                          None if fixed is None else fixed[r])
        return empirical_second_order(tr, thresholds)

    nw = min(workers or thread_count(), n_realizations)
    if nw > 1:
        with ThreadPoolExecutor(nw) as pool:
            parts = list(pool.map(one, range(n_realizations)))
    else:
        parts = [one(r) for r in range(n_realizations)]
    total = parts[0]
    for p in parts[1:]:
        total = total.merge(p)
    return total


@dataclass(frozen=True)
class HistogramDensity:
    edges: np.ndarray
    density: np.ndarray
    stderr: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def histogram_pdf(samples, bins=50, range=None) -> HistogramDensity:
    """Density histogram with per-bin multinomial standard errors."""
    samples = np.asarray(samples, dtype=float)
    if np.ndim(bins) == 0 and int(bins) < 10:
        raise DomainError("bins", "need at least 10 bins")
    counts, edges = np.histogram(samples, bins=bins, range=range)
    n = samples.size
    width = np.diff(edges)
    p = counts / n
    return HistogramDensity(edges, p / width, np.sqrt(p * (1.0 - p) / n) / width)


def ks_statistic(samples, cdf, grid_points: int = 20000) -> float:
    """Upper bound on ``sup |F_n - F|`` that needs ``cdf`` on only ``grid_points + 1`` points.

    ``F`` is evaluated at sample order statistics ``x_j``; monotonicity of
    both functions bounds the gap inside each ``[x_j, x_j+1]``.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    idx = np.unique(np.linspace(0, n - 1, min(grid_points, n - 1) + 1).round().astype(np.int64))
    grid = x[idx]
    F = np.asarray(cdf(grid), dtype=float)
    hi = np.searchsorted(x, grid, side="right") / n
    lo = np.searchsorted(x, grid, side="left") / n
    inside = np.maximum(F[1:] - hi[:-1], lo[1:] - F[:-1])
    ends = np.array([F[0], 1.0 - F[-1], np.max(np.abs(hi - F)), np.max(np.abs(lo - F))])
    return float(max(inside.max(initial=0.0), ends.max()))


def write_trace_binary(trace: FadingTrace, path) -> None:
    """Little-endian ``FBTR`` file: header then ``n`` float64 envelope samples."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, trace.dt, trace.fd, trace.xi, trace.samples.size))
        fh.write(np.ascontiguousarray(trace.samples, dtype="<f8").tobytes())


def read_trace_binary(path) -> FadingTrace:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise DomainError("path", "truncated trace header")
        magic, version, dt, fd, xi, n = _HEADER.unpack(head)
        if magic != TRACE_MAGIC or version != TRACE_VERSION:
            raise DomainError("path", "not an FBTR v1 trace file")
        data = np.frombuffer(fh.read(8 * n), dtype="<f8")
    if data.size != n:
        raise DomainError("path", "truncated trace data")
    return FadingTrace(data.astype(float), dt, fd, xi)


def write_trace_csv(trace: FadingTrace, path) -> None:
    t = np.arange(trace.samples.size) * trace.dt
    with open(path, "w", newline="\n") as fh:
        fh.write("time,envelope\n")
        for a, b in zip(t.tolist(), trace.samples.tolist()):
            fh.write(f"{a!r},{b!r}\n")
