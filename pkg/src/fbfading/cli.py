"""Command-line front end: ``fbfading <command> [options]``.

Every command writes a :class:`CurveTable` as CSV (default) or JSON to
``--out`` or stdout.  Exit codes: 0 success, 1 validation failure, 2 bad
arguments or parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError
from .first_order import (
    cdf_envelope,
    cdf_snr,
    mgf,
    mgf_via_conditional_average,
    pdf_envelope,
    pdf_snr,
    pdf_snr_series,
)
from .montecarlo import (
    RngSpec,
    ks_statistic,
    sample_power,
    sample_trace,
    simulate_second_order,
    write_trace_binary,
    write_trace_csv,
)
from .params import ShapeParams, SpecialCase, rho_to_los_frac, special_case, to_physical, validate
from .second_order import DopplerContext, LcrConfig, afd_curve, lcr
from .sep import SepQuery, sep_dbpsk, sep_mfsk_noncoherent, sep_monte_carlo

CONFIG_SCHEMA = 1
COMMANDS = ("mgf", "pdf", "cdf", "lcr", "afd", "sep", "sample", "trace", "validate", "reduce")


class ArgError(Exception):
    """Bad command line or config file (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgError(message)


@dataclass
class CurveTable:
    """Named equal-length columns plus the metadata needed to reproduce them."""

    meta: dict
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("columns must have equal lengths")

    def to_csv(self) -> str:
        names = list(self.columns)
        buf = io.StringIO(newline="")
        buf.write(",".join(names) + "\n")
        for row in zip(*(self.columns[n] for n in names)):
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        cols = {k: [_jsonable(v) for v in vals] for k, vals in self.columns.items()}
        return json.dumps({"meta": self.meta, "columns": cols}, indent=1) + "\n"


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else repr(v)


# ----------------------------------------------------------------------------- parsing


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_grid(spec: str):
    """``lo:hi:n[:scale]`` to an array.

    ``scale`` is ``lin`` (default), ``dB`` (geometric spacing between the
    linear endpoints) or ``dBrange`` (endpoints in dB, converted by
    ``10^(x/10)``; envelope thresholds use ``10^(x/20)``).  Returns
    ``(points, scale, dB_values_or_None)``.
    """
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ArgError(f"grid must be lo:hi:n[:dB|:dBrange], got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ArgError(f"bad grid {spec!r}") from None
    scale = parts[3] if len(parts) == 4 else "lin"
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or (n > 1 and not hi > lo):
        raise ArgError(f"grid needs finite lo < hi and n >= 1, got {spec!r}")
    if scale == "lin":
        return np.linspace(lo, hi, n), scale, None
    if scale == "dB":
        if not lo > 0:
            raise ArgError("dB-spaced grids need positive endpoints")
        return np.geomspace(lo, hi, n), scale, None
    if scale == "dBrange":
        db = np.linspace(lo, hi, n)
        return 10.0 ** (db / 10.0), scale, db
    raise ArgError(f"unknown grid scale {scale!r}")


def _add_shared(p: argparse.ArgumentParser, grid_default: str | None):
    p.add_argument("--gbar", type=_float, default=1.0, help="mean SNR (linear)")
    p.add_argument("--kappa", type=_float, default=0.0)
    p.add_argument("--mu", type=_float, default=1.0)
    p.add_argument("--m", type=_float, default=1.0)
    p.add_argument("--eta", type=_float, default=1.0)
    p.add_argument("--rho", type=_float, default=None, help="LoS amplitude ratio p/q; 'inf' allowed")
    p.add_argument("--grid", default=grid_default, help="lo:hi:n[:dB|:dBrange]")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON file with \"schema\": 1 overriding flags")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="fbfading", description="Fluctuating Beckmann fading statistics")
    root.add_argument("--version", action="version", version=f"fbfading {__version__}")
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mgf", help="moment generating function E[exp(s gamma)]")
    _add_shared(p, "-5:0.5:56")
    p.add_argument("--route", choices=("closed", "average"), default="closed")

    for name, what in (("pdf", "density"), ("cdf", "distribution")):
        p = sub.add_parser(name, help=f"{what} of the SNR or the envelope")
        _add_shared(p, "0.01:5:100")
        p.add_argument("--var", choices=("snr", "envelope"), default="snr")
        p.add_argument("--omega", type=_float, default=1.0, help="envelope mean power")

    for name in ("lcr", "afd"):
        p = sub.add_parser(name, help="level crossing rate" if name == "lcr" else "average fade duration")
        _add_shared(p, "-30:10:41:dBrange")
        p.add_argument("--fd", type=_float, default=1.0, help="maximum Doppler shift (Hz)")
        p.add_argument("--quad", choices=("tanh_sinh", "gauss_jacobi"), default="tanh_sinh")
        p.add_argument("--quad-points", type=int, default=200)
        p.add_argument("--mc-realizations", type=int, default=0, help="add trace-counting columns")
        p.add_argument("--mc-samples", type=int, default=10 ** 6)
        p.add_argument("--dt-fd", type=_float, default=0.005, help="sampling interval times fd")

    p = sub.add_parser("sep", help="symbol error probability versus mean SNR")
    _add_shared(p, "1:1000:31:dB")
    p.add_argument("--scheme", choices=("dbpsk", "mfsk"), default="dbpsk")
    p.add_argument("--M", type=int, default=2, help="M-FSK order")
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo draws for an extra column")

    p = sub.add_parser("sample", help="i.i.d. SNR samples")
    _add_shared(p, None)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--stream", type=int, default=0)

    p = sub.add_parser("trace", help="time-correlated envelope trace")
    _add_shared(p, None)
    p.set_defaults(format=None)
    for a in p._actions:
        if a.dest == "format":
            a.choices = ("csv", "json", "bin")
    p.add_argument("--duration", type=_float, default=100.0, help="seconds")
    p.add_argument("--dt", type=_float, default=0.005, help="sample interval (s)")
    p.add_argument("--fd", type=_float, default=1.0)
    p.add_argument("--ts-ratio", type=_float, default=math.inf, help="xi redraw period times fd")
    p.add_argument("--stream", type=int, default=0)

    p = sub.add_parser("validate", help="run the consistency suites and print a JSON report")
    _add_shared(p, None)
    p.add_argument("--suite", choices=("two-route", "mc", "all"), default="all")

    p = sub.add_parser("reduce", help="FB parameters of a classical model")
    _add_shared(p, None)
    p.add_argument("model", choices=[c.value for c in SpecialCase])
    p.add_argument("legacy", nargs="*", help="legacy parameters as key=value")
    return root


def _apply_config(args):
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ArgError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict) or cfg.get("schema") != CONFIG_SCHEMA:
        raise ArgError(f"config must be a JSON object with \"schema\": {CONFIG_SCHEMA}")
    for key, value in cfg.items():
        if key == "schema":
            continue
        dest = key.replace("-", "_")
        if not hasattr(args, dest) or dest in ("command", "config"):
            raise ArgError(f"unknown config key {key!r}")
        if dest == "rho" and isinstance(value, str):
            value = _float(value)
        setattr(args, dest, value)
    return args


def _params(args, rho_default: float = 1.0) -> ShapeParams:
    rho = rho_default if args.rho is None else args.rho
    return validate(ShapeParams(args.gbar, args.kappa, args.mu, args.m, args.eta, rho_to_los_frac(rho)))


def _meta(args, params: ShapeParams | None = None, rng: RngSpec | None = None, **extra) -> dict:
    meta = {"tool": "fbfading", "version": __version__, "command": args.command}
    if params is not None:
        meta["params"] = {**asdict(params), "rho": _jsonable(params.rho)}
    if getattr(args, "grid", None):
        meta["grid"] = args.grid
    if rng is not None:
        meta["rng"] = {"seed": rng.seed, "stream": rng.stream, "generator": "PCG64"}
    meta.update(extra)
    return meta


def _grid(args):
    if not args.grid:
        raise ArgError("--grid is required")
    return parse_grid(args.grid)


# ----------------------------------------------------------------------------- commands


def cmd_mgf(args):
    params = _params(args)
    s, _, _ = _grid(args)
    if args.route == "closed":
        vals = mgf(params, s)
    else:
        vals = np.array([mgf_via_conditional_average(params, float(v)) for v in s])
    return CurveTable(_meta(args, params, route=args.route), {"s": s, "mgf": np.asarray(vals, dtype=float)})


def cmd_density(args):
    params = _params(args)
    x, _, _ = _grid(args)
    fn = {("pdf", "snr"): pdf_snr, ("cdf", "snr"): cdf_snr,
          ("pdf", "envelope"): pdf_envelope, ("cdf", "envelope"): cdf_envelope}[(args.command, args.var)]
    vals = fn(params, x) if args.var == "snr" else fn(params, x, args.omega)
    xname = "gamma" if args.var == "snr" else "r"
    extra = {"var": args.var}
    if args.var == "envelope":
        extra["omega"] = args.omega
    return CurveTable(_meta(args, params, **extra), {xname: x, args.command: np.asarray(vals, dtype=float)})


def _thresholds(args):
    pts, scale, db = _grid(args)
    if scale == "dBrange":
        return np.sqrt(pts), db
    return pts, 20.0 * np.log10(pts)


def cmd_second_order(args):
    params = _params(args, rho_default=math.inf)
    u, db = _thresholds(args)
    ctx = DopplerContext(args.fd)
    cfg = LcrConfig(args.quad, args.quad_points)
    rng = RngSpec(args.seed) if args.mc_realizations else None
    extra = {"fd": args.fd, "quad": args.quad, "quad_points": args.quad_points,
             "threshold_convention": "u = 10^(x_dB/20), envelope normalized to RMS"}
    cols = {"x_dB": db, "u": u}
    if args.command == "lcr":
        cols["lcr"] = lcr(params, u, ctx, cfg)
    else:
        res = afd_curve(params, u, ctx, cfg)
        cols["afd"] = res.afd
        cols["underflow"] = res.underflow
    if args.mc_realizations:
        dt = args.dt_fd / args.fd
        emp = simulate_second_order(to_physical(params, omega=1.0), u, args.mc_realizations, args.mc_samples,
                                    dt, ctx, rng=rng)
        cols[f"{args.command}_mc"] = emp.lcr_hat if args.command == "lcr" else emp.afd_hat
        cols["crossings"] = emp.n_crossings
        extra.update(mc_realizations=args.mc_realizations, mc_samples=args.mc_samples, dt=dt,
                     xi_sampling="stratified")
    return CurveTable(_meta(args, params, rng, **extra), cols)


def cmd_sep(args):
    params = _params(args)
    g, _, _ = _grid(args)
    q = SepQuery(args.scheme, args.M if args.scheme == "mfsk" else 2, tuple(g))
    cols = {"gbar": g, "sep": q.evaluate(params)}
    rng = None
    if args.mc:
        rng = RngSpec(args.seed)
        est, se = sep_monte_carlo(params, args.scheme, q.m_ary, args.mc, rng, g)
        cols["sep_mc"], cols["sep_mc_stderr"] = est, se
    extra = {"scheme": args.scheme}
    if args.scheme == "mfsk":
        extra["M"] = args.M
    if args.mc:
        extra["mc_draws"] = args.mc
    return CurveTable(_meta(args, params, rng, **extra), cols)


def cmd_sample(args):
    params = _params(args)
    rng = RngSpec(args.seed, args.stream)
    w = sample_power(to_physical(params), args.n, rng)
    return CurveTable(_meta(args, params, rng, n=args.n), {"snr": w})


def cmd_trace(args):
    params = _params(args, rho_default=math.inf)
    rng = RngSpec(args.seed, args.stream)
    ctx = DopplerContext(args.fd)
    tr = sample_trace(to_physical(params, omega=1.0), args.duration, args.dt, ctx, args.ts_ratio, rng)
    return tr, _meta(args, params, rng, dt=args.dt, fd=args.fd, duration=args.duration,
                     ts_ratio=_jsonable(args.ts_ratio), xi=_jsonable(tr.xi))


def cmd_reduce(args):
    legacy = {}
    for item in args.legacy:
        key, sep, value = item.partition("=")
        if not sep:
            raise ArgError(f"legacy parameters must be key=value, got {item!r}")
        try:
            legacy[key] = float(value)
        except ValueError:
            raise ArgError(f"bad value in {item!r}") from None
    params = special_case(args.model, args.gbar, **legacy)
    cols = {"field": ["gbar", "kappa", "mu", "m", "eta", "los_frac", "rho"],
            "value": [params.gbar, params.kappa, params.mu, params.m, params.eta, params.los_frac, params.rho]}
    return CurveTable(_meta(args, params, model=args.model, legacy=legacy), cols)


# ----------------------------------------------------------------------------- validation


def _check(name, suite, value, tol, passed=None):
    ok = bool(value <= tol) if passed is None else bool(passed)
    return {"name": name, "suite": suite, "value": _jsonable(value), "tolerance": tol, "passed": ok}


def suite_two_route():
    out = []
    sets = [ShapeParams(1.0, 1.0, 1.0, 2.0, 0.5, 0.5), ShapeParams(3.0, 10.0, 2.0, 4.0, 0.1, 1 / 6),
            ShapeParams(0.5, 5.0, 1.5, 0.7, 3.0, 0.9), ShapeParams(2.0, 0.3, 3.0, 10.0, 1.0, 0.0)]
    worst = 0.0
    for p in sets:
        s = np.array([-3.0, -1.0, -0.2, 0.1]) / p.gbar
        a = mgf(p, s)
        b = np.array([mgf_via_conditional_average(p, float(v)) for v in s])
        worst = max(worst, float(np.max(np.abs(a / b - 1))))
    out.append(_check("mgf_closed_vs_conditional_average", "two-route", worst, 1e-8))

    worst = 0.0
    for p in sets:
        worst = max(worst, abs(float(mgf(p, 0.0)) - 1.0))
    out.append(_check("mgf_at_zero", "two-route", worst, 1e-12))

    from scipy.integrate import quad

    p = sets[0]
    total = quad(lambda g: float(pdf_snr(p, g)), 0, np.inf, limit=200, epsabs=1e-10)[0]
    out.append(_check("pdf_normalization", "two-route", abs(total - 1.0), 1e-6))

    g = np.array([0.01, 0.02, 0.05])
    series = np.array([pdf_snr_series(p, float(v)) for v in g])
    out.append(_check("pdf_series_vs_inversion", "two-route",
                      float(np.max(np.abs(series / pdf_snr(p, g) - 1))), 1e-6))

    ray = ShapeParams(1.0, 1e-8, 1.0, 1.0, 1.0, 1.0)
    u = np.geomspace(0.05, 3.0, 12)
    ref = math.sqrt(2 * math.pi) * u * np.exp(-u * u)
    out.append(_check("lcr_rayleigh_limit", "two-route", float(np.max(np.abs(lcr(ray, u) / ref - 1))), 1e-4))

    q = ShapeParams(10.0, 10.0, 2.0, 4.0, 0.5, 1 / 6)
    try:
        sep_dbpsk(q), sep_mfsk_noncoherent(q, 4)
        ok = True
    except NumericalError:
        ok = False
    out.append(_check("sep_closed_forms_vs_mgf", "two-route", 0.0, 1e-12, ok))
    return out


def suite_mc(seed: int):
    out = []
    rng = RngSpec(seed)
    p = ShapeParams(1.0, 10.0, 2.0, 1.5, 0.3, 0.7)
    w = sample_power(to_physical(p), 10 ** 6, rng)
    z = abs(w.mean() - p.gbar) / (w.std(ddof=1) / math.sqrt(w.size))
    out.append(_check("sample_mean_within_4se", "mc", float(z), 4.0))
    out.append(_check("ks_samples_vs_cdf", "mc", ks_statistic(w, lambda x: cdf_snr(p, x), 4000), 0.002))

    q = ShapeParams(1.0, 10.0, 2.0, 4.0, 0.5, 1 / 6)
    g = np.array([1.0, 10.0, 100.0])
    est, se = sep_monte_carlo(q, "mfsk", 4, 10 ** 6, rng.child(1), g)
    ana = np.array([sep_mfsk_noncoherent(q.with_gbar(v), 4) for v in g])
    out.append(_check("sep_mfsk_monte_carlo_within_3se", "mc", float(np.max(np.abs(est - ana) / se)), 3.0))

    r = ShapeParams(1.0, 1.0, 1.0, 1.0, 1.4, 1.0)
    u = 10 ** (np.array([-10.0, 0.0]) / 20)
    emp = simulate_second_order(to_physical(r, omega=1.0), u, 20, 200_000, 0.005, rng=rng.child(2))
    out.append(_check("lcr_trace_counting", "mc", float(np.max(np.abs(emp.lcr_hat / lcr(r, u) - 1))), 0.05))
    return out


def cmd_validate(args):
    checks = []
    if args.suite in ("two-route", "all"):
        checks += suite_two_route()
    if args.suite in ("mc", "all"):
        checks += suite_mc(args.seed)
    return {"schema": CONFIG_SCHEMA, "tool": "fbfading", "version": __version__, "suite": args.suite,
            "seed": args.seed, "passed": all(c["passed"] for c in checks), "checks": checks}


# ----------------------------------------------------------------------------- entry point


_HANDLERS = {"mgf": cmd_mgf, "pdf": cmd_density, "cdf": cmd_density, "lcr": cmd_second_order,
             "afd": cmd_second_order, "sep": cmd_sep, "sample": cmd_sample, "reduce": cmd_reduce}


def _emit(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _join_negative_values(argv):
    """Let ``--grid -30:10:41:dBrange`` through argparse, which takes ``-30...`` for an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    """Execute one command; returns the process exit code."""
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = _apply_config(parser.parse_args(argv))
        if args.command == "validate":
            report = cmd_validate(args)
            _emit(json.dumps(report, indent=1) + "\n", args.out)
            return 0 if report["passed"] else 1
        if args.command == "trace":
            tr, meta = cmd_trace(args)
            fmt = args.format or "csv"
            if fmt == "bin":
                if not args.out:
                    raise ArgError("binary traces need --out")
                write_trace_binary(tr, args.out)
            elif fmt == "csv" and args.out:
                write_trace_csv(tr, args.out)
            else:
                table = CurveTable(meta, {"time": np.arange(tr.samples.size) * tr.dt, "envelope": tr.samples})
                _emit(table.to_json() if fmt == "json" else table.to_csv(), args.out)
            return 0
        table = _HANDLERS[args.command](args)
        _emit(table.to_json() if args.format == "json" else table.to_csv(), args.out)
        return 0
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ArgError, DomainError) as exc:
        print(f"fbfading: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"fbfading: numerical error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
