"""Command-line interface.

Subcommands: ``point``, ``sweep``, ``regions``, ``wigner``, ``verify`` and
``optimize``.  Output is CSV (default) or JSON, numbers with 9 significant
digits.  An optional ``--config`` file holds ``key = value`` lines and
``#`` comments; flags given on the command line take precedence.

Exit codes: 0 success, 1 domain error, 2 verification failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import analytic, fock_oracle, metrics, sweep
from .exceptions import CutoffError, GridTooCoarseError, ParameterDomainError, ZeroProbabilityError
from .scattering import InterferometerParams

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_VERIFY = 2
EXIT_IO = 3

VERIFY_TOL = 1e-7
VERIFY_CUTOFF = 40
VERIFY_POINTS = 21
VERIFY_ETAS = (0.2, 0.5, 0.8)
VERIFY_ALPHAS = (1.0, 2.0, 3.0)
WIGNER_POINTS = 101

SWEEP_HEADER = (
    "mode", "eta1", "eta2", "eta3", "alpha",
    "p_d", "g2", "db_x", "db_p", "delta", "bunching", "squeezed",
)


class UsageError(ValueError):
    """Bad configuration: unknown keys, unparsable or out-of-range values."""


@dataclass
class RunConfig:
    command: str = ""
    alpha: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    eta3: float | None = None
    mode: str = "diagonal"
    eta_start: float = 0.0
    eta_stop: float = 1.0
    eta_step: float = sweep.DEFAULT_STEP
    alphas: tuple = (1.0,)
    metrics: tuple = sweep.METRICS
    output: str | None = None
    format: str = "csv"
    cutoff: int | None = None
    points: int | None = None
    bound: float | None = None
    quadrature: str = "x"
    workers: int | None = None

    def params(self) -> InterferometerParams:
        missing = [k for k in ("alpha", "eta1", "eta2", "eta3") if getattr(self, k) is None]
        if missing:
            raise UsageError(f"missing parameters: {', '.join(missing)}")
        return InterferometerParams(self.alpha, self.eta1, self.eta2, self.eta3)

    def has_point(self) -> bool:
        return any(getattr(self, k) is not None for k in ("alpha", "eta1", "eta2", "eta3"))


def _float_list(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _word_list(text: str) -> tuple:
    return tuple(v for v in text.replace(",", " ").split())


_CONFIG_TYPES = {
    "alpha": float,
    "eta1": float,
    "eta2": float,
    "eta3": float,
    "mode": str,
    "eta_start": float,
    "eta_stop": float,
    "eta_step": float,
    "alphas": _float_list,
    "metrics": _word_list,
    "output": str,
    "format": str,
    "cutoff": int,
    "points": int,
    "bound": float,
    "quadrature": str,
    "workers": int,
}


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; unknown keys and bad values are rejected."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_TYPES[key](value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


# -- formatting ------------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return float(f"{value:.9g}") if math.isfinite(value) else None
    return str(value)


def render(records: list[dict], header, fmt_name: str, comments=()) -> str:
    if fmt_name == "json":
        doc = [{k: _json_value(r.get(k)) for k in header} for r in records]
        if comments:
            doc = {"records": doc, "summary": {k: _json_value(v) for k, v in comments}}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        writer.writerow([fmt(r.get(k)) for k in header])
    for key, value in comments:
        buf.write(f"# {key}={fmt(value)}\n")
    return buf.getvalue()


def emit(text: str, output: str | None):
    if output is None:
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _split_complex(prefix: str, z: complex) -> dict:
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


# -- commands --------------------------------------------------------------------


POINT_HEADER = (
    "alpha", "eta1", "eta2", "eta3", "p_d",
    "c0_re", "c0_im", "c1_re", "c1_im", "c2_re", "c2_im", "beta0_re", "beta0_im",
    "g2", "bunching", "var_x", "var_p", "db_x", "db_p", "delta", "min_w",
)


def cmd_point(cfg: RunConfig) -> tuple[str, int]:
    params = cfg.params()
    grid = None
    if cfg.points is not None:
        grid = metrics.WignerGrid.around(params, cfg.points)
    report = metrics.evaluate_point(params, grid)
    st = report.state
    q = report.quadratures
    record = {
        "alpha": params.alpha.real, "eta1": params.eta1, "eta2": params.eta2, "eta3": params.eta3,
        "p_d": st.p_d,
        **_split_complex("c0", st.c0), **_split_complex("c1", st.c1),
        **_split_complex("c2", st.c2), **_split_complex("beta0", st.beta0),
        "g2": report.g2, "bunching": report.bunching or "undefined",
        "var_x": q.var_x, "var_p": q.var_p, "db_x": q.db_x, "db_p": q.db_p,
        "delta": report.delta, "min_w": report.min_w,
    }
    return render([record], POINT_HEADER, cfg.format), EXIT_OK


def _sweep_spec(cfg: RunConfig, wanted=None) -> sweep.SweepSpec:
    return sweep.SweepSpec(
        cfg.mode, cfg.eta_start, cfg.eta_stop, cfg.eta_step, cfg.alphas,
        cfg.metrics if wanted is None else wanted,
    )


def cmd_sweep(cfg: RunConfig) -> tuple[str, int]:
    spec = _sweep_spec(cfg)
    records = []
    for rec in sweep.grid_sweep(spec, cfg.workers):
        p = rec.params
        row = {
            "mode": rec.mode, "eta1": p.eta1, "eta2": p.eta2, "eta3": p.eta3, "alpha": p.alpha.real,
            "bunching": rec.bunching, "squeezed": rec.squeezed,
        }
        row.update(rec.values)
        records.append(row)
    return render(records, SWEEP_HEADER, cfg.format), EXIT_OK


def cmd_regions(cfg: RunConfig) -> tuple[str, int]:
    region = sweep.region_classify(_sweep_spec(cfg, ("g2", "db_x")), cfg.workers)
    records = [
        {"mode": region.mode, "eta": eta, "alpha": alpha, "bunching": label, "squeezed": flag}
        for eta, alpha, label, flag in region.rows()
    ]
    return render(records, ("mode", "eta", "alpha", "bunching", "squeezed"), cfg.format), EXIT_OK


def cmd_wigner(cfg: RunConfig) -> tuple[str, int]:
    params = cfg.params()
    n = cfg.points or WIGNER_POINTS
    if cfg.bound is not None:
        if not cfg.bound > 0:
            raise UsageError("bound must be positive")
        grid = metrics.WignerGrid(-cfg.bound, cfg.bound, -cfg.bound, cfg.bound, n, n)
    else:
        grid = metrics.WignerGrid.around(params, n)
    values = metrics.wigner_values(params, grid)
    q, p = grid.mesh()
    records = [
        {"q": qi, "p": pi, "W": wi} for qi, pi, wi in zip(q.ravel(), p.ravel(), values.ravel())
    ]
    delta = metrics.negativity_volume(params)
    summary = (("min_w", float(values.min())), ("delta", delta))
    return render(records, ("q", "p", "W"), cfg.format, summary), EXIT_OK


VERIFY_HEADER = (
    "alpha", "eta1", "eta2", "eta3", "cutoff", "leakage",
    "dev_p_d", "dev_moments", "dev_wigner", "status",
)


def verify_point(params: InterferometerParams, cutoff: int, points: int = VERIFY_POINTS) -> dict:
    """Largest analytic-vs-oracle deviations at one parameter point."""
    vec, p_oracle, leakage = fock_oracle.simulate(params, cutoff, enforce_floor=False)
    p_analytic = analytic.success_probability_closed(params)
    table = analytic.moment_table(params, 2)
    dev_m = max(
        abs(table[k, l] - fock_oracle.oracle_moment(vec, k, l)) for k in range(3) for l in range(3)
    )
    grid = metrics.WignerGrid.around(params, points)
    q, p = grid.mesh()
    dev_w = float(np.max(np.abs(analytic.wigner_grid(params, q, p) - fock_oracle.oracle_wigner(vec, q, p))))
    devs = (abs(p_analytic - p_oracle), float(dev_m), dev_w)
    return {
        "alpha": params.alpha.real, "eta1": params.eta1, "eta2": params.eta2, "eta3": params.eta3,
        "cutoff": cutoff, "leakage": leakage,
        "dev_p_d": devs[0], "dev_moments": devs[1], "dev_wigner": devs[2],
        "status": "pass" if max(devs) < VERIFY_TOL else "fail",
    }


def _limit_summary(alpha: float) -> list[tuple[str, float | None]]:
    """g2 near both ends of the two scan families, reported side by side."""
    out = []
    for label, make in (
        ("diagonal", lambda e: InterferometerParams(alpha, e, e, e)),
        ("eta2_only", lambda e: InterferometerParams(alpha, 0.5, e, 0.5)),
    ):
        for end in (1e-6, 1.0 - 1e-6):
            try:
                value = metrics.g2(make(end))
            except ArithmeticError:
                value = None
            out.append((f"g2_{label}_eta_{end:.6g}", value))
    return out


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    if cfg.has_point():
        points = [cfg.params()]
    else:
        points = [
            InterferometerParams(a, e1, e2, e3)
            for a in VERIFY_ALPHAS for e1 in VERIFY_ETAS for e2 in VERIFY_ETAS for e3 in VERIFY_ETAS
        ]
    records = []
    for params in points:
        cutoff = cfg.cutoff or max(VERIFY_CUTOFF, fock_oracle.cutoff_floor(params.alpha))
        records.append(verify_point(params, cutoff, cfg.points or VERIFY_POINTS))
    failed = [r for r in records if r["status"] == "fail"]
    summary = [
        ("max_dev_p_d", max(r["dev_p_d"] for r in records)),
        ("max_dev_moments", max(r["dev_moments"] for r in records)),
        ("max_dev_wigner", max(r["dev_wigner"] for r in records)),
        ("threshold", VERIFY_TOL),
        ("failures", len(failed)),
    ]
    if not cfg.has_point():
        summary += _limit_summary(1.0)
    text = render(records, VERIFY_HEADER, cfg.format, summary)
    if failed:
        worst = max(failed, key=lambda r: r["leakage"])
        floor = fock_oracle.cutoff_floor(worst["alpha"])
        hint = ""
        if worst["leakage"] > 1e-12 or worst["cutoff"] < floor:
            hint = f"; cutoff {worst['cutoff']} leaks {worst['leakage']:.3g} of the norm (floor {floor})"
        sys.stderr.write(f"verification failed at {len(failed)} point(s){hint}\n")
        return text, EXIT_VERIFY
    return text, EXIT_OK


def cmd_optimize(cfg: RunConfig) -> tuple[str, int]:
    if cfg.alpha is None:
        raise UsageError("optimize needs --alpha")
    records = []
    for label, diagonal in (("diagonal", True), ("full", False)):
        res = sweep.maximize_squeezing(cfg.alpha, cfg.quadrature, diagonal=diagonal)
        records.append({
            "search": label, "alpha": cfg.alpha, "quadrature": cfg.quadrature,
            "eta1": res.etas[0], "eta2": res.etas[1], "eta3": res.etas[2],
            "variance": res.variance, "db": res.db,
        })
    header = ("search", "alpha", "quadrature", "eta1", "eta2", "eta3", "variance", "db")
    return render(records, header, cfg.format), EXIT_OK


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "regions": cmd_regions,
    "wigner": cmd_wigner,
    "verify": cmd_verify,
    "optimize": cmd_optimize,
}


# -- argument handling -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which is taken here by
    # verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override its entries")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))

    point = _Parser(add_help=False)
    point.add_argument("--alpha", type=float)
    point.add_argument("--eta", type=float, nargs=3, metavar=("E1", "E2", "E3"))

    scan = _Parser(add_help=False)
    scan.add_argument("--mode", choices=sweep.MODES)
    scan.add_argument("--eta-range", type=float, nargs=2, metavar=("START", "STOP"))
    scan.add_argument("--eta-step", type=float)
    scan.add_argument("--alphas", type=float, nargs="+")
    scan.add_argument("--workers", type=int)

    parser = _Parser(prog="su3herald", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", parents=[common, point], help="all metrics at one point")
    p.add_argument("--points", type=int, help="Wigner grid points per axis for delta")

    s = sub.add_parser("sweep", parents=[common, scan], help="one-parameter scan")
    s.add_argument("--metrics", nargs="+", choices=sweep.METRICS)

    sub.add_parser("regions", parents=[common, scan], help="bunching/squeezing map")

    w = sub.add_parser("wigner", parents=[common, point], help="Wigner function on a grid")
    w.add_argument("--points", type=int)
    w.add_argument("--bound", type=float, help="half-width of the square (q, p) window")

    v = sub.add_parser("verify", parents=[common, point], help="analytic vs Fock oracle")
    v.add_argument("--cutoff", type=int)
    v.add_argument("--points", type=int)

    o = sub.add_parser("optimize", parents=[common], help="maximal quadrature squeezing")
    o.add_argument("--alpha", type=float)
    o.add_argument("--quadrature", choices=("x", "p"))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    if "eta" in flags:
        flags["eta1"], flags["eta2"], flags["eta3"] = flags.pop("eta")
    if "eta_range" in flags:
        flags["eta_start"], flags["eta_stop"] = flags.pop("eta_range")
    for key in ("alphas", "metrics"):
        if key in flags:
            flags[key] = tuple(flags[key])
    values.update(flags)
    known = {f.name for f in fields(RunConfig)}
    cfg = replace(RunConfig(command=args.command), **{k: v for k, v in values.items() if k in known})
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.cutoff is not None and cfg.cutoff < 1:
        raise UsageError("cutoff must be positive")
    if cfg.points is not None and cfg.points < 2:
        raise UsageError("points must be at least 2")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_DOMAIN
    try:
        cfg = resolve_config(args)
        text, code = COMMANDS[cfg.command](cfg)
        emit(text, cfg.output)
        return code
    except OSError as exc:
        sys.stderr.write(f"su3herald: I/O error: {exc}\n")
        return EXIT_IO
    except (ParameterDomainError, ZeroProbabilityError, CutoffError, GridTooCoarseError,
            UsageError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"su3herald: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
