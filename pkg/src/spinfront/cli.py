"""Command-line front end: deterministic CSV/JSON emission for every sweep.

Five subcommands: ``evolve`` (measure trajectories for one chain), ``scan``
(start-up times vs chain length, switch detection, velocities), ``peaks``
(arrival-peak values vs chain length plus power-law fits), ``validate-rwa``
(spectrum and overlap comparison of the full vs rotating-wave Hamiltonians)
and ``heisenberg`` (start-up scan preset for the Heisenberg chain).

Output files are byte-reproducible: fixed float formatting (17 significant
digits), fixed row order, no timestamps.  Each file starts with ``#``
header lines carrying the tool version, the effective configuration and
the column schema.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 partial results (warnings listed on stderr and in the summary).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chain import ChainSpec, Model, rwa_spectral_comparison, build_mode_table
from .measures import MEASURE_NAMES, end_pair_series, series_for_measure
from .analysis import (
    PeakOrder,
    arrival_peaks,
    default_peak_horizon,
    detect_switch,
    fit_peak_scaling,
    scan_startup_multi,
    velocity,
    StartupScan,
    DEFAULT_DT,
)

_COLUMN_NAMES = {
    "cfzz": "cf_zz",
    "cfxx": "cf_xx",
    "mi": "mi",
    "cc": "cc",
    "qd": "qd",
    "eof": "eof",
}


class ConfigError(Exception):
    pass


class ComputationWarning(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    chain: ChainSpec
    measures: tuple = MEASURE_NAMES
    criteria: tuple = ()
    dt: float = DEFAULT_DT
    t_max: float | None = None
    n_range: tuple = (2, 1000, 1)
    peaks_count: int = 2
    ratios: tuple = ()
    output: str = "out"
    fmt: str = "csv"
    workers: int = 1

    def echo(self) -> dict:
        return {
            "command": self.command,
            "model": self.chain.model.value,
            "n_sites": self.chain.n_sites,
            "coupling": self.chain.coupling,
            "field": self.chain.field,
            "measures": list(self.measures),
            "criteria": list(self.criteria),
            "dt": self.dt,
            "t_max": self.t_max,
            "n_range": list(self.n_range),
            "peaks_count": self.peaks_count,
            "ratios_spec": list(self.ratios),
            "output": self.output,
            "format": self.fmt,
            "workers": self.workers,
        }


def _fmt_float(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, config: dict, columns, rows, extra_meta=()):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# spinfront {__version__}\n")
        fh.write("# config: "
                 + json.dumps(config, sort_keys=True, separators=(",", ":"))
                 + "\n")
        for line in extra_meta:
            fh.write(f"# {line}\n")
        fh.write("# columns: " + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(
                cell if isinstance(cell, str) else _fmt_float(cell)
                for cell in row) + "\n")


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _json_payload(config: dict, body: dict) -> dict:
    return {"tool": "spinfront", "version": __version__,
            "config": config, **body}


def load_scan_summary(path) -> dict:
    """Re-read a scan summary; returns {criterion: StartupScan}."""
    with open(path) as fh:
        data = json.load(fh)
    return {float(k): StartupScan.from_dict(v)
            for k, v in data["scans"].items()}


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------

def _time_grid(t_max: float, dt: float) -> np.ndarray:
    import math
    return np.arange(int(math.floor(t_max / dt + 1e-9)) + 1) * dt


def _run_evolve(cfg: RunConfig, warnings: list) -> None:
    if cfg.t_max is None:
        raise ConfigError("evolve requires --t-max")
    ts = _time_grid(cfg.t_max, cfg.dt)
    table = build_mode_table(cfg.chain)
    p1, pn, coh = end_pair_series(table, ts)
    series = {}
    need = set(cfg.measures)
    if "qd" in need:
        need.update(("mi", "cc"))
    for name in MEASURE_NAMES:
        if name in need and name != "qd":
            series[name] = series_for_measure(name, p1, pn, coh)
    if "qd" in need:
        qd = series["mi"] - series["cc"]
        qd[(qd > -1e-9) & (qd < 0.0)] = 0.0
        series["qd"] = qd
    columns = ["time"] + [_COLUMN_NAMES[m] for m in cfg.measures]
    rows = ([t] + [series[m][i] for m in cfg.measures]
            for i, t in enumerate(ts))
    out = Path(cfg.output)
    if cfg.fmt == "csv":
        _write_csv(out.with_suffix(".csv"), cfg.echo(), columns, rows)
    else:
        _write_json(out.with_suffix(".json"), _json_payload(cfg.echo(), {
            "columns": columns,
            "rows": [[float(t)] + [float(series[m][i]) for m in cfg.measures]
                     for i, t in enumerate(ts)],
        }))


def _delta_tag(criterion: float) -> str:
    return ("%g" % criterion).replace("-", "m").replace("+", "")


def _run_scan(cfg: RunConfig, warnings: list) -> None:
    if not cfg.criteria:
        raise ConfigError("scan requires at least one --delta")
    if len(cfg.measures) != 1:
        raise ConfigError("scan takes exactly one --measure")
    measure = cfg.measures[0]
    lo, hi, step = cfg.n_range
    scans = scan_startup_multi(
        cfg.chain, measure, cfg.criteria, (lo, hi), cfg.t_max, cfg.dt,
        n_step=step, workers=cfg.workers)
    stem = Path(cfg.output)
    summary_scans = {}
    for crit in cfg.criteria:
        scan = scans[float(crit)]
        if len(scan.entries) >= 8:
            scan = detect_switch(scan)
        if scan.missing:
            warnings.append(
                f"delta={crit:g}: criterion never reached for "
                f"{len(scan.missing)} lengths")
        rows = [(float(n), float(t)) for n, t in scan.entries]
        meta = []
        if scan.missing:
            meta.append("not-reached: "
                        + ",".join(str(n) for n in scan.missing))
        _write_csv(
            stem.parent / f"{stem.name}_delta{_delta_tag(crit)}.csv",
            cfg.echo(), ["n_sites", "startup_time"], rows, extra_meta=meta)
        summary_scans["%.17g" % crit] = scan.to_dict()
    _write_json(stem.parent / f"{stem.name}_summary.json",
                _json_payload(cfg.echo(), {"scans": summary_scans}))


def _run_peaks(cfg: RunConfig, warnings: list) -> None:
    if len(cfg.measures) != 1:
        raise ConfigError("peaks takes exactly one --measure")
    measure = cfg.measures[0]
    lo, hi, step = cfg.n_range
    ns = list(range(lo, hi + 1, step))
    count = cfg.peaks_count
    rows = []
    for n in ns:
        spec = cfg.chain.replace_sites(n)
        horizon = cfg.t_max if cfg.t_max is not None else \
            default_peak_horizon(n, spec.coupling)
        eps = arrival_peaks(spec, measure, horizon, cfg.dt)
        if len(eps) < count:
            warnings.append(
                f"N={n}: found {len(eps)} arrival peaks, wanted {count}")
        row = [float(n)]
        for i in range(count):
            if i < len(eps):
                row.extend([eps[i][0], eps[i][1]])
            else:
                row.extend(["", ""])
        rows.append(row)
    columns = ["n_sites"]
    for i in range(count):
        columns.extend([f"peak{i + 1}_time", f"peak{i + 1}_value"])
    stem = Path(cfg.output)
    _write_csv(stem.parent / f"{stem.name}_peaks.csv", cfg.echo(),
               columns, rows)
    fits = {}
    for order in (PeakOrder.FIRST, PeakOrder.SECOND)[:min(count, 2)]:
        try:
            fit = fit_peak_scaling(measure, order, ns, cfg.t_max, cfg.dt,
                                   spec_template=cfg.chain,
                                   workers=cfg.workers)
        except ValueError as exc:
            warnings.append(f"{order.name.lower()}-peak fit failed: {exc}")
            continue
        if fit.skipped:
            warnings.append(
                f"{order.name.lower()}-peak fit skipped lengths "
                + ",".join(str(n) for n in fit.skipped))
        fits[order.name.lower()] = fit.to_dict()
    _write_json(stem.parent / f"{stem.name}_fits.json",
                _json_payload(cfg.echo(), {"fits": fits}))


def _run_validate_rwa(cfg: RunConfig, warnings: list) -> None:
    if not cfg.ratios:
        raise ConfigError("validate-rwa requires --ratios lo:hi:count")
    lo, hi, num = cfg.ratios
    grid = np.linspace(lo, hi, int(num))
    rows_data = rwa_spectral_comparison(cfg.chain.n_sites, cfg.chain.coupling,
                                        grid)
    n_gaps = len(rows_data[0].gaps_full) if rows_data else 0
    columns = (["ratio"]
               + [f"gap_full_{i + 1}" for i in range(n_gaps)]
               + [f"gap_rwa_{i + 1}" for i in range(n_gaps)]
               + ["overlap_ground", "overlap_first", "overlap_second"])
    rows = []
    for row in rows_data:
        rows.append([row.ratio, *row.gaps_full, *row.gaps_rwa,
                     row.overlap_ground, row.overlap_first,
                     row.overlap_second])
    out = Path(cfg.output)
    _write_csv(out.with_suffix(".csv"), cfg.echo(), columns, rows)


_COMMANDS = {
    "evolve": _run_evolve,
    "scan": _run_scan,
    "peaks": _run_peaks,
    "validate-rwa": _run_validate_rwa,
    "heisenberg": _run_scan,
}


def run(cfg: RunConfig) -> int:
    """Execute one configured command; returns the process exit status."""
    warnings: list[str] = []
    try:
        _COMMANDS[cfg.command](cfg, warnings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if warnings:
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        return 4
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parse_range(text: str, default_step: int = 1) -> tuple:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
            return lo, hi, default_step
        if len(parts) == 2:
            return int(parts[0]), int(parts[1]), default_step
        if len(parts) == 3:
            return int(parts[0]), int(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise ConfigError(f"bad range {text!r}; expected lo:hi or lo:hi:step")


def _parse_ratios(text: str) -> tuple:
    parts = text.split(":")
    try:
        if len(parts) == 3:
            return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise ConfigError(f"bad ratio grid {text!r}; expected lo:hi:count")


def _parse_measures(text: str) -> tuple:
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    for m in names:
        if m not in MEASURE_NAMES:
            raise ConfigError(
                f"unknown measure {m!r}; expected one of {MEASURE_NAMES}")
    if not names:
        raise ConfigError("empty measure list")
    return names


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinfront",
        description="correlation-front dynamics for open spin chains")
    parser.add_argument("--version", action="version",
                        version=f"spinfront {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_n=False):
        p.add_argument("--model", default="ising-rwa",
                       choices=[m.value for m in Model])
        if with_n:
            p.add_argument("-N", "--n-sites", type=int, required=True)
        p.add_argument("--coupling", type=float, default=1.0)
        p.add_argument("--field", type=float, default=10.0)
        p.add_argument("--dt", type=float, default=DEFAULT_DT)
        p.add_argument("--t-max", type=float, default=None)
        p.add_argument("--output", "-o", default="out")
        p.add_argument("--format", dest="fmt", default="csv",
                       choices=["csv", "json"])
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("evolve", help="measure trajectories for one chain")
    common(p, with_n=True)
    p.add_argument("--measures", default=",".join(MEASURE_NAMES))

    p = sub.add_parser("scan", help="start-up times against chain length")
    common(p)
    p.add_argument("--measure", default="mi")
    p.add_argument("--delta", required=True,
                   help="comma-separated criteria, e.g. 1e-4,1e-5,1e-6")
    p.add_argument("--n", default="2:1000", help="length range lo:hi[:step]")

    p = sub.add_parser("peaks", help="arrival-peak values and scaling fits")
    common(p)
    p.add_argument("--measure", default="mi")
    p.add_argument("--n", default="20:500:10")
    p.add_argument("--peaks", type=int, default=2, dest="peaks_count")

    p = sub.add_parser("validate-rwa",
                       help="full vs rotating-wave spectra and overlaps")
    common(p, with_n=True)
    p.add_argument("--ratios", required=True, help="field/coupling lo:hi:count")

    p = sub.add_parser("heisenberg",
                       help="start-up scan preset for the Heisenberg chain")
    common(p)
    p.add_argument("--measure", default="cfzz")
    p.add_argument("--delta", default="1e-6")
    p.add_argument("--n", default="2:200")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    model = Model(args.model)
    if args.command == "heisenberg":
        model = Model.HEISENBERG_UNIFORM
    n_range = (2, 1000, 1)
    n_sites = getattr(args, "n_sites", None)
    if hasattr(args, "n"):
        n_range = _parse_range(args.n)
        n_sites = n_range[0]
    if args.dt <= 0:
        raise ConfigError("dt must be positive")
    if args.t_max is not None and args.t_max <= args.dt:
        raise ConfigError("t-max must exceed dt")
    if args.workers < 1:
        raise ConfigError("workers must be >= 1")
    chain = ChainSpec(model, n_sites, args.coupling, args.field)
    measures: tuple
    if hasattr(args, "measures"):
        measures = _parse_measures(args.measures)
    elif hasattr(args, "measure"):
        measures = _parse_measures(args.measure)
    else:
        measures = MEASURE_NAMES
    criteria: tuple = ()
    if hasattr(args, "delta"):
        try:
            criteria = tuple(float(d) for d in args.delta.split(","))
        except ValueError:
            raise ConfigError(f"bad --delta list: {args.delta!r}")
        if any(c <= 0 for c in criteria):
            raise ConfigError("criteria must be positive")
    ratios: tuple = ()
    if hasattr(args, "ratios"):
        ratios = _parse_ratios(args.ratios)
    return RunConfig(
        command=args.command,
        chain=chain,
        measures=measures,
        criteria=criteria,
        dt=args.dt,
        t_max=args.t_max,
        n_range=n_range,
        peaks_count=getattr(args, "peaks_count", 2),
        ratios=ratios,
        output=args.output,
        fmt=args.fmt,
        workers=args.workers,
    )


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
