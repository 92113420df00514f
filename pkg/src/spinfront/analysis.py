"""Start-up times, velocity switch detection and peak-scaling fits.

The start-up time of a correlation measure is the first time its magnitude
reaches a criterion delta on a uniform grid, refined by bisection.  Scanning
the start-up time against the chain length gives a piecewise-linear curve;
the inverse slope of a linear segment is the propagation velocity of that
correlation front.  When the leading arrival peak of the measure drops
below delta the crossing jumps to the next arrival, which shows up as a
sudden switch between two linear segments.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .chain import ChainSpec, build_mode_table
from .measures import (
    EndPairState,
    MEASURE_NAMES,
    classical_correlation,
    end_pair_series,
    series_for_measure,
)

__all__ = [
    "PeakOrder",
    "SegmentFit",
    "StartupScan",
    "PeakFit",
    "VelocityEstimate",
    "startup_time",
    "scan_startup",
    "scan_startup_multi",
    "detect_switch",
    "velocity",
    "extract_peaks",
    "arrival_peaks",
    "fit_peak_scaling",
    "fit_power_law",
    "default_scan_horizon",
    "default_peak_horizon",
]

_CHUNK = 8192
_BISECTION_FACTOR = 1000.0   # refine brackets to dt / 1000
_JUMP_FACTOR = 3.0           # a switch jump must exceed 3x the median step
_MERGE_RADIUS = 0.5          # peaks closer than 0.5/J merge into the larger
_EPISODE_FLOOR = 1e-14       # ignore float-noise maxima in episode detection

DEFAULT_DT = 0.02
DEFAULT_PEAK_RANGE = tuple(range(20, 501, 10))


class PeakOrder(Enum):
    FIRST = 0
    SECOND = 1


@dataclass(frozen=True)
class SegmentFit:
    """Least-squares line through (n_sites, startup_time) points."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class VelocityEstimate:
    """Sites per unit time for one fitted segment."""

    value: float
    reliable: bool
    note: str = ""


@dataclass(frozen=True)
class StartupScan:
    """Per-length start-up times for one (measure, criterion) pair."""

    measure: str
    criterion: float
    entries: list          # (n_sites, startup_time), sorted by n_sites
    missing: list          # lengths that never reached the criterion
    model: str
    coupling: float
    field_value: float
    dt: float
    t_max: float | None
    switch_index: int | None = None
    segment_fits: tuple = ()
    jump_candidates: tuple = ()

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "criterion": self.criterion,
            "entries": [[int(n), float(t)] for n, t in self.entries],
            "missing": [int(n) for n in self.missing],
            "model": self.model,
            "coupling": self.coupling,
            "field": self.field_value,
            "dt": self.dt,
            "t_max": self.t_max,
            "switch_index": self.switch_index,
            "switch_n_sites": (int(self.entries[self.switch_index][0])
                               if self.switch_index is not None else None),
            "segment_fits": [
                {"slope": f.slope, "intercept": f.intercept,
                 "r_squared": f.r_squared, "n_points": f.n_points}
                for f in self.segment_fits
            ],
            "jump_candidates": [int(i) for i in self.jump_candidates],
            "velocities": [
                (1.0 / f.slope) if f.slope > 0 else None
                for f in self.segment_fits
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StartupScan":
        return cls(
            measure=data["measure"],
            criterion=float(data["criterion"]),
            entries=[(int(n), float(t)) for n, t in data["entries"]],
            missing=[int(n) for n in data["missing"]],
            model=data["model"],
            coupling=float(data["coupling"]),
            field_value=float(data["field"]),
            dt=float(data["dt"]),
            t_max=data["t_max"],
            switch_index=data["switch_index"],
            segment_fits=tuple(
                SegmentFit(f["slope"], f["intercept"], f["r_squared"],
                           f["n_points"])
                for f in data["segment_fits"]
            ),
            jump_candidates=tuple(data.get("jump_candidates", ())),
        )


@dataclass(frozen=True)
class PeakFit:
    """Power-law fit value = N^alpha e^beta of arrival-peak values."""

    measure: str
    peak_order: PeakOrder
    samples: list          # (n_sites, peak_value)
    alpha: float
    beta: float
    r_squared: float
    skipped: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "peak_order": self.peak_order.name.lower(),
            "samples": [[int(n), float(v)] for n, v in self.samples],
            "alpha": self.alpha,
            "beta": self.beta,
            "r_squared": self.r_squared,
            "skipped": [int(n) for n in self.skipped],
        }


def default_scan_horizon(n_sites: int, coupling: float = 1.0) -> float:
    """Default scan horizon 2.5 N / J: covers the first two arrivals."""
    return 2.5 * n_sites / coupling


def default_peak_horizon(n_sites: int, coupling: float = 1.0) -> float:
    """Horizon for the first two arrival episodes (second tops near t = N)."""
    return (1.45 * n_sites + 30.0) / coupling


def _validate_measure(measure: str):
    if measure not in MEASURE_NAMES:
        raise ValueError(f"unknown measure {measure!r}; "
                         f"expected one of {MEASURE_NAMES}")


def _pointwise_value(table, measure: str, t: float) -> float:
    p1, pN, coh = end_pair_series(table, np.array([t]))
    return float(np.abs(series_for_measure(measure, p1, pN, coh))[0])


def _bisect_crossing(table, measure, criterion, t_lo, t_hi, tol) -> float:
    """Shrink (t_lo, t_hi] with value(t_lo) < delta <= value(t_hi)."""
    while t_hi - t_lo > tol:
        t_mid = 0.5 * (t_lo + t_hi)
        if _pointwise_value(table, measure, t_mid) >= criterion:
            t_hi = t_mid
        else:
            t_lo = t_mid
    return t_hi


def _grid_crossings(table, measure, criteria, t_max, dt):
    """First grid time with |measure| >= delta, for each delta.

    Criteria are searched together on a single sweep through the grid
    {0, dt, ..., t_max}; chunks are abandoned as soon as every criterion
    has a bracket.  For cc/qd the mutual information is used as a free
    upper bound to gate the per-point measurement optimization.
    """
    pending = sorted(set(criteria))           # ascending: smallest hits first
    hits: dict[float, float | None] = {c: None for c in criteria}
    n_pts = int(math.floor(t_max / dt + 1e-9)) + 1
    needs_opt = measure in ("cc", "qd")
    start = 0
    while start < n_pts and pending:
        idx_hi = min(start + _CHUNK, n_pts)
        ts = np.arange(start, idx_hi) * dt
        p1, pN, coh = end_pair_series(table, ts)
        if needs_opt:
            # cc and qd never exceed mi, so only run the measurement
            # optimizer at points the cheap bound lets through, in order
            mi = series_for_measure("mi", p1, pN, coh)
            for i in np.nonzero(mi >= pending[0])[0]:
                state = EndPairState(float(p1[i]), float(pN[i]),
                                     complex(coh[i]))
                cc = classical_correlation(state)
                val = abs(cc) if measure == "cc" else abs(mi[i] - cc)
                for c in list(pending):
                    if val >= c:
                        hits[c] = float(ts[i])
                        pending.remove(c)
                if not pending:
                    break
        else:
            vals = np.abs(series_for_measure(measure, p1, pN, coh))
            for c in list(pending):
                above = np.nonzero(vals >= c)[0]
                if above.size:
                    hits[c] = float(ts[above[0]])
                    pending.remove(c)
        start = idx_hi
    return hits


def startup_time(
    spec: ChainSpec,
    measure: str,
    criterion: float,
    t_max: float | None = None,
    dt: float = DEFAULT_DT,
) -> float | None:
    """First time |measure| reaches the criterion; None if it never does.

    The crossing is located on the grid {0, dt, 2 dt, ...} and refined by
    bisection between the bracketing grid points to dt / 1000.
    """
    _validate_measure(measure)
    if criterion <= 0:
        raise ValueError("criterion must be > 0")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if t_max is None:
        t_max = default_scan_horizon(spec.n_sites, spec.coupling)
    if t_max <= dt:
        raise ValueError("t_max must exceed dt")
    table = build_mode_table(spec)
    hit = _grid_crossings(table, measure, [criterion], t_max, dt)[criterion]
    if hit is None:
        return None
    if hit == 0.0:
        return 0.0
    return _bisect_crossing(table, measure, criterion, hit - dt, hit,
                            dt / _BISECTION_FACTOR)


def _scan_task(args):
    spec_template, n, measure, criteria, t_max, dt = args
    spec = spec_template.replace_sites(n)
    table = build_mode_table(spec)
    horizon = t_max if t_max is not None else default_scan_horizon(
        n, spec.coupling)
    hits = _grid_crossings(table, measure, criteria, horizon, dt)
    out = {}
    for c, hit in hits.items():
        if hit is None or hit == 0.0:
            out[c] = hit
        else:
            out[c] = _bisect_crossing(table, measure, c, hit - dt, hit,
                                      dt / _BISECTION_FACTOR)
    return n, out


def _run_tasks(task_fn, args_list, workers: int):
    if workers <= 1:
        return [task_fn(a) for a in args_list]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, args_list))


def _n_values(n_range, n_step):
    lo, hi = n_range
    if lo < 2 or hi > 1000 or lo > hi:
        raise ValueError(f"n_range must lie within [2, 1000], got {n_range}")
    return list(range(lo, hi + 1, n_step))


def scan_startup_multi(
    spec_template: ChainSpec,
    measure: str,
    criteria,
    n_range,
    t_max: float | None = None,
    dt: float = DEFAULT_DT,
    n_step: int = 1,
    workers: int = 1,
) -> dict[float, StartupScan]:
    """Start-up scans for several criteria sharing one trajectory sweep."""
    _validate_measure(measure)
    criteria = [float(c) for c in criteria]
    if not criteria or any(c <= 0 for c in criteria):
        raise ValueError("criteria must be positive and non-empty")
    ns = _n_values(n_range, n_step)
    args = [(spec_template, n, measure, tuple(criteria), t_max, dt)
            for n in ns]
    results = _run_tasks(_scan_task, args, workers)
    scans = {}
    for c in criteria:
        entries = [(n, res[c]) for n, res in results if res[c] is not None]
        missing = [n for n, res in results if res[c] is None]
        scans[c] = StartupScan(
            measure=measure, criterion=c, entries=entries, missing=missing,
            model=spec_template.model.value, coupling=spec_template.coupling,
            field_value=spec_template.field, dt=dt, t_max=t_max,
        )
    return scans


def scan_startup(
    spec_template: ChainSpec,
    measure: str,
    criterion: float,
    n_range,
    t_max: float | None = None,
    dt: float = DEFAULT_DT,
    n_step: int = 1,
    workers: int = 1,
) -> StartupScan:
    """Start-up time for every chain length in the range (inclusive)."""
    return scan_startup_multi(
        spec_template, measure, [criterion], n_range, t_max, dt, n_step,
        workers)[float(criterion)]


def _line_fit(x: np.ndarray, y: np.ndarray) -> SegmentFit:
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    pred = a @ np.array([slope, intercept])
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res < 1e-30 else 0.0
    return SegmentFit(float(slope), float(intercept), r2, len(x))


def detect_switch(scan: StartupScan) -> StartupScan:
    """Locate the sudden jump in the start-up curve and fit the segments.

    The largest forward difference marks a switch only if it exceeds three
    times the median forward difference; all candidate jumps above that
    threshold are recorded for reporting.
    """
    if len(scan.entries) < 8:
        raise ValueError(
            f"need at least 8 entries to detect a switch, got "
            f"{len(scan.entries)}")
    ns = np.array([n for n, _ in scan.entries], dtype=float)
    ts = np.array([t for _, t in scan.entries], dtype=float)
    diffs = np.diff(ts)
    median = float(np.median(diffs))
    best = int(np.argmax(diffs))
    threshold = _JUMP_FACTOR * median
    candidates = tuple(int(i) + 1 for i in np.nonzero(diffs > threshold)[0])
    if diffs[best] > threshold:
        sw = best + 1
        fits = []
        for seg in (slice(0, sw), slice(sw, len(ns))):
            if ns[seg].size >= 2:
                fits.append(_line_fit(ns[seg], ts[seg]))
            else:
                fits.append(SegmentFit(math.nan, math.nan, 0.0, ns[seg].size))
        return replace(scan, switch_index=sw, segment_fits=tuple(fits),
                       jump_candidates=candidates)
    return replace(scan, switch_index=None,
                   segment_fits=(_line_fit(ns, ts),),
                   jump_candidates=candidates)


def velocity(scan: StartupScan, segment: int) -> VelocityEstimate:
    """Inverse slope of one fitted segment, in sites per unit time."""
    if segment < 0 or segment >= len(scan.segment_fits):
        raise ValueError(f"no segment fit with index {segment}")
    fit = scan.segment_fits[segment]
    notes = []
    if not fit.slope > 0:
        notes.append("non-positive slope")
    if fit.r_squared < 0.98:
        notes.append(f"r_squared {fit.r_squared:.4f} below 0.98")
    value = 1.0 / fit.slope if fit.slope != 0 else math.inf
    return VelocityEstimate(value=float(value), reliable=not notes,
                            note="; ".join(notes))


# ---------------------------------------------------------------------------
# peaks
# ---------------------------------------------------------------------------

def _refine_parabolic(ts, vs, i, dt):
    """Vertex of the parabola through three neighboring grid samples."""
    denom = vs[i - 1] - 2.0 * vs[i] + vs[i + 1]
    if denom >= 0.0:
        return float(ts[i]), float(vs[i])
    shift = 0.5 * (vs[i - 1] - vs[i + 1]) / denom
    t_pk = float(ts[i]) + shift * dt
    v_pk = float(vs[i]) - 0.25 * (vs[i - 1] - vs[i + 1]) * shift
    return t_pk, v_pk


def _merged_maxima(ts, vs, dt, merge_radius):
    idx = np.nonzero((vs[1:-1] > vs[:-2]) & (vs[1:-1] > vs[2:]))[0] + 1
    peaks = []
    for i in idx:
        t_pk, v_pk = _refine_parabolic(ts, vs, int(i), dt)
        if peaks and t_pk - peaks[-1][0] < merge_radius:
            if v_pk > peaks[-1][1]:
                peaks[-1] = (t_pk, v_pk)
        else:
            peaks.append((t_pk, v_pk))
    return peaks


def _measure_magnitude_curve(spec, measure, t_max, dt):
    table = build_mode_table(spec)
    n_pts = int(math.floor(t_max / dt + 1e-9)) + 1
    ts = np.arange(n_pts) * dt
    p1, pN, coh = end_pair_series(table, ts)
    return ts, np.abs(series_for_measure(measure, p1, pN, coh))


def extract_peaks(
    spec: ChainSpec,
    measure: str,
    t_max: float,
    dt: float,
    count: int,
    min_value: float = 0.0,
) -> list:
    """First `count` local maxima of |measure|(t), in time order.

    A local maximum is a grid point exceeding both neighbors, refined by
    parabolic interpolation; maxima closer than 0.5/J to a larger one are
    merged into it.  ``min_value`` filters out maxima below a floor (raw
    maxima down at float-noise scale are genuine grid maxima but carry no
    information).  Returns fewer peaks when fewer exist.
    """
    _validate_measure(measure)
    if count < 1:
        raise ValueError("count must be >= 1")
    if dt > 0.05 / spec.coupling + 1e-12:
        raise ValueError("dt too coarse to resolve oscillations "
                         f"(need dt <= {0.05 / spec.coupling})")
    ts, vs = _measure_magnitude_curve(spec, measure, t_max, dt)
    peaks = _merged_maxima(ts, vs, dt, _MERGE_RADIUS / spec.coupling)
    peaks = [(t, v) for t, v in peaks if v >= min_value]
    return peaks[:count]


def arrival_peaks(
    spec: ChainSpec,
    measure: str,
    t_max: float,
    dt: float = DEFAULT_DT,
    min_value: float = _EPISODE_FLOOR,
) -> list:
    """Maxima of successive arrival episodes of the correlation front.

    Every pass of the front past the chain ends produces one burst of local
    maxima; the burst maximum is the value a threshold criterion competes
    against.  A merged local maximum tops its episode when it exceeds every
    earlier maximum (the episode tops grow from one arrival to the next)
    and the maximum that follows it is smaller.  Precursor ripples below
    ``min_value`` are float noise and are skipped.
    """
    _validate_measure(measure)
    ts, vs = _measure_magnitude_curve(spec, measure, t_max, dt)
    peaks = _merged_maxima(ts, vs, dt, _MERGE_RADIUS / spec.coupling)
    peaks = [(t, v) for t, v in peaks if v >= min_value]
    episodes = []
    running = -math.inf
    for i, (t, v) in enumerate(peaks):
        if v > running:
            running = v
            if i + 1 < len(peaks) and peaks[i + 1][1] < v:
                episodes.append((t, v))
    return episodes


def fit_power_law(samples) -> tuple:
    """(alpha, beta, r_squared) of value = N^alpha e^beta from (N, value)s."""
    log_n = np.log([n for n, _ in samples])
    log_v = np.log([v for _, v in samples])
    fit = _line_fit(log_n, log_v)
    return fit.slope, fit.intercept, fit.r_squared


def _peak_task(args):
    spec_template, n, measure, order_index, t_max, dt = args
    spec = spec_template.replace_sites(n)
    horizon = t_max if t_max is not None else default_peak_horizon(
        n, spec.coupling)
    eps = arrival_peaks(spec, measure, horizon, dt)
    if len(eps) <= order_index:
        return n, None
    return n, eps[order_index][1]


def fit_peak_scaling(
    measure: str,
    peak_order: PeakOrder,
    n_samples=DEFAULT_PEAK_RANGE,
    t_max: float | None = None,
    dt: float = DEFAULT_DT,
    spec_template: ChainSpec | None = None,
    workers: int = 1,
) -> PeakFit:
    """Ordinary least squares of log(peak value) against log(N).

    The model is value = N^alpha e^beta.  Lengths whose requested arrival
    peak is not found are skipped with a warning entry; at least 5
    surviving points are required.
    """
    _validate_measure(measure)
    from .chain import Model  # local import to avoid cycle noise
    if spec_template is None:
        spec_template = ChainSpec(Model.ISING_RWA, 2)
    ns = sorted(set(int(n) for n in n_samples))
    if any(n < 3 for n in ns):
        raise ValueError("peak scaling needs n_sites >= 3")
    args = [(spec_template, n, measure, peak_order.value, t_max, dt)
            for n in ns]
    results = _run_tasks(_peak_task, args, workers)
    samples = [(n, v) for n, v in results if v is not None and v > 0]
    skipped = [n for n, v in results if v is None or v <= 0]
    if len(samples) < 5:
        raise ValueError(
            f"peak-scaling fit needs at least 5 points, got {len(samples)}")
    alpha, beta, r2 = fit_power_law(samples)
    return PeakFit(measure=measure, peak_order=peak_order, samples=samples,
                   alpha=alpha, beta=beta, r_squared=r2, skipped=skipped)
