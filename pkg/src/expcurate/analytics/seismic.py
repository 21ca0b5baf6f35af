"""Seismic analytics: STA/LTA event detection and S-P epicenter location.

Station coordinates are planar kilometres; at the regional scale these
events live on, the flat-earth error is negligible. Per-station source
distance comes from the S-P arrival difference,
d = dt * vp * vs / (vp - vs), and the epicenter is the Gauss-Newton
least-squares fit of the circle residuals, started at the station centroid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from typing import Optional

import numpy as np

from expcurate.errors import CurationError, Underdetermined, WindowTooLong
from expcurate.metamodel import canonical_encode, format_timestamp, new_id, parse_timestamp
from expcurate.metamodel.types import Action, Artefact
from expcurate.ingest.signal import SignalTrace
from expcurate.store import Store

DEFAULT_VP_KM_S = 6.0  # typical crustal P velocity
DEFAULT_VS_KM_S = 3.5  # typical crustal S velocity
GN_MAX_ITER = 100
GN_STEP_TOL_KM = 1e-6
EVENT_STRUCTURE = "located-event"


# --- detection --------------------------------------------------------------


def sta_lta_detect(trace: SignalTrace, sta_s, lta_s, on_ratio, off_ratio):
    """Trigger intervals from the short/long mean-absolute-amplitude ratio.

    An interval opens when the ratio exceeds on_ratio and closes when it
    drops below off_ratio; intervals are disjoint, ordered (start, end)
    sample pairs with an exclusive end.
    """
    if not (lta_s > sta_s > 0):
        raise WindowTooLong(f"need lta_s > sta_s > 0, got sta={sta_s}, lta={lta_s}")
    n = len(trace.samples)
    ns = max(1, round(sta_s * trace.sample_rate_hz))
    nl = round(lta_s * trace.sample_rate_hz)
    if nl > n:
        raise WindowTooLong(f"lta window of {nl} samples exceeds trace length {n}")
    amp = np.abs(np.asarray(trace.samples, dtype=float))
    prefix = np.concatenate([[0.0], np.cumsum(amp)])
    intervals = []
    open_at = None
    for i in range(nl - 1, n):
        sta = (prefix[i + 1] - prefix[i + 1 - ns]) / ns
        lta = (prefix[i + 1] - prefix[i + 1 - nl]) / nl
        ratio = sta / lta if lta > 0 else 0.0
        if open_at is None:
            if ratio > on_ratio:
                open_at = i
        elif ratio < off_ratio:
            intervals.append((open_at, i))
            open_at = None
    if open_at is not None:
        intervals.append((open_at, n))
    return intervals


# --- location ---------------------------------------------------------------


@dataclass(frozen=True)
class PhasePick:
    station_id: str
    x_km: float
    y_km: float
    p_arrival: datetime
    s_arrival: datetime
    picker: str = ""

    def __post_init__(self):
        if self.s_arrival <= self.p_arrival:
            raise CurationError(f"{self.station_id}: s_arrival must be after p_arrival")

    @property
    def sp_seconds(self) -> float:
        return (self.s_arrival - self.p_arrival).total_seconds()

    def to_record(self):
        return {
            "station_id": self.station_id,
            "x_km": self.x_km,
            "y_km": self.y_km,
            "p_arrival": format_timestamp(self.p_arrival),
            "s_arrival": format_timestamp(self.s_arrival),
            "picker": self.picker,
        }

    @classmethod
    def from_record(cls, d):
        return cls(
            station_id=d["station_id"],
            x_km=float(d["x_km"]),
            y_km=float(d["y_km"]),
            p_arrival=parse_timestamp(d["p_arrival"]),
            s_arrival=parse_timestamp(d["s_arrival"]),
            picker=d.get("picker", ""),
        )


@dataclass(frozen=True)
class EpicenterSolution:
    epicenter: tuple  # (x_km, y_km)
    residual_rms_km: float
    station_count: int
    distances: dict  # station_id -> modeled distance, km
    warnings: tuple = field(default=())

    def to_record(self):
        return {
            "epicenter": {"x_km": self.epicenter[0], "y_km": self.epicenter[1]},
            "residual_rms_km": self.residual_rms_km,
            "station_count": self.station_count,
            "distances": dict(self.distances),
            "warnings": list(self.warnings),
        }


def sp_distance_km(sp_seconds, vp_km_s=DEFAULT_VP_KM_S, vs_km_s=DEFAULT_VS_KM_S) -> float:
    """d = dt * vp * vs / (vp - vs)."""
    if not (vp_km_s > vs_km_s > 0):
        raise CurationError(f"need vp > vs > 0, got vp={vp_km_s}, vs={vs_km_s}")
    return sp_seconds * vp_km_s * vs_km_s / (vp_km_s - vs_km_s)


def _collinear(stations) -> bool:
    centered = stations - stations.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    return sv[-1] <= 1e-9 * max(sv[0], 1.0)


def _gauss_newton(stations, d, x0):
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(GN_MAX_ITER):
        offsets = x - stations
        ranges = np.linalg.norm(offsets, axis=1)
        safe = np.maximum(ranges, 1e-12)
        residuals = ranges - d
        jacobian = offsets / safe[:, None]
        step, *_ = np.linalg.lstsq(jacobian, -residuals, rcond=None)
        x = x + step
        if np.linalg.norm(step) < GN_STEP_TOL_KM:
            break
    return x


def _objective(stations, d, x):
    return float(((np.linalg.norm(x - stations, axis=1) - d) ** 2).sum())


def locate_epicenter(picks, vp_km_s=DEFAULT_VP_KM_S, vs_km_s=DEFAULT_VS_KM_S) -> EpicenterSolution:
    """Gauss-Newton minimization of the circle residuals sum((|x - s_i| - d_i)^2).

    Iteration starts at the station centroid. Near-collinear networks have a
    mirror basin across the station line; a deterministic coarse-grid restart
    replaces the centroid solution when it provably missed the global basin.
    """
    picks = list(picks)
    if len(picks) < 3:
        raise Underdetermined(f"need at least 3 picks, got {len(picks)}")
    stations = np.array([[p.x_km, p.y_km] for p in picks], dtype=float)
    d = np.array([sp_distance_km(p.sp_seconds, vp_km_s, vs_km_s) for p in picks])
    warnings = []
    if _collinear(stations):
        warnings.append("stations nearly collinear; solution may be degenerate")

    x = _gauss_newton(stations, d, stations.mean(axis=0))
    best_cost = _objective(stations, d, x)

    pad = float(d.max())
    gx = np.linspace(stations[:, 0].min() - pad, stations[:, 0].max() + pad, 41)
    gy = np.linspace(stations[:, 1].min() - pad, stations[:, 1].max() + pad, 41)
    grid_x, grid_y = np.meshgrid(gx, gy)
    cost = np.zeros_like(grid_x)
    for (sx, sy), di in zip(stations, d):
        cost += (np.hypot(grid_x - sx, grid_y - sy) - di) ** 2
    at = np.unravel_index(np.argmin(cost), cost.shape)
    if float(cost[at]) < best_cost:
        restart = _gauss_newton(stations, d, (grid_x[at], grid_y[at]))
        if _objective(stations, d, restart) < best_cost:
            x = restart

    final = np.linalg.norm(x - stations, axis=1) - d
    return EpicenterSolution(
        epicenter=(float(x[0]), float(x[1])),
        residual_rms_km=float(np.sqrt(np.mean(final**2))),
        station_count=len(picks),
        distances={p.station_id: float(di) for p, di in zip(picks, d)},
        warnings=tuple(warnings),
    )


def forward_model_picks(epicenter, stations, origin_time, vp_km_s=DEFAULT_VP_KM_S,
                        vs_km_s=DEFAULT_VS_KM_S, picker="") -> list:
    """Exact P/S arrivals for a known source; the inverse of locate_epicenter."""
    from datetime import timedelta

    ex, ey = epicenter
    picks = []
    for station_id, sx, sy in stations:
        dist = float(np.hypot(sx - ex, sy - ey))
        tp = origin_time + timedelta(seconds=dist / vp_km_s)
        ts = origin_time + timedelta(seconds=dist / vs_km_s)
        picks.append(
            PhasePick(
                station_id=station_id, x_km=sx, y_km=sy,
                p_arrival=tp, s_arrival=ts, picker=picker,
            )
        )
    return picks


# --- catalogued events --------------------------------------------------------


@dataclass(frozen=True)
class EventResult:
    artefact: Artefact
    action: Action
    solution: EpicenterSolution


def event_blob(solution: EpicenterSolution, stations, year, magnitude) -> bytes:
    return canonical_encode(
        {
            "stations": list(stations),
            "year": int(year),
            "magnitude": float(magnitude),
            "epicenter": {
                "x_km": solution.epicenter[0],
                "y_km": solution.epicenter[1],
            },
            "residual_rms_km": solution.residual_rms_km,
        }
    )


def record_event(store: Store, experiment_id, picks, *, year, magnitude,
                 vp_km_s=DEFAULT_VP_KM_S, vs_km_s=DEFAULT_VS_KM_S,
                 input_release_ids=(), executor=None) -> EventResult:
    """Locate and catalogue one event as a located-event artefact.

    Year and magnitude are analyst-supplied annotations; nothing here
    computes a magnitude.
    """
    store.require(experiment_id)
    solution = locate_epicenter(picks, vp_km_s, vs_km_s)
    stations = [p.station_id for p in picks]
    blob = event_blob(solution, stations, year, magnitude)
    digest = store.put_blob(blob)
    started = store.next_timestamp()
    action_id = new_id("act")
    artefact = Artefact(
        id=new_id("art"),
        action_id=action_id,
        structure=EVENT_STRUCTURE,
        metrics={
            "x_km": solution.epicenter[0],
            "y_km": solution.epicenter[1],
            "residual_rms_km": solution.residual_rms_km,
            "stations": len(stations),
            "magnitude": float(magnitude),
            "year": int(year),
        },
        blob_hash=digest,
    )
    action = Action(
        id=action_id,
        experiment_id=experiment_id,
        kind_of_step="automated",
        operation="locate_event",
        parameters={
            "picks": [p.to_record() for p in picks],
            "vp_km_s": vp_km_s,
            "vs_km_s": vs_km_s,
            "year": int(year),
            "magnitude": float(magnitude),
        },
        inputs=tuple(input_release_ids),
        outputs=(artefact.id,),
        executor=executor or "locate_event",
        evaluation={"residual_rms_km": solution.residual_rms_km},
        validation_protocol="senior review before bulletin inclusion",
        started_at=started,
        finished_at=store.next_timestamp(),
        status="succeeded",
    )
    store.append_batch([artefact, action])
    return EventResult(artefact=artefact, action=action, solution=solution)
