"""Event-driven simulation of the tandem chain with seeded, replicable streams.

The jump chain is simulated by a kernel with two interchangeable backends: a
compiled extension and a pure-Python twin. Both consume the same pinned
random-number algorithm (see _rng) and the same floating-point expression
order, so a given (spec, config, seed) produces bit-identical statistics on
either backend. Replication k runs on stream seed + k (mod 2**64) and results
are merged in replication order, so the replication count is also part of the
deterministic contract.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import OutOfRangeError, SimulationTimeout
from .rates import Base, SaturatedN, SaturatedStar, State, SystemSpec

try:
    from . import _simcore as _compiled
except ImportError:
    _compiled = None
from . import _simcore_py as _pure

HAVE_COMPILED = _compiled is not None

_SEED_MOD = 1 << 64


def kernel_for(backend: str = "auto"):
    """Resolve a backend name to a kernel module.

    "auto" prefers the compiled extension and falls back to pure Python;
    "compiled" and "python" force one side (compiled raises if the extension
    failed to build).
    """
    if backend == "auto":
        return _compiled if _compiled is not None else _pure
    if backend == "compiled":
        if _compiled is None:
            raise OutOfRangeError("compiled kernel is not available")
        return _compiled
    if backend == "python":
        return _pure
    raise OutOfRangeError(f"unknown backend {backend!r}")


def _variant_code(spec: SystemSpec) -> tuple[int, int]:
    v = spec.variant
    if isinstance(v, Base):
        return 0, 0
    if isinstance(v, SaturatedN):
        return 1, v.level
    if isinstance(v, SaturatedStar):
        return 2, 0
    raise OutOfRangeError(f"unknown variant {v!r}")


@dataclass(frozen=True)
class SimConfig:
    """Settings for one simulation experiment.

    seed seeds replication 0; replication k uses seed + k (mod 2**64).
    horizon is simulated time per replication, max_events an event cap per
    replication (hitting it flags the run rather than raising). initial is
    the common starting state. occupancy_window bounds the time-weighted
    state histogram; time outside the window is pooled into one bucket.
    checkpoints sets how many evenly spaced samples of x1+x2 over the
    trailing half-horizon feed the growth-slope fit, and cycle_cap bounds
    how many return times to (0,0) are recorded per replication (the count
    keeps running past the cap).
    """

    seed: int
    horizon: float
    replications: int = 1
    max_events: int = 10_000_000
    initial: State = (0, 0)
    occupancy_window: tuple[int, int] = (40, 40)
    checkpoints: int = 512
    cycle_cap: int = 200_000

    def __post_init__(self):
        if not 0 <= int(self.seed) < _SEED_MOD:
            raise OutOfRangeError("seed must be a 64-bit unsigned integer")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise OutOfRangeError("horizon must be positive and finite")
        if self.replications < 1:
            raise OutOfRangeError("replications must be at least 1")
        if self.max_events < 1:
            raise OutOfRangeError("max_events must be at least 1")
        x1, x2 = self.initial
        if x1 < 0 or x2 < 0:
            raise OutOfRangeError("initial state must be non-negative")
        w1, w2 = self.occupancy_window
        if w1 < 0 or w2 < 0:
            raise OutOfRangeError("occupancy window must be non-negative")
        if self.checkpoints < 2:
            raise OutOfRangeError("need at least 2 checkpoints for a slope")
        if self.cycle_cap < 0:
            raise OutOfRangeError("cycle_cap must be non-negative")

    def to_json(self) -> dict:
        return {
            "seed": int(self.seed),
            "horizon": float(self.horizon),
            "replications": int(self.replications),
            "max_events": int(self.max_events),
            "initial": [int(self.initial[0]), int(self.initial[1])],
            "occupancy_window": [
                int(self.occupancy_window[0]),
                int(self.occupancy_window[1]),
            ],
            "checkpoints": int(self.checkpoints),
            "cycle_cap": int(self.cycle_cap),
        }

    @staticmethod
    def from_json(obj: dict) -> "SimConfig":
        allowed = {
            "seed",
            "horizon",
            "replications",
            "max_events",
            "initial",
            "occupancy_window",
            "checkpoints",
            "cycle_cap",
        }
        unknown = set(obj) - allowed
        if unknown:
            raise OutOfRangeError(f"unknown SimConfig fields: {sorted(unknown)}")
        if "seed" not in obj or "horizon" not in obj:
            raise OutOfRangeError("SimConfig needs at least seed and horizon")
        kwargs = dict(obj)
        if "initial" in kwargs:
            kwargs["initial"] = (int(kwargs["initial"][0]), int(kwargs["initial"][1]))
        if "occupancy_window" in kwargs:
            w = kwargs["occupancy_window"]
            kwargs["occupancy_window"] = (int(w[0]), int(w[1]))
        return SimConfig(**kwargs)


_CYCLES_JSON_CAP = 10_000


@dataclass
class TrajectoryStats:
    """Merged path statistics from one or more replications.

    Time averages and event counts aggregate over all replications.
    occupancy is the time-weighted histogram over the configured window
    (occupancy_outside pools the rest), so occupancy.sum() +
    occupancy_outside equals elapsed. cycles holds recorded return times to
    (0,0) in replication order; cycle_count includes returns past the
    recording cap. slope is the mean over replications of the least-squares
    growth rate of x1+x2 against time over the trailing half-horizon, with
    the per-replication fits kept in rep_slopes. first_passage maps target
    set ids to one passage time per replication (inf if never reached).
    capped is True when any replication hit the event cap, in which case
    that replication's statistics cover only the time up to the cap.
    """

    time_avg_x1: float
    time_avg_x2: float
    occupancy: np.ndarray
    occupancy_outside: float
    occupancy_window: tuple[int, int]
    cycles: np.ndarray
    cycle_count: int
    slope: float
    rep_slopes: np.ndarray
    elapsed: float
    events: int
    capped: bool
    arrivals: int
    busy1: float
    busy2: float
    backend: str
    wall_seconds: float
    first_passage: dict[str, np.ndarray] = field(default_factory=dict)
    series: Optional[np.ndarray] = None

    def to_json(self) -> dict:
        def _clean(v: float):
            return None if not math.isfinite(v) else float(v)

        cyc = self.cycles
        out = {
            "time_avg_x1": float(self.time_avg_x1),
            "time_avg_x2": float(self.time_avg_x2),
            "occupancy": self.occupancy.tolist(),
            "occupancy_outside": float(self.occupancy_outside),
            "occupancy_window": list(self.occupancy_window),
            "cycle_count": int(self.cycle_count),
            "cycle_summary": {
                "recorded": int(cyc.size),
                "mean": float(cyc.mean()) if cyc.size else None,
                "sd": float(cyc.std(ddof=1)) if cyc.size > 1 else None,
                "min": float(cyc.min()) if cyc.size else None,
                "max": float(cyc.max()) if cyc.size else None,
            },
            "cycle_times": [float(v) for v in cyc[:_CYCLES_JSON_CAP]],
            "cycle_times_truncated": bool(cyc.size > _CYCLES_JSON_CAP),
            "slope": _clean(self.slope),
            "rep_slopes": [_clean(v) for v in self.rep_slopes],
            "elapsed": float(self.elapsed),
            "events": int(self.events),
            "event_cap_exceeded": bool(self.capped),
            "arrivals": int(self.arrivals),
            "busy1": float(self.busy1),
            "busy2": float(self.busy2),
            "backend": self.backend,
            "wall_seconds": float(self.wall_seconds),
            "first_passage": {
                key: [_clean(v) for v in samples]
                for key, samples in self.first_passage.items()
            },
        }
        return out


def _slope_fit(t_grid: np.ndarray, levels: np.ndarray) -> float:
    mask = np.isfinite(levels)
    if mask.sum() < 2:
        return math.nan
    t = t_grid[mask]
    if t[-1] <= t[0]:
        return math.nan
    return float(np.polyfit(t, levels[mask], 1)[0])


def simulate(
    spec: SystemSpec,
    cfg: SimConfig,
    backend: str = "auto",
    targets: Optional[dict[str, set[State]]] = None,
    stop_at_targets: bool = False,
    series_points: int = 0,
) -> TrajectoryStats:
    """Run the jump chain for cfg.replications independent replications.

    targets, when given, maps set ids to sets of states; each replication
    records the first time a jump lands in each set (inf if never, by the
    convention that starting inside a set does not count). With
    stop_at_targets a replication ends once every set has been hit.
    series_points > 0 additionally samples (t, x1, x2) of replication 0 on
    an even grid over [0, horizon].
    """
    spec.require_admitting()
    kern = kernel_for(backend)
    variant, sat_level = _variant_code(spec)
    w1, w2 = cfg.occupancy_window
    chk = np.linspace(cfg.horizon / 2.0, cfg.horizon, cfg.checkpoints)
    empty_f = np.empty(0)

    target_rows: list[tuple[int, int, int]] = []
    target_keys: list[str] = []
    if targets:
        for sid, key in enumerate(sorted(targets)):
            target_keys.append(key)
            states = targets[key]
            if not states:
                raise OutOfRangeError(f"target set {key!r} is empty")
            for (a, b) in sorted(states):
                if a < 0 or b < 0:
                    raise OutOfRangeError("target states must be non-negative")
                target_rows.append((a, b, sid))
    tg = np.asarray(target_rows, dtype=np.int64).reshape(-1, 3)

    occ = np.zeros((w1 + 1, w2 + 1))
    occ_outside = 0.0
    int_x1 = 0.0
    int_x2 = 0.0
    busy1 = 0.0
    busy2 = 0.0
    elapsed = 0.0
    events = 0
    arrivals = 0
    capped = False
    cycle_chunks = []
    cycle_count = 0
    rep_slopes = np.empty(cfg.replications)
    passage = {key: np.empty(cfg.replications) for key in target_keys}
    series = None

    t0 = time.perf_counter()
    for rep in range(cfg.replications):
        ts_times = empty_f
        if rep == 0 and series_points > 0:
            ts_times = np.linspace(0.0, cfg.horizon, series_points)
        res = kern.run_chain(
            spec.lam.prefix,
            spec.lam.cycle,
            spec.rates.mu1,
            spec.rates.mu2,
            variant,
            sat_level,
            (cfg.seed + rep) % _SEED_MOD,
            cfg.horizon,
            cfg.max_events,
            cfg.initial[0],
            cfg.initial[1],
            w1,
            w2,
            chk,
            ts_times,
            tg,
            len(target_keys),
            stop_at_targets,
            cfg.cycle_cap,
        )
        occ += res["occ"]
        occ_outside += res["occ_outside"]
        int_x1 += res["int_x1"]
        int_x2 += res["int_x2"]
        busy1 += res["busy1"]
        busy2 += res["busy2"]
        elapsed += res["elapsed"]
        events += res["events"]
        arrivals += res["arrivals"]
        capped = capped or res["capped"]
        cycle_chunks.append(res["cycle_times"])
        cycle_count += res["cycle_count"]
        rep_slopes[rep] = _slope_fit(chk, res["checkpoint_levels"])
        for sid, key in enumerate(target_keys):
            passage[key][rep] = res["target_times"][sid]
        if rep == 0 and series_points > 0:
            filled = res["ts_x1"] >= 0
            series = np.column_stack(
                [ts_times[filled], res["ts_x1"][filled], res["ts_x2"][filled]]
            )
    wall = time.perf_counter() - t0

    cycles = np.concatenate(cycle_chunks) if cycle_chunks else empty_f
    finite = rep_slopes[np.isfinite(rep_slopes)]
    slope = float(finite.mean()) if finite.size else math.nan
    return TrajectoryStats(
        time_avg_x1=int_x1 / elapsed,
        time_avg_x2=int_x2 / elapsed,
        occupancy=occ,
        occupancy_outside=occ_outside,
        occupancy_window=(w1, w2),
        cycles=cycles,
        cycle_count=cycle_count,
        slope=slope,
        rep_slopes=rep_slopes,
        elapsed=elapsed,
        events=events,
        capped=capped,
        arrivals=arrivals,
        busy1=busy1,
        busy2=busy2,
        backend=kern.BACKEND_NAME,
        wall_seconds=wall,
        first_passage=passage,
        series=series,
    )


@dataclass(frozen=True)
class EmpiricalSettings:
    """Decision thresholds for the simulation-based verdict.

    A spec looks unstable when the across-replication confidence interval
    for the growth slope sits entirely above slope_tol. It looks stable
    when that interval contains zero with half-width below slope_tol, at
    least min_cycles returns to (0,0) were seen, and the mean cycle length
    over the later recorded cycles stays within cycle_balance times the
    mean over the earlier ones. Everything else is Undetermined.
    """

    slope_tol: float = 0.01
    min_cycles: int = 20
    cycle_balance: tuple[float, float] = (0.5, 2.0)


def _cycles_balanced(cycles: np.ndarray, lo: float, hi: float) -> bool:
    half = cycles.size // 2
    if half == 0:
        return False
    first = float(cycles[:half].mean())
    second = float(cycles[half:].mean())
    if first <= 0.0:
        return False
    return lo <= second / first <= hi


def empirical_verdict(
    spec: SystemSpec,
    cfg: SimConfig,
    settings: Optional[EmpiricalSettings] = None,
    backend: str = "auto",
) -> str:
    """Classify a spec as LooksStable / LooksUnstable / Undetermined by simulation."""
    if cfg.replications < 5:
        raise OutOfRangeError("empirical_verdict needs at least 5 replications")
    s = settings or EmpiricalSettings()
    stats = simulate(spec, cfg, backend=backend)
    slopes = stats.rep_slopes[np.isfinite(stats.rep_slopes)]
    if slopes.size < 2:
        return "Undetermined"
    mean = float(slopes.mean())
    half = 1.96 * float(slopes.std(ddof=1)) / math.sqrt(slopes.size)
    if mean - half > s.slope_tol:
        return "LooksUnstable"
    contains_zero = mean - half <= 0.0 <= mean + half
    if (
        contains_zero
        and half < s.slope_tol
        and stats.cycle_count >= s.min_cycles
        and _cycles_balanced(stats.cycles, *s.cycle_balance)
    ):
        return "LooksStable"
    return "Undetermined"


def first_passage(
    spec: SystemSpec,
    cfg: SimConfig,
    start: State,
    target: set[State],
    backend: str = "auto",
) -> dict:
    """Monte Carlo first-passage time from start into a target set.

    Passage counts at the first jump that lands in the target, so starting
    inside the target still requires leaving and returning (or hopping to
    another target state). Returns mean, normal-approximation 95% CI,
    per-replication samples (None for replications that never arrived), and
    counts. Raises SimulationTimeout when more than half the replications
    saw no passage within the horizon.
    """
    if not target:
        raise OutOfRangeError("target set must be nonempty")
    run_cfg = SimConfig(
        seed=cfg.seed,
        horizon=cfg.horizon,
        replications=cfg.replications,
        max_events=cfg.max_events,
        initial=start,
        occupancy_window=cfg.occupancy_window,
        checkpoints=cfg.checkpoints,
        cycle_cap=cfg.cycle_cap,
    )
    stats = simulate(
        spec,
        run_cfg,
        backend=backend,
        targets={"target": set(target)},
        stop_at_targets=True,
    )
    samples = stats.first_passage["target"]
    hit = samples[np.isfinite(samples)]
    n = int(samples.size)
    misses = n - int(hit.size)
    if misses * 2 > n:
        raise SimulationTimeout(
            f"no passage within horizon in {misses}/{n} replications"
        )
    mean = float(hit.mean())
    sd = float(hit.std(ddof=1)) if hit.size > 1 else 0.0
    half = 1.96 * sd / math.sqrt(hit.size) if hit.size else math.nan
    return {
        "mean": mean,
        "ci": (mean - half, mean + half),
        "stderr": sd / math.sqrt(hit.size) if hit.size else math.nan,
        "observed": int(hit.size),
        "replications": n,
        "samples": [float(v) if math.isfinite(v) else None for v in samples],
    }
