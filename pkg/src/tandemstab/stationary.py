"""Exact stationary analysis on truncated state grids.

The generator is restricted to the rectangle [0, m1] x [0, m2]; outgoing
arcs that would leave the rectangle are dropped (the state simply holds
longer), and the discarded flow is reported as ``escape_mass`` so callers
can judge how much the truncation distorted the answer. The stationary
equations are solved with a sparse direct factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GridTooLargeError, OutOfRangeError, SolverFailureError
from .rates import Base, SaturatedN, SaturatedStar, SystemSpec

STATE_CAP = 25_000
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class TruncatedGrid:
    """State rectangle [0, m1] x [0, m2] with drop-and-track truncation."""

    m1: int
    m2: int
    boundary_policy: str = "drop-loss"

    def __post_init__(self) -> None:
        if self.m1 < 1 or self.m2 < 1:
            raise OutOfRangeError("grid bounds must be >= 1")
        if self.boundary_policy != "drop-loss":
            raise OutOfRangeError(
                f"unsupported boundary policy {self.boundary_policy!r}"
            )
        if self.n_states > STATE_CAP:
            raise GridTooLargeError(
                f"grid has {self.n_states} states, cap is {STATE_CAP}"
            )

    @property
    def n_states(self) -> int:
        return (self.m1 + 1) * (self.m2 + 1)


@dataclass(frozen=True)
class StationarySolution:
    """Stationary distribution of the truncated chain.

    ``pi[x1, x2]`` sums to 1; ``residual`` is the max norm of pi Q;
    ``escape_mass`` is the fraction of stationary transition flow carried by
    the dropped boundary arcs (0 means the truncation was invisible).
    """

    pi: np.ndarray
    residual: float
    escape_mass: float
    grid: TruncatedGrid


def _rate_matrices(spec: SystemSpec, grid: TruncatedGrid):
    """Kept-arc sparse generator Q plus per-state kept/lost outflow."""
    m1, m2 = grid.m1, grid.m2
    n = grid.n_states
    width = m2 + 1
    lam_vals = spec.lam.values_up_to(m2)
    mu1, mu2 = spec.mu1, spec.mu2

    x1 = np.repeat(np.arange(m1 + 1), width)
    x2 = np.tile(np.arange(width), m1 + 1)
    lam_of = lam_vals[x2]
    idx = x1 * width + x2

    rows, cols, vals = [], [], []
    lost = np.zeros(n)

    # admission: (x1, x2) -> (x1+1, x2)
    keep = (x1 < m1) & (lam_of > 0.0)
    rows.append(idx[keep])
    cols.append(idx[keep] + width)
    vals.append(lam_of[keep])
    lost[(x1 == m1)] += lam_of[(x1 == m1)]

    # node-1 service: (x1, x2) -> (x1-1, x2+1)
    keep = (x1 > 0) & (x2 < m2)
    rows.append(idx[keep])
    cols.append(idx[keep] - width + 1)
    vals.append(np.full(keep.sum(), mu1))
    lost[(x1 > 0) & (x2 == m2)] += mu1

    # node-2 departure: (x1, x2) -> (x1, x2-1), never leaves the grid
    keep = x2 > 0
    rows.append(idx[keep])
    cols.append(idx[keep] - 1)
    vals.append(np.full(keep.sum(), mu2))

    # saturation arc: (0, x2) -> (0, x2+1)
    if isinstance(spec.variant, SaturatedStar):
        active = x1 == 0
    elif isinstance(spec.variant, SaturatedN):
        active = (x1 == 0) & (x2 < spec.variant.level)
    else:
        active = np.zeros(n, dtype=bool)
    keep = active & (x2 < m2)
    rows.append(idx[keep])
    cols.append(idx[keep] + 1)
    vals.append(np.full(keep.sum(), mu1))
    lost[active & (x2 == m2)] += mu1

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    kept_out = np.zeros(n)
    np.add.at(kept_out, rows, vals)

    diag = np.arange(n)
    q = sp.coo_matrix(
        (
            np.concatenate([vals, -kept_out]),
            (np.concatenate([rows, diag]), np.concatenate([cols, diag])),
        ),
        shape=(n, n),
    ).tocsr()
    return q, kept_out, lost


def solve_stationary(spec: SystemSpec, grid: TruncatedGrid) -> StationarySolution:
    """Stationary distribution pi of the truncated generator.

    Solves pi Q = 0 with the balance equation at (0, 0) replaced by the
    normalization sum(pi) = 1. The truncated chain has a single closed
    communicating class (every state drains to (0, 0)), so the system is
    nonsingular; a residual above 1e-8 raises SolverFailureError.
    """
    spec.require_admitting()
    q, kept_out, lost = _rate_matrices(spec, grid)
    n = grid.n_states
    i0 = 0  # state (0, 0)

    qt = q.T.tocoo()
    keep = qt.row != i0
    rows = np.concatenate([qt.row[keep], np.full(n, i0)])
    cols = np.concatenate([qt.col[keep], np.arange(n)])
    vals = np.concatenate([qt.data[keep], np.ones(n)])
    a = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    b = np.zeros(n)
    b[i0] = 1.0

    pi = spla.spsolve(a, b)
    if not np.all(np.isfinite(pi)):
        raise SolverFailureError("stationary solve produced non-finite values")
    pi = np.clip(pi, 0.0, None)
    total = pi.sum()
    if total <= 0.0:
        raise SolverFailureError("stationary solve produced a zero vector")
    pi /= total

    residual = float(np.max(np.abs(q.T @ pi)))
    if residual > RESIDUAL_TOL:
        raise SolverFailureError(
            f"stationary residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )
    total_flow = float(pi @ (kept_out + lost))
    escape = float(pi @ lost) / total_flow if total_flow > 0.0 else 0.0
    return StationarySolution(
        pi=pi.reshape(grid.m1 + 1, grid.m2 + 1),
        residual=residual,
        escape_mass=escape,
        grid=grid,
    )


@dataclass(frozen=True)
class SaturatedIdentityReport:
    """Residuals of the three stationary identities of the saturated chain.

    ``rate_balance``: admitted rate vs mu2 P(X2>0) - mu1 P(X1=0, X2<N).
    ``geometric_tail``: worst deviation of P(X2=n) from the geometric
    recursion with its above-N correction terms.
    ``conditional_geometric``: worst pointwise deviation of the law of X2
    restricted to [0, N] from the truncated geometric law times P(X2<=N).
    All three vanish on the untruncated chain; on a truncation they are
    expected to be of the order of escape_mass.
    """

    rate_balance: float
    geometric_tail: float
    conditional_geometric: float
    escape_mass: float

    def to_json(self) -> dict:
        return {
            "rate_balance": self.rate_balance,
            "geometric_tail": self.geometric_tail,
            "conditional_geometric": self.conditional_geometric,
            "escape_mass": self.escape_mass,
        }


def check_saturated_identities(
    spec: SystemSpec, sol: StationarySolution
) -> SaturatedIdentityReport:
    """Evaluate the saturated-chain stationary identities on a solution."""
    if not isinstance(spec.variant, SaturatedN):
        raise OutOfRangeError("identities apply to the saturated variant with a level")
    level = spec.variant.level
    m2 = sol.grid.m2
    if level > m2:
        raise OutOfRangeError("saturation level must lie inside the grid")
    pi = sol.pi
    z = spec.rates.ratio
    mu1, mu2 = spec.mu1, spec.mu2
    lam_vals = spec.lam.values_up_to(m2)

    marg2 = pi.sum(axis=0)  # law of X2
    empty1 = pi[0, :]  # P(X1=0, X2=n)

    e_lam = float(lam_vals @ marg2)
    rhs = mu2 * (1.0 - marg2[0]) - mu1 * float(empty1[:level].sum())
    rate_balance = abs(e_lam - rhs)

    geo = 0.0
    for n in range(m2 + 1):
        rhs_n = z**n * marg2[0]
        if n > level:
            j = np.arange(level, n)
            rhs_n -= float((z ** (n - j)) @ empty1[level:n])
        geo = max(geo, abs(float(marg2[n]) - rhs_n))

    from . import geom  # local import to avoid a cycle at module load

    q = geom.truncated_pmf(z, level)
    mass = float(marg2[: level + 1].sum())
    cond = float(np.max(np.abs(marg2[: level + 1] - q * mass)))

    return SaturatedIdentityReport(
        rate_balance=rate_balance,
        geometric_tail=geo,
        conditional_geometric=cond,
        escape_mass=sol.escape_mass,
    )


@dataclass(frozen=True)
class OracleSettings:
    """Pinned decision thresholds for the truncation-ladder oracle."""

    escape_stable: float = 1e-6
    tv_stable: float = 1e-6
    escape_unstable: float = 1e-2
    mean_growth: float = 1.2
    # outward drift must be sustained: the mean's increment on the last rung
    # must keep at least this fraction of the first increment (a converging
    # chain shows geometrically shrinking increments instead)
    mean_sustain: float = 0.6


DEFAULT_LADDER = (
    TruncatedGrid(40, 40),
    TruncatedGrid(80, 80),
    TruncatedGrid(120, 120),
)


def _total_variation(a: StationarySolution, b: StationarySolution) -> float:
    """TV distance between two solutions, smaller grid zero-padded."""
    m1 = max(a.pi.shape[0], b.pi.shape[0])
    m2 = max(a.pi.shape[1], b.pi.shape[1])
    pa = np.zeros((m1, m2))
    pb = np.zeros((m1, m2))
    pa[: a.pi.shape[0], : a.pi.shape[1]] = a.pi
    pb[: b.pi.shape[0], : b.pi.shape[1]] = b.pi
    return 0.5 * float(np.abs(pa - pb).sum())


def _mean_level(sol: StationarySolution) -> float:
    m1, m2 = sol.pi.shape
    x1 = np.arange(m1)[:, None]
    x2 = np.arange(m2)[None, :]
    return float((sol.pi * (x1 + x2)).sum())


def oracle_verdict(
    spec: SystemSpec,
    ladder: Sequence[TruncatedGrid] = DEFAULT_LADDER,
    settings: Optional[OracleSettings] = None,
) -> str:
    """Judge stability from a ladder of increasing truncations.

    LooksStable: the finest solution has negligible escape flow and the
    distribution has stopped moving between grids. LooksUnstable: every
    truncation leaks materially, or the mean level keeps climbing as the
    grid grows. Anything else: Undetermined (the honest answer near
    boundaries or for slowly mixing systems).
    """
    if len(ladder) < 2:
        raise OutOfRangeError("ladder needs at least two grids")
    cfg = settings or OracleSettings()
    sols = [solve_stationary(spec, g) for g in ladder]
    escapes = [s.escape_mass for s in sols]
    means = [_mean_level(s) for s in sols]
    tv_last = _total_variation(sols[-2], sols[-1])

    if escapes[-1] < cfg.escape_stable and tv_last < cfg.tv_stable:
        return "LooksStable"
    increments = [b - a for a, b in zip(means, means[1:])]
    drifting = (
        all(d > 0.0 for d in increments)
        and increments[-1] >= cfg.mean_sustain * increments[0]
        and means[-1] >= cfg.mean_growth * means[0]
    )
    if all(e > cfg.escape_unstable for e in escapes) or drifting:
        return "LooksUnstable"
    return "Undetermined"
