"""Stability verdicts, threshold answers, and phase classification.

All decisions reduce to comparing expected admission rates under (truncated)
geometric backlog laws against the service rates. Strict inequalities are
decided with a relative critical band of width 1e-9: computed values inside
the band cannot certify which side of the boundary the exact value falls on,
so those points report Inconclusive with a CriticalBoundary note instead of
guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import geom
from .errors import OutOfRangeError
from .rates import RateFunction, ServiceRates, SystemSpec

STABLE = "Stable"
UNSTABLE = "Unstable"
INCONCLUSIVE = "Inconclusive"
DEGENERATE = "Degenerate"  # wire value only; the library raises DegenerateError

#: Verdict witness codes (wire values; see docs/formats.md for meanings).
WITNESS_DRIFT = "T2"
WITNESS_UNDERLOADED = "T4"
WITNESS_OVERLOADED = "T5"
WITNESS_VANISHING_UNDER = "T6i"
WITNESS_VANISHING_OVER = "T6ii"

CRITICAL_TOL = 1e-9


def _band_compare(value: float, bound: float, tol: float = CRITICAL_TOL) -> int:
    """-1 below, +1 above, 0 inside the relative critical band around bound."""
    band = tol * abs(bound)
    if value < bound - band:
        return -1
    if value > bound + band:
        return 1
    return 0


@dataclass(frozen=True)
class CriteriaRecord:
    """The numbers the verdict was decided on."""

    expected_rate_geom: Optional[float]  # E lambda(Z), defined when mu1 < mu2
    limsup_expected: float  # limsup_n E lambda(Z_n)
    liminf_rate: float  # liminf_n lambda(n) = min of the cycle
    mu_min: float
    z: float

    def to_json(self) -> dict:
        return {
            "E_lambda_Z": self.expected_rate_geom,
            "limsup_E": self.limsup_expected,
            "liminf_lambda": self.liminf_rate,
            "mu_min": self.mu_min,
            "z": self.z,
        }


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[str]
    criteria: CriteriaRecord
    gap: Optional[tuple[float, float]] = None
    note: Optional[str] = None

    def to_json(self) -> dict:
        out: dict = {
            "status": self.status,
            "witness": self.witness,
            "criteria": self.criteria.to_json(),
        }
        if self.gap is not None:
            out["gap"] = [self.gap[0], self.gap[1]]
        if self.note is not None:
            out["note"] = self.note
        return out


def verdict(spec: SystemSpec) -> Verdict:
    """Decide stability of the open network (the variant field is ignored;
    saturated variants are analysis devices, the question is posed for the
    open system).

    Branches:
      mu1 < mu2, vanishing rule: stable iff E lambda(Z) < mu1, with exact
        equality unstable (the criterion is an iff there).
      mu1 < mu2 otherwise: E lambda(Z) below mu1 is stable, above is
        unstable, the critical band is Inconclusive.
      mu1 >= mu2, vanishing rule: always stable.
      mu1 >= mu2 otherwise: limsup E lambda(Z_n) below mu2 is stable,
        liminf lambda above mu2 is unstable; in between the criteria leave a
        genuine gap, reported as an Inconclusive interval.
    """
    spec.require_admitting()
    lam, mu1, mu2 = spec.lam, spec.mu1, spec.mu2
    z = spec.rates.ratio
    mu_min = min(mu1, mu2)
    vanishing = lam.is_eventually_vanishing()
    liminf_rate = min(lam.cycle)

    if mu1 < mu2:
        e = geom.expected_rate_geometric(lam, z)
        crit = CriteriaRecord(e, e, liminf_rate, mu_min, z)
        cmp = _band_compare(e, mu1)
        wit = WITNESS_VANISHING_UNDER if vanishing else WITNESS_UNDERLOADED
        if vanishing and e == mu1:
            return Verdict(UNSTABLE, wit, crit)
        if cmp < 0:
            return Verdict(STABLE, wit, crit)
        if cmp > 0:
            return Verdict(UNSTABLE, wit, crit)
        return Verdict(
            INCONCLUSIVE,
            None,
            crit,
            gap=(min(e, mu1), max(e, mu1)),
            note="CriticalBoundary",
        )

    bundle = geom.limit_bundle(lam, z)
    crit = CriteriaRecord(
        None, bundle.limsup_expected, bundle.liminf_rate, mu_min, z
    )
    if vanishing:
        return Verdict(STABLE, WITNESS_VANISHING_OVER, crit)
    cmp_stable = _band_compare(bundle.limsup_expected, mu2)
    cmp_unstable = _band_compare(bundle.liminf_rate, mu2)
    if cmp_stable < 0:
        return Verdict(STABLE, WITNESS_OVERLOADED, crit)
    if cmp_unstable > 0:
        return Verdict(UNSTABLE, WITNESS_OVERLOADED, crit)
    if cmp_stable == 0 or cmp_unstable == 0:
        return Verdict(
            INCONCLUSIVE,
            None,
            crit,
            gap=(min(bundle.liminf_rate, mu2), max(bundle.limsup_expected, mu2)),
            note="CriticalBoundary",
        )
    return Verdict(
        INCONCLUSIVE,
        None,
        crit,
        gap=(bundle.liminf_rate, bundle.limsup_expected),
    )


def single_server_stable(lam: RateFunction, mu2: float) -> bool:
    """Stability of the single queue fed directly by the rule lambda(n).

    The birth-death chain with birth rate lambda(n) at level n and death
    rate mu2 is positive recurrent iff sum_n lambda(0)...lambda(n)/mu2^(n+1)
    converges: any zero rate truncates the series, otherwise the tail ratio
    over one period is (G/mu2)^p with G the geometric mean of the cycle.
    """
    if mu2 <= 0.0 or not math.isfinite(mu2):
        raise OutOfRangeError("mu2 must be finite and > 0")
    if any(v == 0.0 for v in lam.prefix + lam.cycle):
        return True
    gmean = math.exp(sum(math.log(v) for v in lam.cycle) / len(lam.cycle))
    return gmean < mu2


def region_membership(k: float, mu1: float, mu2: float) -> bool:
    """Whether the threshold-K admission rule stabilizes rates (mu1, mu2).

    For finite K the criterion is 1 - (mu1/mu2)^(K+1) < min(mu1, mu2);
    K = inf (never shut off) requires min(mu1, mu2) > 1. Boundary equality
    counts as not a member. The finite-K comparison is taken in log space,
    (K+1) log z > log(1 - mu_min): evaluating 1 - z^(K+1) directly loses to
    rounding once z^(K+1) drops below one ulp of 1, which would misclassify
    every large K at mu_min barely under 1.
    """
    rates = ServiceRates(mu1, mu2)
    mu_min = min(mu1, mu2)
    if math.isinf(k):
        return mu_min > 1.0
    k = int(k)
    if k < 0:
        raise OutOfRangeError("threshold level must be >= 0")
    if rates.ratio >= 1.0:
        return True  # left side is <= 0 < mu_min
    gap = 1.0 - mu_min
    if gap <= 0.0:
        return True  # left side is < 1 <= mu_min
    return (k + 1) * math.log(rates.ratio) > math.log(gap)


@dataclass(frozen=True)
class ThresholdAnswer:
    """Which threshold levels K stabilize a given rate pair."""

    kind: str  # "AllK" | "AllFiniteK" | "UpToKmax" | "NoK"
    k_max: Optional[int] = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "UpToKmax":
            out["K_max"] = self.k_max
        return out


def threshold_answer(mu1: float, mu2: float) -> ThresholdAnswer:
    """Classify the set {K : threshold-K rule is stable} for these rates.

    The member set is always downward closed, so the answer is one of: every
    K including K = inf, every finite K, an initial segment [0, K_max], or
    empty.
    """
    rates = ServiceRates(mu1, mu2)
    if mu1 >= mu2:
        return ThresholdAnswer("AllK" if mu2 > 1.0 else "AllFiniteK")
    if mu1 > 1.0:
        return ThresholdAnswer("AllK")
    if mu1 == 1.0:
        return ThresholdAnswer("AllFiniteK")
    # largest K with (K+1) log z > log(1 - mu1): the same log-space predicate
    # as region_membership, so the reported K_max is tight against it
    lz, lg = math.log(rates.ratio), math.log(1.0 - mu1)
    if not lz > lg:  # K = 0 already fails
        return ThresholdAnswer("NoK")
    guess = max(0, int(lg / lz) - 1)
    while (guess + 2) * lz > lg:
        guess += 1
    while guess > 0 and not (guess + 1) * lz > lg:
        guess -= 1
    return ThresholdAnswer("UpToKmax", guess)


PHASE_LABELS = ("A1", "A2", "A3", "A4")


def phase_classify(mu1: float, mu2: float) -> str:
    """Phase of the rate pair (boundaries go to the less stable label).

    A1: stable with no admission control at all (min(mu1, mu2) > 1).
    A2: every finite threshold stabilizes, but not K = inf.
    A3: some but not all thresholds stabilize (K = 0 works).
    A4: no threshold stabilizes.

    The closed form for membership in every finite-K region is mu1 >= mu2
    or mu1 >= 1: for mu1 < mu2 the left sides 1 - (mu1/mu2)^(K+1) increase
    to 1, so all-K membership means mu1 >= 1.
    """
    ServiceRates(mu1, mu2)  # reject non-positive rates up front
    mu_min = min(mu1, mu2)
    if mu_min > 1.0:
        return "A1"
    if mu1 >= mu2 or mu1 >= 1.0:
        return "A2"
    if region_membership(0, mu1, mu2):
        return "A3"
    return "A4"


def generating_fn(lam: RateFunction, x: float) -> tuple[float, float]:
    """(f(x), f'(x)) for f(x) = (1-x) sum_n lambda(n) x^n, vanishing rules.

    Both series are finite sums because lambda vanishes above the prefix.
    f(mu1/mu2) is the geometric expected rate, and f' has the closed form
    sum_n (n+1)(lambda(n+1) - lambda(n)) x^n, nonpositive term by term when
    the rule is nonincreasing.
    """
    if not lam.is_eventually_vanishing():
        raise OutOfRangeError("generating function needs an eventually vanishing rule")
    if not (0.0 < x < 1.0):
        raise OutOfRangeError("argument must lie strictly inside (0, 1)")
    m = len(lam.prefix)
    f = (1.0 - x) * sum(lam(n) * x**n for n in range(m))
    fprime = sum((n + 1) * (lam(n + 1) - lam(n)) * x**n for n in range(m))
    return f, fprime


def sensitivity_scan(
    lam: RateFunction, mu_fixed: float, axis: str, grid: Sequence[float]
) -> list[tuple[float, Verdict]]:
    """Verdicts along a one-parameter service-rate sweep.

    ``axis`` names the rate being varied; the other one is held at
    ``mu_fixed``. Returns (grid value, verdict) pairs in grid order.
    """
    if axis not in ("mu1", "mu2"):
        raise OutOfRangeError(f"axis must be 'mu1' or 'mu2', got {axis!r}")
    out = []
    for g in grid:
        rates = ServiceRates(g, mu_fixed) if axis == "mu1" else ServiceRates(mu_fixed, g)
        out.append((float(g), verdict(SystemSpec(lam, rates))))
    return out
