"""Drift certificates of the form V_r(x) = x1 + v_r(x2).

The weight sequence v_r is built so that the generator drift of V_r equals
exactly -r at every state with x1 > 0; stability then hinges on the drift
along the boundary {x1 = 0}, which this module evaluates through two
independent formulas and cross-checks. A successful margin search yields a
finite exceptional set {0} x [0, n0] outside of which the drift is uniformly
negative, which is the classical positive-recurrence certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import geom
from .errors import CertificateWindowExhausted, InternalInconsistencyError, OutOfRangeError
from .rates import State, SystemSpec, transitions

_BLOWUP = 1e290  # beyond this magnitude the dual forms are compared by sign only


class LyapunovCandidate:
    """V_r(x) = x1 + v_r(x2) for one margin parameter r > 0.

    v_r is defined by v(0) = 0 and increments w(n) = v(n+1) - v(n) obeying
    w(n) = alpha(n) + (mu2/mu1) w(n-1) with alpha(n) = 1 - (lambda(n)+r)/mu1,
    equivalently the rolled-out sum w(n) = sum_{k<=n} alpha(k) (mu1/mu2)^(k-n).
    Values are memoized; instances are meant to be used from one thread
    (create one candidate per execution context).
    """

    def __init__(self, spec: SystemSpec, r: float) -> None:
        if not (r > 0.0) or not math.isfinite(r):
            raise OutOfRangeError(f"margin r must be finite and > 0, got {r!r}")
        self.spec = spec
        self.r = float(r)
        self._w: list[float] = []  # w[n] = v(n+1) - v(n)
        self._v: list[float] = [0.0]

    def _alpha(self, n: int) -> float:
        return 1.0 - (self.spec.lam(n) + self.r) / self.spec.mu1

    def _extend(self, n: int) -> None:
        ratio = self.spec.mu2 / self.spec.mu1
        while len(self._w) <= n:
            k = len(self._w)
            wk = self._alpha(k) if k == 0 else self._alpha(k) + ratio * self._w[k - 1]
            self._w.append(wk)
            self._v.append(self._v[k] + wk)

    def w(self, n: int) -> float:
        """Increment v(n+1) - v(n)."""
        if n < 0:
            raise OutOfRangeError("increment index must be >= 0")
        self._extend(n)
        return self._w[n]

    def v(self, n: int) -> float:
        if n < 0:
            raise OutOfRangeError("weight index must be >= 0")
        if n > 0:
            self._extend(n - 1)
        return self._v[n]

    def __call__(self, x: State) -> float:
        return x[0] + self.v(x[1])


def drift(spec: SystemSpec, fn: Callable[[State], float], x: State) -> float:
    """Generator drift sum_y q(x,y) (fn(y) - fn(x)) at state x."""
    fx = fn(x)
    return sum(q * (fn(y) - fx) for y, q in transitions(spec, x))


def boundary_drift_pair(candidate: LyapunovCandidate, n: int) -> tuple[float, float]:
    """Drift of V_r at (0, n), computed two independent ways.

    First form: the direct transition sum lambda(n) - mu2 (v(n) - v(n-1)).
    Second form: with Z_n the truncated geometric law at z = mu1/mu2,

        [ E lambda(Z_n) - mu2 (1 - r/mu1) P(Z_n > 0) ] / P(Z_n = n).

    Both are exact rearrangements of the same quantity and must agree.
    """
    if n < 0:
        raise OutOfRangeError("boundary level must be >= 0")
    spec = candidate.spec
    lam_n = spec.lam(n)
    if n == 0:
        # only the admission arc is enabled at (0, 0)
        return lam_n, lam_n
    first = lam_n - spec.mu2 * candidate.w(n - 1)
    z = spec.rates.ratio
    pmf = geom.truncated_pmf(z, n)
    e_lam = float(pmf @ spec.lam.values_up_to(n))
    num = e_lam - spec.mu2 * (1.0 - candidate.r / spec.mu1) * (1.0 - pmf[0])
    pn = pmf[n]
    second = math.inf * num if pn == 0.0 else num / pn
    return first, second


def _forms_agree(a: float, b: float, tol: float = 1e-8) -> bool:
    if math.isnan(a) or math.isnan(b):
        return False
    if a == b:
        return True
    a_big = abs(a) >= _BLOWUP
    b_big = abs(b) >= _BLOWUP
    if a_big and b_big:
        return (a > 0.0) == (b > 0.0)
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def boundary_drift(candidate: LyapunovCandidate, n: int) -> float:
    """Drift of V_r at (0, n) after cross-checking the two forms.

    Agreement is required within 1e-8 relative to max(1, magnitudes); a
    mismatch means a bug in one of the formulas, so it raises rather than
    returning a number.
    """
    first, second = boundary_drift_pair(candidate, n)
    if not _forms_agree(first, second):
        raise InternalInconsistencyError(
            f"boundary drift forms disagree at n={n}: {first!r} vs {second!r}"
        )
    return first


@dataclass(frozen=True)
class MarginCertificate:
    """A verified negative-drift certificate.

    The drift of V_r is -r wherever x1 > 0 and at most ``max_tail_drift``
    (itself <= -r up to a 1e-9 slack) at every boundary state (0, n) with
    n0 < n <= n0 + window. Outside the finite set {0} x [0, n0] the drift
    is therefore uniformly negative.
    """

    r: float
    n0: int
    window: int
    max_tail_drift: float


def find_margin(
    spec: SystemSpec, window: Optional[int] = None
) -> Optional[MarginCertificate]:
    """Search for a drift margin r and its exceptional boundary set.

    The candidate family admits a certificate exactly when
    limsup_n E lambda(Z_n) < min(mu1, mu2); in that case r is set to half the
    slack and boundary levels are scanned until a violation-free stretch of
    ``window`` consecutive levels is seen. Returns None when the criterion
    fails. Raises CertificateWindowExhausted if the scan cap is reached
    before a clean stretch appears.
    """
    spec.require_admitting()
    m, p = len(spec.lam.prefix), len(spec.lam.cycle)
    if window is None:
        window = m + 20 * p + 200
    if window < 1:
        raise OutOfRangeError("scan window must be >= 1")
    mu_min = min(spec.mu1, spec.mu2)
    limsup = geom.limsup_expected_rate(spec.lam, spec.rates.ratio)
    if not (limsup < mu_min):
        return None
    r = 0.5 * (mu_min - limsup)
    candidate = LyapunovCandidate(spec, r)
    threshold = -r * (1.0 - 1e-9)
    hard_cap = max(20 * window, 2000)
    last_violation = 0  # (0,0) always violates: its drift is lambda(0) > 0
    tail_max = -math.inf
    n = 1
    while n <= last_violation + window:
        if n > hard_cap:
            raise CertificateWindowExhausted(
                "criterion holds analytically; finite certificate window exhausted"
            )
        d = boundary_drift(candidate, n)
        if d > threshold:
            last_violation = n
            tail_max = -math.inf
        else:
            tail_max = max(tail_max, d)
        n += 1
    return MarginCertificate(
        r=r, n0=last_violation, window=window, max_tail_drift=tail_max
    )
