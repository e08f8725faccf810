"""Model types: admission-rate functions, service rates, and network variants.

The network has two queues in tandem. Jobs enter node 1 at a state-dependent
rate lambda(x2) that is allowed to depend only on the measured backlog of the
downstream node, move to node 2 at rate mu1 while node 1 is busy, and leave at
rate mu2 while node 2 is busy. Admission rules are restricted to eventually
periodic functions, stored as a finite prefix plus a repeating cycle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import DegenerateError, OutOfRangeError

State = tuple[int, int]


def _as_rate_tuple(values: Iterable[float], what: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    for v in out:
        if not np.isfinite(v) or v < 0.0:
            raise OutOfRangeError(f"{what} values must be finite and >= 0, got {v!r}")
    return out


@dataclass(frozen=True)
class RateFunction:
    """Eventually periodic admission rate n -> lambda(n).

    ``lambda(n) = prefix[n]`` for ``n < len(prefix)`` and
    ``cycle[(n - len(prefix)) % len(cycle)]`` afterwards. The cycle must be
    nonempty; a constant rule is ``prefix=(), cycle=(c,)`` and a rule that
    shuts off above a threshold K is ``prefix=(c,)*(K+1), cycle=(0,)``.
    """

    prefix: tuple[float, ...] = ()
    cycle: tuple[float, ...] = (0.0,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", _as_rate_tuple(self.prefix, "prefix"))
        object.__setattr__(self, "cycle", _as_rate_tuple(self.cycle, "cycle"))
        if len(self.cycle) == 0:
            raise OutOfRangeError("cycle must contain at least one value")

    @staticmethod
    def constant(c: float) -> "RateFunction":
        return RateFunction(prefix=(), cycle=(c,))

    @staticmethod
    def threshold(c: float, k: int) -> "RateFunction":
        """Admit at rate c while the measured backlog is at most k."""
        if k < 0:
            raise OutOfRangeError("threshold level must be >= 0")
        return RateFunction(prefix=(c,) * (k + 1), cycle=(0.0,))

    def __call__(self, n: int) -> float:
        if n < 0:
            raise OutOfRangeError("rate argument must be >= 0")
        m = len(self.prefix)
        if n < m:
            return self.prefix[n]
        return self.cycle[(n - m) % len(self.cycle)]

    def values_up_to(self, n: int) -> np.ndarray:
        """Vector [lambda(0), ..., lambda(n)]."""
        if n < 0:
            raise OutOfRangeError("rate argument must be >= 0")
        m, p = len(self.prefix), len(self.cycle)
        out = np.empty(n + 1)
        head = min(m, n + 1)
        out[:head] = self.prefix[:head]
        if n + 1 > m:
            reps = -(-(n + 1 - m) // p)
            out[m:] = np.tile(self.cycle, reps)[: n + 1 - m]
        return out

    @property
    def sup(self) -> float:
        return max(self.prefix + self.cycle)

    def is_eventually_vanishing(self) -> bool:
        """True when the rule admits nothing above some finite level."""
        return all(v == 0.0 for v in self.cycle)

    def is_eventually_constant(self) -> bool:
        return all(v == self.cycle[0] for v in self.cycle)

    def is_nonincreasing(self) -> bool:
        """True when lambda(n+1) <= lambda(n) for every n.

        Checking the prefix, the junction, and one full period plus its
        wraparound covers all n; beyond that the pattern repeats.
        """
        span = len(self.prefix) + 2 * len(self.cycle)
        return all(self(n + 1) <= self(n) for n in range(span))

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}

    @staticmethod
    def from_json(obj: dict) -> "RateFunction":
        _require_keys(obj, {"prefix", "cycle"}, "rate function")
        return RateFunction(prefix=tuple(obj["prefix"]), cycle=tuple(obj["cycle"]))


@dataclass(frozen=True)
class ServiceRates:
    """Node service rates; both strictly positive."""

    mu1: float
    mu2: float

    def __post_init__(self) -> None:
        for name, v in (("mu1", self.mu1), ("mu2", self.mu2)):
            if not np.isfinite(v) or v <= 0.0:
                raise OutOfRangeError(f"{name} must be finite and > 0, got {v!r}")
        object.__setattr__(self, "mu1", float(self.mu1))
        object.__setattr__(self, "mu2", float(self.mu2))

    @property
    def ratio(self) -> float:
        """mu1 / mu2, the decay parameter of the downstream backlog."""
        return self.mu1 / self.mu2


@dataclass(frozen=True)
class Base:
    """The open network itself."""


@dataclass(frozen=True)
class SaturatedN:
    """Node 1 never idles while the downstream backlog is below ``level``:
    an extra arc feeds node 2 at rate mu1 whenever x1 = 0 and x2 < level."""

    level: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise OutOfRangeError("saturation level must be >= 0")


@dataclass(frozen=True)
class SaturatedStar:
    """Node 1 never idles: the extra mu1 arc is active whenever x1 = 0."""


Variant = Union[Base, SaturatedN, SaturatedStar]

BASE = Base()
SATURATED_STAR = SaturatedStar()


@dataclass(frozen=True)
class SystemSpec:
    """A complete model: admission rule, service rates, variant."""

    lam: RateFunction
    rates: ServiceRates
    variant: Variant = field(default_factory=Base)

    @property
    def mu1(self) -> float:
        return self.rates.mu1

    @property
    def mu2(self) -> float:
        return self.rates.mu2

    def with_variant(self, variant: Variant) -> "SystemSpec":
        return SystemSpec(self.lam, self.rates, variant)

    def require_admitting(self) -> None:
        """Reject rules with lambda(0) = 0 (the empty state would absorb)."""
        if self.lam(0) <= 0.0:
            raise DegenerateError("degenerate: lambda(0)=0")

    def to_json(self) -> dict:
        if isinstance(self.variant, Base):
            var: object = "base"
        elif isinstance(self.variant, SaturatedN):
            var = {"saturatedN": self.variant.level}
        else:
            var = "saturatedStar"
        return {
            "lambda": self.lam.to_json(),
            "mu1": self.mu1,
            "mu2": self.mu2,
            "variant": var,
        }

    @staticmethod
    def from_json(obj: dict) -> "SystemSpec":
        _require_keys(obj, {"lambda", "mu1", "mu2", "variant"}, "system spec")
        var_obj = obj["variant"]
        variant: Variant
        if var_obj == "base":
            variant = BASE
        elif var_obj == "saturatedStar":
            variant = SATURATED_STAR
        elif isinstance(var_obj, dict) and set(var_obj) == {"saturatedN"}:
            variant = SaturatedN(int(var_obj["saturatedN"]))
        else:
            raise OutOfRangeError(f"unknown variant {var_obj!r}")
        return SystemSpec(
            lam=RateFunction.from_json(obj["lambda"]),
            rates=ServiceRates(float(obj["mu1"]), float(obj["mu2"])),
            variant=variant,
        )

    @staticmethod
    def from_json_str(text: str) -> "SystemSpec":
        return SystemSpec.from_json(json.loads(text))


def _require_keys(obj: dict, keys: set[str], what: str) -> None:
    if not isinstance(obj, dict):
        raise OutOfRangeError(f"{what} must be a JSON object")
    extra = set(obj) - keys
    missing = keys - set(obj)
    if extra:
        raise OutOfRangeError(f"{what} has unknown fields {sorted(extra)}")
    if missing:
        raise OutOfRangeError(f"{what} is missing fields {sorted(missing)}")


def _check_state(x: State) -> None:
    if x[0] < 0 or x[1] < 0:
        raise OutOfRangeError(f"state components must be >= 0, got {x!r}")


def transitions(spec: SystemSpec, x: State) -> list[tuple[State, float]]:
    """Enabled jumps from ``x`` with their rates, zero-rate arcs dropped.

    Order is fixed: admission, node-1 service, node-2 departure, then the
    saturation arc. The simulator scans arcs in the same order.
    """
    _check_state(x)
    x1, x2 = x
    out: list[tuple[State, float]] = []
    lam = spec.lam(x2)
    if lam > 0.0:
        out.append(((x1 + 1, x2), lam))
    if x1 > 0:
        out.append(((x1 - 1, x2 + 1), spec.mu1))
    if x2 > 0:
        out.append(((x1, x2 - 1), spec.mu2))
    if _saturation_active(spec.variant, x1, x2):
        out.append(((x1, x2 + 1), spec.mu1))
    return out


def _saturation_active(variant: Variant, x1: int, x2: int) -> bool:
    if x1 != 0:
        return False
    if isinstance(variant, SaturatedStar):
        return True
    if isinstance(variant, SaturatedN):
        return x2 < variant.level
    return False


def total_rate(spec: SystemSpec, x: State) -> float:
    """Total outgoing rate at ``x`` (sum over enabled arcs)."""
    return sum(q for _, q in transitions(spec, x))
