"""Shared fixtures: random model generators and hand-rolled oracles.

The oracle helpers below recompute model quantities directly from the
transition rules, without going through the library code paths they are
used to check.
"""

from contextlib import contextmanager

import numpy as np
import pytest

from tandemstab import (
    BASE,
    RateFunction,
    SaturatedN,
    SaturatedStar,
    ServiceRates,
    SystemSpec,
)

# ---------------------------------------------------------------------------
# random model generators (always seeded by the caller)


def random_rate_function(
    rng: np.random.Generator,
    max_prefix: int = 4,
    max_cycle: int = 3,
    rate_hi: float = 3.0,
    vanishing: bool = False,
) -> RateFunction:
    """A random eventually periodic admission rule with lambda(0) > 0."""
    m = int(rng.integers(0, max_prefix + 1))
    p = int(rng.integers(1, max_cycle + 1))
    prefix = rng.uniform(0.0, rate_hi, size=m)
    cycle = np.zeros(p) if vanishing else rng.uniform(0.0, rate_hi, size=p)
    if vanishing and m == 0:
        m, prefix = 1, rng.uniform(0.0, rate_hi, size=1)
    first = prefix if m else cycle
    if first[0] <= 0.0:
        first[0] = float(rng.uniform(0.1, rate_hi))
    return RateFunction(prefix=tuple(prefix), cycle=tuple(cycle))


def random_specs(
    seed: int,
    count: int,
    ratio_range: tuple[float, float] | None = None,
    vanishing: bool = False,
    rate_hi: float = 3.0,
) -> list[SystemSpec]:
    """Random base-variant specs; ratio_range constrains mu2/mu1."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        lam = random_rate_function(rng, rate_hi=rate_hi, vanishing=vanishing)
        mu1 = float(rng.uniform(0.3, 2.5))
        if ratio_range is None:
            mu2 = float(rng.uniform(0.3, 2.5))
        else:
            mu2 = mu1 * float(rng.uniform(*ratio_range))
        out.append(SystemSpec(lam, ServiceRates(mu1, mu2)))
    return out


# ---------------------------------------------------------------------------
# hand-rolled oracles


def oracle_transitions(spec: SystemSpec, x: tuple[int, int]) -> dict:
    """Enabled jumps and rates, written straight from the model rules."""
    x1, x2 = x
    out: dict[tuple[int, int], float] = {}
    lam = spec.lam(x2)
    if lam > 0.0:
        out[(x1 + 1, x2)] = lam
    if x1 > 0:
        out[(x1 - 1, x2 + 1)] = spec.mu1
    if x2 > 0:
        out[(x1, x2 - 1)] = spec.mu2
    saturated = isinstance(spec.variant, SaturatedStar) or (
        isinstance(spec.variant, SaturatedN) and x2 < spec.variant.level
    )
    if x1 == 0 and saturated:
        out[(x1, x2 + 1)] = out.get((x1, x2 + 1), 0.0) + spec.mu1
    return out


def oracle_drift(spec: SystemSpec, fn, x: tuple[int, int]) -> float:
    """Generator drift of fn at x via the hand-rolled transition table."""
    fx = fn(x)
    return sum(q * (fn(y) - fx) for y, q in oracle_transitions(spec, x).items())


def oracle_weights(spec: SystemSpec, r: float, n_max: int) -> list[float]:
    """v_r(0..n_max) by running the defining recursion directly."""
    v = [0.0]
    w_prev = None
    for n in range(n_max):
        alpha = 1.0 - (spec.lam(n) + r) / spec.mu1
        w = alpha if w_prev is None else alpha + (spec.mu2 / spec.mu1) * w_prev
        v.append(v[-1] + w)
        w_prev = w
    return v


def jackson_product_form(c: float, mu1: float, mu2: float, m1: int, m2: int):
    """Stationary law of the constant-rate tandem on [0,m1]x[0,m2].

    Classic product form: pi(x1,x2) = (1-r1) r1^x1 (1-r2) r2^x2 with
    r_i = c / mu_i; returned truncated and unnormalized tail ignored.
    """
    r1, r2 = c / mu1, c / mu2
    g1 = (1.0 - r1) * r1 ** np.arange(m1 + 1)
    g2 = (1.0 - r2) * r2 ** np.arange(m2 + 1)
    return np.outer(g1, g2)


# ---------------------------------------------------------------------------
# acceptance report plumbing

_ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance check."""

    @contextmanager
    def _criterion(num: int, desc: str):
        try:
            yield
        except BaseException as e:
            _ACCEPTANCE_LINES[num] = (
                f"FAIL criterion {num:2d}: {desc} [{type(e).__name__}]"
            )
            raise
        else:
            _ACCEPTANCE_LINES[num] = f"PASS criterion {num:2d}: {desc}"

    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[num])
