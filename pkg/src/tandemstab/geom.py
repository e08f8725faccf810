"""Truncated and plain geometric weight distributions.

The downstream backlog seen by the admission rule has, in the regimes the
analysis needs, a (truncated) geometric law with parameter z = mu1/mu2:
P(Z_n = j) proportional to z^j on {0..n}, and for z < 1 the untruncated
P(Z = j) = (1-z) z^j. Everything here is about computing expectations of the
admission rate under these laws, including their large-n limits, without
losing precision when z > 1 (weights are then anchored at the top so the
largest weight is exactly 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfRangeError
from .rates import RateFunction


def _check_z(z: float) -> float:
    z = float(z)
    if not np.isfinite(z) or z < 0.0:
        raise OutOfRangeError(f"weight ratio z must be finite and >= 0, got {z!r}")
    return z


def truncated_pmf(z: float, n: int) -> np.ndarray:
    """pmf of Z_n on {0..n}: P(Z_n = j) = z^j / sum_{i<=n} z^i.

    For z > 1 the weights are built as powers of 1/z anchored at j = n, so
    no intermediate overflows; for z <= 1 they are anchored at j = 0. z = 1
    is the uniform law; z = 0 is a point mass at 0.
    """
    z = _check_z(z)
    if n < 0:
        raise OutOfRangeError("support bound n must be >= 0")
    j = np.arange(n + 1)
    if z == 1.0:
        return np.full(n + 1, 1.0 / (n + 1))
    if z > 1.0:
        w = (1.0 / z) ** (n - j)
    else:
        w = z**j
    return w / w.sum()


def expected_rate_truncated(lam: RateFunction, z: float, n: int) -> float:
    """E lambda(Z_n) under the truncated geometric law."""
    pmf = truncated_pmf(z, n)
    return float(pmf @ lam.values_up_to(n))


def expected_rate_geometric(lam: RateFunction, z: float) -> float:
    """E lambda(Z) for Z geometric(z), 0 <= z < 1, in closed form.

    With prefix length m and cycle length p, summing the cycle residues as
    geometric series gives

        E lambda(Z) = (1-z) [ sum_{n<m} lambda(n) z^n
                              + z^m (sum_{j<p} cycle[j] z^j) / (1 - z^p) ].
    """
    z = _check_z(z)
    if z >= 1.0:
        raise OutOfRangeError("geometric law needs z < 1")
    m, p = len(lam.prefix), len(lam.cycle)
    head = sum(lam.prefix[k] * z**k for k in range(m))
    if z == 0.0:
        return float(lam(0))
    tail = sum(lam.cycle[j] * z**j for j in range(p))
    return (1.0 - z) * (head + z**m * tail / (1.0 - z**p))


@dataclass(frozen=True)
class LimitBundle:
    """Limit behaviour of E lambda(Z_n) as n grows, for z >= 1.

    ``residue_limits[r]`` is the limit along n with (n - m) = r mod p; the
    limsup/liminf of the expected rate are the extremes over residues.
    ``limsup_rate``/``liminf_rate`` are the extremes of the rate itself.
    """

    residue_limits: tuple[float, ...]
    limsup_expected: float
    liminf_expected: float
    limsup_rate: float
    liminf_rate: float


def limit_bundle(lam: RateFunction, z: float) -> LimitBundle:
    """Residue-wise limits of E lambda(Z_n), z >= 1.

    For z > 1 the truncated law concentrates at the top of its support, and
    along the residue class (n - m) mod p = r

        lim E lambda(Z_n) = (1 - 1/z) / (1 - z^{-p})
                            * sum_{k<p} cycle[(r-k) mod p] z^{-k},

    a convex combination of the cycle values. For z = 1 the law is uniform
    and every residue limit is the cycle mean.
    """
    z = _check_z(z)
    if z < 1.0:
        raise OutOfRangeError("limit bundle is defined for z >= 1")
    cyc = lam.cycle
    p = len(cyc)
    if z == 1.0:
        mean = sum(cyc) / p
        residues = (mean,) * p
    else:
        winv = 1.0 / z
        norm = (1.0 - winv) / (1.0 - winv**p)
        residues = tuple(
            norm * sum(cyc[(r - k) % p] * winv**k for k in range(p))
            for r in range(p)
        )
    return LimitBundle(
        residue_limits=residues,
        limsup_expected=max(residues),
        liminf_expected=min(residues),
        limsup_rate=max(cyc),
        liminf_rate=min(cyc),
    )


def limsup_expected_rate(lam: RateFunction, z: float) -> float:
    """limsup_n E lambda(Z_n) for any z >= 0.

    For z < 1 the sequence converges to the geometric expectation; for
    z >= 1 the extremes come from the residue limits.
    """
    z = _check_z(z)
    if z < 1.0:
        return expected_rate_geometric(lam, z)
    return limit_bundle(lam, z).limsup_expected
