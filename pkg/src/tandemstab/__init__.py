"""Stability analysis for a two-node tandem queue with state-dependent admission.

Arrivals enter node 1 at a rate lambda(x2) controlled by the downstream
queue length, move to node 2 at rate mu1, and leave at rate mu2. The
package decides whether such a chain is positive recurrent: closed-form
criteria driven by geometrically distributed downstream occupancy,
an explicit linear Lyapunov certificate, threshold and phase analysis for
the admission-control design problem, plus two independent numerical
cross-checks (a truncated-generator stationary solver and a seeded
event-driven simulator).
"""

from .errors import (
    CertificateWindowExhausted,
    DegenerateError,
    GridTooLargeError,
    InternalInconsistencyError,
    OutOfRangeError,
    SimulationTimeout,
    SolverFailureError,
)
from .geom import (
    LimitBundle,
    expected_rate_geometric,
    expected_rate_truncated,
    limit_bundle,
    limsup_expected_rate,
    truncated_pmf,
)
from .lyapunov import (
    LyapunovCandidate,
    MarginCertificate,
    boundary_drift,
    boundary_drift_pair,
    drift,
    find_margin,
)
from .rates import (
    BASE,
    SATURATED_STAR,
    Base,
    RateFunction,
    SaturatedN,
    SaturatedStar,
    ServiceRates,
    State,
    SystemSpec,
    total_rate,
    transitions,
)
from .simulate import (
    EmpiricalSettings,
    HAVE_COMPILED,
    SimConfig,
    TrajectoryStats,
    empirical_verdict,
    first_passage,
    kernel_for,
    simulate,
)
from .stability import (
    CriteriaRecord,
    ThresholdAnswer,
    Verdict,
    generating_fn,
    phase_classify,
    region_membership,
    sensitivity_scan,
    single_server_stable,
    threshold_answer,
    verdict,
)
from .stationary import (
    OracleSettings,
    SaturatedIdentityReport,
    StationarySolution,
    TruncatedGrid,
    check_saturated_identities,
    oracle_verdict,
    solve_stationary,
)

__version__ = "0.1.0"

__all__ = [
    "BASE",
    "Base",
    "CertificateWindowExhausted",
    "CriteriaRecord",
    "DegenerateError",
    "EmpiricalSettings",
    "GridTooLargeError",
    "HAVE_COMPILED",
    "InternalInconsistencyError",
    "LimitBundle",
    "LyapunovCandidate",
    "MarginCertificate",
    "OracleSettings",
    "OutOfRangeError",
    "RateFunction",
    "SATURATED_STAR",
    "SaturatedIdentityReport",
    "SaturatedN",
    "SaturatedStar",
    "ServiceRates",
    "SimConfig",
    "SimulationTimeout",
    "SolverFailureError",
    "State",
    "StationarySolution",
    "SystemSpec",
    "ThresholdAnswer",
    "TrajectoryStats",
    "TruncatedGrid",
    "Verdict",
    "boundary_drift",
    "boundary_drift_pair",
    "check_saturated_identities",
    "drift",
    "empirical_verdict",
    "expected_rate_geometric",
    "expected_rate_truncated",
    "find_margin",
    "first_passage",
    "generating_fn",
    "kernel_for",
    "limit_bundle",
    "limsup_expected_rate",
    "oracle_verdict",
    "phase_classify",
    "region_membership",
    "sensitivity_scan",
    "simulate",
    "single_server_stable",
    "solve_stationary",
    "threshold_answer",
    "total_rate",
    "transitions",
    "truncated_pmf",
    "verdict",
]
