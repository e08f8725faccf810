"""Truncated geometric laws and expected admission rates under them."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tandemstab import (
    OutOfRangeError,
    RateFunction,
    expected_rate_geometric,
    expected_rate_truncated,
    limit_bundle,
    limsup_expected_rate,
    truncated_pmf,
)


class TestTruncatedPmf:
    def test_point_mass_at_zero_support(self):
        assert truncated_pmf(0.3, 0).tolist() == [1.0]

    def test_z_zero_is_point_mass(self):
        assert truncated_pmf(0.0, 5).tolist() == [1.0, 0, 0, 0, 0, 0]

    def test_z_one_is_uniform(self):
        assert truncated_pmf(1.0, 2).tolist() == [1 / 3, 1 / 3, 1 / 3]

    def test_doubling_weights(self):
        got = truncated_pmf(2.0, 2)
        assert np.allclose(got, [1 / 7, 2 / 7, 4 / 7], rtol=0, atol=1e-15)

    def test_no_overflow_for_large_z_and_n(self):
        got = truncated_pmf(10.0, 400)
        assert np.isfinite(got).all()
        assert got[-1] == pytest.approx(0.9, rel=1e-12)

    def test_no_underflow_wipeout_for_small_z(self):
        got = truncated_pmf(0.5, 1200)
        assert got[0] == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("z", [0.0, 0.5, 1.0, 2.0, 10.0])
    @pytest.mark.parametrize("n", [0, 1, 7, 64])
    def test_normalized_and_nonnegative(self, z, n):
        got = truncated_pmf(z, n)
        assert got.shape == (n + 1,)
        assert (got >= 0.0).all()
        assert got.sum() == pytest.approx(1.0, abs=1e-12)

    def test_geometric_ratio_between_neighbours(self):
        got = truncated_pmf(0.7, 30)
        assert np.allclose(got[1:] / got[:-1], 0.7, rtol=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(OutOfRangeError):
            truncated_pmf(-0.1, 3)
        with pytest.raises(OutOfRangeError):
            truncated_pmf(float("nan"), 3)
        with pytest.raises(OutOfRangeError):
            truncated_pmf(0.5, -1)


class TestExpectedRateTruncated:
    def test_constant_rule_is_exact(self):
        lam = RateFunction.constant(0.7)
        for z in (0.0, 0.5, 1.0, 3.0):
            assert expected_rate_truncated(lam, z, 25) == pytest.approx(0.7, abs=1e-12)

    def test_threshold_rule_closed_form(self):
        # P(Z_n <= 1) = (1 + z) / sum_{j<=n} z^j -> 0.75 for z = 1/2, large n
        lam = RateFunction.threshold(1.0, 1)
        assert expected_rate_truncated(lam, 0.5, 200) == pytest.approx(0.75, abs=1e-9)

    @given(
        cycle=st.lists(st.floats(0, 5), min_size=1, max_size=4),
        z=st.floats(0, 4),
        n=st.integers(0, 80),
    )
    @settings(max_examples=80, deadline=None)
    def test_sandwiched_by_cycle_extremes(self, cycle, z, n):
        # pure-cycle rules only: a prefix can push the average outside
        lam = RateFunction(prefix=(), cycle=tuple(cycle))
        got = expected_rate_truncated(lam, z, n)
        assert min(cycle) - 1e-12 <= got <= max(cycle) + 1e-12

    def test_converges_to_geometric_expectation(self):
        lam = RateFunction(prefix=(2.0, 1.0), cycle=(0.5, 1.5))
        for z in (0.3, 0.6, 0.9):
            target = expected_rate_geometric(lam, z)
            got = expected_rate_truncated(lam, z, 1000)
            assert got == pytest.approx(target, abs=max(z**500, 1e-12))


class TestExpectedRateGeometric:
    def test_vanishing_rule_closed_form(self):
        lam = RateFunction.threshold(1.0, 0)
        assert expected_rate_geometric(lam, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_prefix_only_rule(self):
        lam = RateFunction(prefix=(2.0,), cycle=(0.0,))
        assert expected_rate_geometric(lam, 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_z_zero_returns_rate_at_origin(self):
        lam = RateFunction(prefix=(1.7,), cycle=(0.4,))
        assert expected_rate_geometric(lam, 0.0) == 1.7

    def test_requires_z_below_one(self):
        with pytest.raises(OutOfRangeError):
            expected_rate_geometric(RateFunction.constant(1.0), 1.0)

    def test_matches_direct_series(self):
        lam = RateFunction(prefix=(3.0, 0.2), cycle=(1.0, 0.0, 2.0))
        for z in (0.2, 0.5, 0.8):
            series = (1 - z) * sum(lam(n) * z**n for n in range(4000))
            assert expected_rate_geometric(lam, z) == pytest.approx(series, abs=1e-12)


class TestLimitBundle:
    def test_constant_cycle(self):
        lam = RateFunction(prefix=(9.0,), cycle=(0.7,))
        for z in (1.0, 1.5, 4.0):
            bundle = limit_bundle(lam, z)
            assert bundle.residue_limits == (pytest.approx(0.7, abs=1e-15),)
            assert bundle.limsup_expected == pytest.approx(0.7, abs=1e-15)
            assert bundle.liminf_expected == pytest.approx(0.7, abs=1e-15)

    def test_alternating_closed_form(self):
        a, b, mu1, mu2 = 0.5, 2.0, 1.5, 1.0
        bundle = limit_bundle(RateFunction(cycle=(a, b)), mu1 / mu2)
        even = (a * mu1 + b * mu2) / (mu1 + mu2)
        odd = (b * mu1 + a * mu2) / (mu1 + mu2)
        assert bundle.residue_limits[0] == pytest.approx(even, abs=1e-12)
        assert bundle.residue_limits[1] == pytest.approx(odd, abs=1e-12)
        assert bundle.limsup_expected == pytest.approx(max(even, odd), abs=1e-12)
        assert bundle.liminf_expected == pytest.approx(min(even, odd), abs=1e-12)
        assert bundle.limsup_rate == b
        assert bundle.liminf_rate == a

    def test_z_one_gives_cycle_mean(self):
        bundle = limit_bundle(RateFunction(cycle=(0.5, 2.0)), 1.0)
        assert bundle.residue_limits == (1.25, 1.25)

    def test_rejects_z_below_one(self):
        with pytest.raises(OutOfRangeError):
            limit_bundle(RateFunction.constant(1.0), 0.99)

    def test_residues_match_brute_force(self):
        lam = RateFunction(prefix=(5.0, 0.1), cycle=(2.0, 0.3, 1.1))
        m, p = 2, 3
        for z in (1.3, 2.0, 5.0):
            bundle = limit_bundle(lam, z)
            for r in range(p):
                n = m + 80 * p + r
                brute = expected_rate_truncated(lam, z, n)
                assert brute == pytest.approx(bundle.residue_limits[r], abs=1e-9)

    def test_prefix_does_not_affect_limits(self):
        cycle = (2.0, 0.3)
        with_prefix = RateFunction(prefix=(7.0, 7.0, 7.0), cycle=cycle)
        bare = RateFunction(cycle=cycle)
        for z in (1.0, 1.7):
            assert (
                limit_bundle(with_prefix, z).residue_limits
                == limit_bundle(bare, z).residue_limits
            )


class TestLimsupExpectedRate:
    def test_matches_geometric_below_one(self):
        lam = RateFunction(prefix=(2.0,), cycle=(0.5, 1.0))
        assert limsup_expected_rate(lam, 0.6) == pytest.approx(
            expected_rate_geometric(lam, 0.6), abs=1e-12
        )

    def test_matches_bundle_at_and_above_one(self):
        lam = RateFunction(cycle=(0.5, 2.0))
        for z in (1.0, 1.8):
            assert limsup_expected_rate(lam, z) == limit_bundle(lam, z).limsup_expected
