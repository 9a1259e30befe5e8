import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tandemq import (
    Rates,
    Region,
    WalkKind,
    classify,
    constrained_step,
    increments,
    to_corner_frame,
)


class TestRates:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Rates(0.0, (0.4, 0.5))
        with pytest.raises(ValueError):
            Rates(0.1, (-0.4, 0.5))

    def test_rejects_wrong_station_count(self):
        with pytest.raises(ValueError):
            Rates(0.1, (0.4,))
        with pytest.raises(ValueError):
            Rates(0.1, (0.4, 0.5, 0.3, 0.2))

    def test_stability_flag(self):
        assert Rates(0.1, (0.4, 0.5)).stable
        assert not Rates(0.5, (0.4, 0.5)).stable
        assert not Rates(0.1, (0.4, 0.5, 0.05)).stable

    @pytest.mark.parametrize("lam,mu", [(0.1, (0.4, 0.5)), (3.0, (4.0, 7.0)), (0.2, (0.4, 0.3))])
    def test_normalized_total_within_one_ulp(self, lam, mu):
        r = Rates(lam, mu).normalized()
        assert abs(r.total - 1.0) <= math.ulp(1.0)

    def test_rho_invariant_under_normalization(self):
        raw = Rates(3.0, (4.0, 7.0, 5.0))
        norm = raw.normalized()
        for a, b in zip(raw.rho, norm.rho):
            assert a == pytest.approx(b, rel=1e-14)

    def test_equal_rate_detection_tolerance(self):
        assert Rates(0.1, (0.45, 0.45)).equal_service_rates()
        assert Rates(0.1, (0.45, 0.45 * (1 + 1e-10))).equal_service_rates()
        assert not Rates(0.1, (0.45, 0.45 * (1 + 1e-5))).equal_service_rates()

    def test_json_round_trip(self):
        r = Rates(0.2, (0.4, 0.3))
        again = Rates.from_json(json.dumps(r.as_dict()))
        assert again == r


class TestConstrainedStep:
    def test_queue_walk_freezes_at_axis(self):
        assert constrained_step(WalkKind.CONSTRAINED_X, (1, 0), (0, -1)) == (1, 0)

    def test_corner_walk_first_coordinate_free(self):
        assert constrained_step(WalkKind.LIMIT_Y, (-3, 2), (-1, 0)) == (-4, 2)

    def test_corner_walk_freezes_second_axis(self):
        assert constrained_step(WalkKind.LIMIT_Y, (5, 0), (0, -1)) == (5, 0)

    def test_three_station_freeze(self):
        assert constrained_step(WalkKind.LIMIT_Y, (4, 0, 2), (0, -1, 1)) == (4, 0, 2)
        assert constrained_step(WalkKind.LIMIT_Y, (4, 1, 0), (0, 0, -1)) == (4, 1, 0)

    @given(
        st.tuples(st.integers(0, 8), st.integers(0, 8)),
        st.sampled_from([(1, 0), (-1, 1), (0, -1)]),
    )
    def test_queue_walk_stays_nonnegative(self, x, v):
        nx = constrained_step(WalkKind.CONSTRAINED_X, x, v)
        assert min(nx) >= 0

    def test_increment_probabilities_sum_to_one(self):
        for kind in WalkKind:
            for rates in (Rates(0.1, (0.4, 0.5)), Rates(2.0, (3.0, 5.0, 7.0))):
                probs = [p for _, p in increments(kind, rates)]
                assert sum(probs) == pytest.approx(1.0, abs=1e-15)


class TestCornerFrame:
    @pytest.mark.parametrize(
        "n,x,expected",
        [(60, (1, 0), (59, 0)), (10, (10, 0), (0, 0)), (7, (2, 3, 1), (5, 3, 1))],
    )
    def test_known_images(self, n, x, expected):
        assert to_corner_frame(n, x) == expected

    @given(st.integers(1, 50), st.tuples(st.integers(0, 50), st.integers(0, 50)))
    def test_involution(self, n, x):
        assert to_corner_frame(n, to_corner_frame(n, x)) == x


class TestClassify:
    @pytest.mark.parametrize(
        "p,expected",
        [
            ((30, 30), Region.EXIT_BOUNDARY),
            ((0, 0), Region.ORIGIN),
            ((9, 0), Region.INTERIOR),
            ((40, 30), Region.OUT_OF_DOMAIN),
        ],
    )
    def test_regions_n60(self, p, expected):
        assert classify(60, p) is expected

    def test_rejects_negative_coordinates(self):
        with pytest.raises(ValueError):
            classify(10, (-1, 2))
