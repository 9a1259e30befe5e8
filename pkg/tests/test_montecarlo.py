import math

import numpy as np
import pytest

from tandemq import (
    Rates,
    SimConfig,
    WalkKind,
    escape_bias_bound,
    hit_prob,
    hit_prob_2d,
    simulate_hit,
    simulate_overflow,
    solve_overflow_grid,
)
from tandemq.montecarlo import path_keys, step_uniforms

CAL_RATES = Rates(0.2, (0.4, 0.3))


def xcfg(**kw):
    base = dict(
        rates=CAL_RATES,
        kind=WalkKind.CONSTRAINED_X,
        start=(1, 0),
        paths=20000,
        seed=7,
        buffer_n=6,
    )
    base.update(kw)
    return SimConfig(**base)


def ycfg(**kw):
    base = dict(
        rates=Rates(0.1, (0.4, 0.5)),
        kind=WalkKind.LIMIT_Y,
        start=(3, 1),
        paths=20000,
        seed=11,
        escape_gap=40,
    )
    base.update(kw)
    return SimConfig(**base)


class TestStreams:
    def test_uniforms_in_unit_interval(self):
        keys = path_keys(123, np.arange(100000, dtype=np.uint64))
        u = step_uniforms(keys, 5)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 0.005

    def test_streams_independent_of_batching(self):
        # the draw for path i does not depend on which other paths are active:
        # this is what makes any worker partition reproduce the same estimate
        keys = path_keys(42, np.arange(1000, dtype=np.uint64))
        full = step_uniforms(keys, 17)
        for i in (0, 13, 999):
            alone = step_uniforms(keys[i : i + 1], 17)
            assert alone[0] == full[i]

    def test_distinct_seeds_decorrelate(self):
        a = step_uniforms(path_keys(1, np.arange(50000, dtype=np.uint64)), 0)
        b = step_uniforms(path_keys(2, np.arange(50000, dtype=np.uint64)), 0)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


class TestSimulateOverflow:
    def test_bit_identical_reruns(self):
        a = simulate_overflow(xcfg())
        b = simulate_overflow(xcfg())
        assert a == b

    def test_different_seed_differs(self):
        a = simulate_overflow(xcfg())
        b = simulate_overflow(xcfg(seed=8))
        assert a.hits != b.hits

    def test_start_on_exit_face(self):
        est = simulate_overflow(xcfg(start=(3, 3)))
        assert est.p_hat == 1.0 and est.std_err == 0.0

    def test_start_at_origin(self):
        est = simulate_overflow(xcfg(start=(0, 0)))
        assert est.p_hat == 0.0

    def test_ci_covers_exact_value(self):
        exact = solve_overflow_grid(CAL_RATES, 6).value((1, 0))
        est = simulate_overflow(xcfg(paths=200000))
        assert abs(est.p_hat - exact) <= 1.96 * est.std_err
        assert est.std_err == pytest.approx(
            math.sqrt(est.p_hat * (1 - est.p_hat) / 200000), rel=1e-12
        )

    def test_quick_coverage_calibration(self):
        exact = solve_overflow_grid(CAL_RATES, 6).value((1, 0))
        covered = 0
        for seed in range(30):
            est = simulate_overflow(xcfg(paths=50000, seed=seed))
            if abs(est.p_hat - exact) <= 1.96 * est.std_err:
                covered += 1
        assert covered >= 25

    def test_unstable_rates_warn_but_run(self):
        cfg = xcfg(rates=Rates(0.5, (0.3, 0.2)), paths=2000)
        with pytest.warns(UserWarning):
            est = simulate_overflow(cfg)
        assert est.p_hat > 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            xcfg(paths=0)
        with pytest.raises(ValueError):
            xcfg(buffer_n=None)
        with pytest.raises(ValueError):
            xcfg(start=(9, 9))
        with pytest.raises(ValueError):
            simulate_overflow(ycfg())


class TestSimulateHit:
    def test_bit_identical_reruns(self):
        assert simulate_hit(ycfg()) == simulate_hit(ycfg())

    def test_start_on_diagonal(self):
        est = simulate_hit(ycfg(start=(2, 2)))
        assert est.p_hat == 1.0

    def test_estimate_brackets_closed_form(self):
        est = simulate_hit(ycfg(paths=200000))
        w = hit_prob_2d(Rates(0.1, (0.4, 0.5)), (3, 1))
        assert est.p_hat - 2 * est.std_err <= w
        assert w <= est.p_hat + 2 * est.std_err + est.bias_bound

    def test_escapes_are_counted(self):
        est = simulate_hit(ycfg(escape_gap=5, paths=5000))
        assert est.escapes > 0
        assert est.hits + est.escapes == 5000

    def test_bias_bound_value(self):
        r = Rates(0.1, (0.4, 0.5))
        bound = escape_bias_bound(r, 40)
        w_corner = hit_prob(r, (40, 0))
        assert bound == pytest.approx(max(w_corner, r.rho[1] ** 40), rel=1e-12)
        # scale sanity: a handful of rho1^40
        assert 1e-25 < bound < 1e-22

    def test_escape_band_consistency(self):
        a = simulate_hit(ycfg(escape_gap=10, paths=200000))
        b = simulate_hit(ycfg(escape_gap=20, paths=200000))
        sigma = math.hypot(a.std_err, b.std_err)
        assert a.p_hat - 3 * sigma <= b.p_hat <= a.p_hat + a.bias_bound + 3 * sigma

    def test_validation(self):
        with pytest.raises(ValueError):
            ycfg(escape_gap=None)
        with pytest.raises(ValueError):
            ycfg(start=(50, 1))  # gap beyond the escape face
        with pytest.raises(ValueError):
            ycfg(start=(1, 3))
        with pytest.raises(ValueError):
            simulate_hit(xcfg())

    def test_json_fields(self):
        est = simulate_hit(ycfg(paths=1000))
        obj = est.to_json_dict()
        assert set(obj) == {"p_hat", "std_err", "hits", "escapes", "bias_bound"}
