import math

import numpy as np
import pytest

from streamrate import (
    BinningConfig,
    ErasurePattern,
    GaussianSystem,
    GmConfig,
    SimConfig,
    ValidationError,
    decode_mmse,
    simulate_binning,
    simulate_gm_stream,
    solve_test_channel_single,
    sweep_burst_position,
)


def hb(q: float) -> float:
    return -q * math.log2(q) - (1 - q) * math.log2(1 - q)


class TestSimConfig:
    def test_overlapping_bursts_rejected(self):
        with pytest.raises(ValidationError):
            SimConfig(rho=0.9, sigma_z2=0.1, horizon=20, trials=10, seed=0, bursts=((3, 4), (5, 2)))

    def test_burst_outside_horizon_rejected(self):
        with pytest.raises(ValidationError):
            SimConfig(rho=0.9, sigma_z2=0.1, horizon=10, trials=10, seed=0, bursts=((8, 5),))

    def test_horizon_cap(self):
        with pytest.raises(ValidationError):
            SimConfig(rho=0.9, sigma_z2=0.1, horizon=10**4 + 1, trials=1, seed=0)


class TestGmStream:
    def test_deterministic(self):
        cfg = SimConfig(rho=0.9, sigma_z2=0.2, horizon=30, trials=500, seed=7, bursts=((10, 2),))
        a = simulate_gm_stream(cfg)
        b = simulate_gm_stream(cfg)
        assert np.array_equal(a.mse, b.mse)
        assert np.array_equal(a.stderr, b.stderr)

    def test_filter_trace_matches_conditioning_oracle(self):
        cfg = SimConfig(rho=0.9, sigma_z2=0.25, horizon=16, trials=2, seed=1, bursts=((6, 3),))
        res = simulate_gm_stream(cfg)
        erased = set(range(6, 9))
        for t in (0, 3, 9, 12, 15):
            sys = GaussianSystem(0.9, 0.25, t)
            received = tuple(i for i in range(t) if i not in erased)
            if t in erased:
                continue
            pat = ErasurePattern(t, received)
            assert res.exact_mmse[t] == pytest.approx(decode_mmse(sys, pat), abs=1e-12)

    def test_no_erasure_steady_state(self):
        cfg = SimConfig(rho=0.9, sigma_z2=0.1, horizon=60, trials=40000, seed=3)
        res = simulate_gm_stream(cfg)
        for t in (20, 40, 59):
            assert abs(res.mse[t] - res.exact_mmse[t]) <= 3 * res.stderr[t]

    def test_useless_channel_gives_prior_variance(self):
        cfg = SimConfig(rho=0.9, sigma_z2=1e8, horizon=40, trials=20000, seed=5)
        res = simulate_gm_stream(cfg)
        assert abs(res.mse[30] - 1.0) <= 3 * res.stderr[30]

    def test_post_burst_distortion_hits_target(self):
        gm_cfg = GmConfig(rho=0.9, B=1, D=0.2)
        tc = solve_test_channel_single(gm_cfg)
        cfg = SimConfig(
            rho=0.9, sigma_z2=tc.sigma_z2, horizon=50, trials=30000, seed=11, bursts=((48, 1),)
        )
        res = simulate_gm_stream(cfg)
        assert abs(res.mse[49] - 0.2) <= 3 * res.stderr[49]

    def test_never_statistically_below_exact(self):
        # estimator optimality: empirical error cannot undershoot the MMSE
        for bursts in ((), ((12, 2),)):
            cfg = SimConfig(
                rho=0.85, sigma_z2=0.3, horizon=40, trials=20000, seed=13, bursts=bursts
            )
            res = simulate_gm_stream(cfg)
            assert np.all(res.mse >= res.exact_mmse - 4 * res.stderr)


class TestBurstPositionSweep:
    def test_worst_position_is_adjacent(self):
        cfg = SimConfig(rho=0.9, sigma_z2=0.2, horizon=31, trials=8000, seed=17)
        rep = sweep_burst_position(cfg, B=2, decode_time=30, offsets=range(0, 11))
        assert rep.passed
        assert rep.exact[0] == max(rep.exact)
        assert all(b <= a + 1e-12 for a, b in zip(rep.exact, rep.exact[1:]))

    def test_longer_burst_hurts_more(self):
        cfg = SimConfig(rho=0.9, sigma_z2=0.2, horizon=31, trials=4000, seed=19)
        one = sweep_burst_position(cfg, B=1, decode_time=30, offsets=(0,))
        two = sweep_burst_position(cfg, B=2, decode_time=30, offsets=(0,))
        assert two.exact[0] > one.exact[0]

    def test_burst_at_stream_start_is_mildest(self):
        cfg = SimConfig(rho=0.9, sigma_z2=0.2, horizon=25, trials=2000, seed=23)
        t = 24
        B = 2
        rep = sweep_burst_position(cfg, B=B, decode_time=t, offsets=(0, 5, t - B))
        assert rep.exact[-1] == min(rep.exact)


class TestBinning:
    def test_deterministic(self):
        cfg = BinningConfig(n=10, q=0.1, rate=0.8, trials=4000, seed=29)
        assert simulate_binning(cfg).p_hat == simulate_binning(cfg).p_hat

    def test_full_rate_is_lossless(self):
        for q in (0.1, 0.3):
            cfg = BinningConfig(n=8, q=q, rate=1.0, trials=4000, seed=31)
            assert simulate_binning(cfg).errors == 0

    def test_error_decreases_with_block_length(self):
        for q in (0.05, 0.1):
            rate = hb(q) + 0.3
            ps = []
            for n in (8, 16):
                cfg = BinningConfig(n=n, q=q, rate=rate, trials=20000, seed=37)
                ps.append(simulate_binning(cfg).p_hat)
            assert ps[1] < ps[0]
        # q = 0.2 pushes the rate past one bit per symbol: bins become
        # singletons and both error rates are exactly zero
        rate = hb(0.2) + 0.3
        ps = []
        for n in (8, 16):
            cfg = BinningConfig(n=n, q=0.2, rate=rate, trials=20000, seed=37)
            ps.append(simulate_binning(cfg).p_hat)
        assert ps[1] <= ps[0]

    def test_rate_below_entropy_fails(self):
        cfg = BinningConfig(n=16, q=0.1, rate=0.2, trials=4000, seed=41)
        assert simulate_binning(cfg).p_hat > 0.1

    def test_confidence_interval_brackets_estimate(self):
        res = simulate_binning(BinningConfig(n=8, q=0.1, rate=0.7, trials=5000, seed=43))
        assert res.ci_low <= res.p_hat <= res.ci_high

    def test_validation(self):
        with pytest.raises(ValidationError):
            BinningConfig(n=17, q=0.1, rate=0.5, trials=10, seed=0)
        with pytest.raises(ValidationError):
            BinningConfig(n=8, q=0.1, rate=-1.0, trials=10, seed=0)
        with pytest.raises(ValidationError):
            BinningConfig(n=8, q=1.0, rate=0.5, trials=10, seed=0)
