import math

import numpy as np
import pytest

from pseudolabel.time_align import apply_shift, gcc_phat


def brute_force_offset(s1, y, max_lag):
    """Oracle: argmax over tau of sum_t s1(t + tau) * y(t), plain dot products."""
    best_tau, best_val = 0, -math.inf
    for tau in range(-max_lag, max_lag + 1):
        lo_t = max(0, -tau)
        hi_t = min(len(y), len(s1) - tau)
        if hi_t <= lo_t:
            continue
        val = float(np.dot(s1[lo_t + tau : hi_t + tau], y[lo_t:hi_t]))
        if val > best_val:
            best_val, best_tau = val, tau
    return best_tau


def delayed_pair(delay=160, gain=0.5, n=16000, noise_rms=0.0, seed=0):
    """Pair with y(t) = gain * s1(t - delay) + noise; expected offset is -delay."""
    rng = np.random.default_rng(seed)
    src = rng.standard_normal(n + abs(delay))
    s1 = src[:n].copy()
    if delay >= 0:
        y = gain * np.concatenate((np.zeros(delay), s1))[:n]
    else:
        y = gain * src[-delay : -delay + n]
    if noise_rms > 0:
        y = y + noise_rms * rng.standard_normal(n)
    return s1, y


class TestGccPhat:
    def test_autocorrelation_zero_offset(self):
        x = np.random.default_rng(1).standard_normal(8000)
        res = gcc_phat(x, x, max_lag=1000)
        assert res.offset_samples == 0
        assert res.peak_value > 0.5

    def test_delayed_white_noise_matches_oracle(self):
        rng = np.random.default_rng(2)
        src = rng.standard_normal(16161)
        s1 = src[:16000]
        y = np.concatenate((np.zeros(160), s1))[:16000]  # y(t) = s1(t - 160)
        res = gcc_phat(s1, y, max_lag=400)
        assert res.offset_samples == -160
        assert res.offset_samples == brute_force_offset(s1, y, 400)

    def test_noisy_attenuated_delay(self):
        rng = np.random.default_rng(3)
        s1 = rng.standard_normal(16000)
        clean = 0.5 * np.concatenate((np.zeros(160), s1))[:16000]
        noise = rng.standard_normal(16000)
        noise *= np.linalg.norm(clean) / np.linalg.norm(noise)  # 0 dB
        y = clean + noise
        res = gcc_phat(s1, y, max_lag=400)
        assert res.offset_samples == -160
        assert res.peak_ratio > 2
        assert res.offset_samples == brute_force_offset(s1, y, 400)

    def test_scale_invariance(self):
        s1, y = delayed_pair(delay=777, noise_rms=0.2, seed=4)
        base = gcc_phat(s1, y, max_lag=1500).offset_samples
        for c in (1e-4, 3.0, 1e5):
            assert gcc_phat(c * s1, y, max_lag=1500).offset_samples == base

    def test_composition_invariant(self):
        for seed in range(5):
            s1, y = delayed_pair(delay=200 + 37 * seed, gain=0.4, seed=seed)
            res = gcc_phat(s1, y, max_lag=2000)
            s2 = apply_shift(s1, res.offset_samples, len(y))
            assert gcc_phat(s2, y, max_lag=2000).offset_samples == 0

    def test_exact_recovery_mixed_delays(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = int(rng.integers(-3000, 3001))
            snr_db = float(rng.uniform(0, 25))
            src = rng.standard_normal(26000)
            s1 = src[4000:20000]
            target = 0.5 * src[4000 + d : 20000 + d]
            noise = rng.standard_normal(16000)
            noise *= np.linalg.norm(target) / (np.linalg.norm(noise) * 10 ** (snr_db / 20))
            y = target + noise
            res = gcc_phat(s1, y, max_lag=4000)
            assert res.offset_samples == d, f"delay {d} at {snr_db:.1f} dB"

    def test_refined_offset_near_integer(self):
        s1, y = delayed_pair(delay=160, seed=6)
        res = gcc_phat(s1, y, max_lag=400, refine=True)
        assert res.refined_offset is not None
        assert abs(res.refined_offset - res.offset_samples) < 0.5

    def test_peak_ratio_at_least_one(self):
        for seed in range(5):
            s1, y = delayed_pair(delay=seed * 31, noise_rms=1.0, seed=seed)
            assert gcc_phat(s1, y, max_lag=500).peak_ratio >= 1.0

    def test_zero_energy_rejected(self):
        x = np.random.default_rng(7).standard_normal(1000)
        with pytest.raises(ValueError, match="energy"):
            gcc_phat(np.zeros(1000), x, max_lag=100)
        with pytest.raises(ValueError, match="energy"):
            gcc_phat(x, np.zeros(1000), max_lag=100)

    def test_max_lag_too_large(self):
        x = np.random.default_rng(8).standard_normal(500)
        with pytest.raises(ValueError, match="max_lag"):
            gcc_phat(x, x, max_lag=999)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gcc_phat(np.array([]), np.ones(10), max_lag=2)


class TestApplyShift:
    def test_zero_offset_identity(self):
        x = np.random.default_rng(9).standard_normal(1000)
        np.testing.assert_array_equal(apply_shift(x, 0, 1000), x)

    def test_alignment_after_estimation(self):
        rng = np.random.default_rng(10)
        src = rng.standard_normal(16200)
        s1 = src[:16000]
        y = np.concatenate((np.zeros(160), s1))[:16000]
        s2 = apply_shift(s1, -160, len(y))
        ncc = np.dot(s2, y) / (np.linalg.norm(s2) * np.linalg.norm(y))
        assert ncc > 0.99

    def test_full_shift_out_is_zero(self):
        x = np.ones(100)
        assert np.all(apply_shift(x, 200, 100) == 0)
        assert np.all(apply_shift(x, -200, 100) == 0)

    def test_zero_fill_and_length(self):
        x = np.arange(1.0, 11.0)
        out = apply_shift(x, 3, 10)
        np.testing.assert_array_equal(out[:7], x[3:])
        np.testing.assert_array_equal(out[7:], 0)
        out = apply_shift(x, -2, 5)
        np.testing.assert_array_equal(out, [0, 0, 1, 2, 3])

    def test_bad_target_len(self):
        with pytest.raises(ValueError):
            apply_shift(np.ones(5), 0, 0)
