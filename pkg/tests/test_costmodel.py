"""Decoder FLOPs model: formulas, calibration, per-layer pruning accounting."""

import numpy as np
import pytest

from rtprune import (
    DecoderCostConfig,
    InfeasibleCalibration,
    InvalidInput,
    attn_flops,
    calibrate_m,
    calibrated_config,
    ffn_flops,
    moe_flops,
    prune_at_layer_flops,
    total_flops,
)


class TestFormulaUnits:
    def test_attn_zero(self):
        assert attn_flops(0, 1280) == 0

    def test_attn_unit(self):
        assert attn_flops(1, 1) == 12

    def test_attn_base(self):
        assert attn_flops(283, 1280) == 8 * 283 * 1280**2 + 4 * 283**2 * 1280
        assert attn_flops(283, 1280) == 4_119_393_280

    def test_ffn_zero_and_unit(self):
        assert ffn_flops(0, 1280, 6854) == 0
        assert ffn_flops(1, 1, 1) == 6

    def test_moe_zero_and_base(self):
        assert moe_flops(0, 1280, 6, 896, 1792) == 0
        assert moe_flops(283, 1280, 6, 896, 1792) == 6 * 283 * 1280 * 7168
        assert moe_flops(283, 1280, 6, 896, 1792) == 15_579_217_920

    def test_exact_integers(self):
        assert isinstance(total_flops(283), int)
        assert isinstance(attn_flops(10**7, 10**4), int)

    def test_negative_rejected(self):
        with pytest.raises(InvalidInput):
            attn_flops(-1, 1280)
        with pytest.raises(InvalidInput):
            total_flops(-5)


class TestTotalFlops:
    def test_base_anchor(self):
        assert total_flops(283) == 235_700_874_240
        assert abs(total_flops(283) - 235.7e9) <= 0.005 * 235.7e9

    def test_pruned_base(self):
        assert abs(total_flops(219) - 181.5e9) <= 0.005 * 181.5e9

    def test_large_anchor(self):
        assert abs(total_flops(431) - 363.0e9) <= 0.005 * 363.0e9

    def test_strictly_increasing(self):
        values = [total_flops(n) for n in range(1, 600, 7)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_general_stack_counts(self):
        cfg = DecoderCostConfig(d=8, m=16, m1=4, m2=8, k=2, t1=3, t2=2)
        n = 5
        want = 5 * attn_flops(n, 8) + 3 * ffn_flops(n, 8, 16) + 2 * moe_flops(n, 8, 2, 4, 8)
        assert total_flops(n, cfg) == want


class TestCalibration:
    def test_base_target(self):
        assert calibrate_m(283, 235.7e9) == 6854

    def test_round_trip_identity(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            cfg = DecoderCostConfig(
                d=int(rng.integers(1, 4096)),
                m=int(rng.integers(1, 20000)),
                m1=int(rng.integers(1, 2048)),
                m2=int(rng.integers(1, 4096)),
                k=int(rng.integers(1, 16)),
                t1=int(rng.integers(1, 4)),
                t2=int(rng.integers(1, 24)),
            )
            n = int(rng.integers(1, 2048))
            assert calibrate_m(n, total_flops(n, cfg), cfg) == cfg.m

    def test_infeasible_below_fixed_cost(self):
        with pytest.raises(InfeasibleCalibration):
            calibrate_m(283, float(12 * attn_flops(283, 1280)))
        with pytest.raises(InfeasibleCalibration):
            calibrate_m(283, 1.0)

    def test_zero_tokens_rejected(self):
        with pytest.raises(InvalidInput):
            calibrate_m(0, 1e9)

    def test_calibrated_config(self):
        cfg = calibrated_config(283, 235.7e9)
        assert cfg.m == 6854
        assert cfg.d == 1280


class TestPruneAtLayer:
    def test_last_layer_equals_total(self):
        assert prune_at_layer_flops(283, 219, 11) == total_flops(283)

    def test_first_layer_value(self):
        flops = prune_at_layer_flops(283, 219, 0)
        assert abs(flops - 185.9e9) <= 0.005 * 185.9e9

    def test_mid_layer_value(self):
        flops = prune_at_layer_flops(283, 219, 5)
        assert abs(flops - 208.5e9) <= 0.005 * 208.5e9

    def test_monotone_in_layer(self):
        values = [prune_at_layer_flops(283, 219, layer) for layer in range(12)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_constant_moe_increment(self):
        values = [prune_at_layer_flops(283, 219, layer) for layer in range(12)]
        # Each step converts one MoE layer from pruned back to full cost
        # (the lone standard layer runs at full count for every choice).
        steps = {b - a for a, b in zip(values, values[1:])}
        assert len(steps) == 1
        step = steps.pop()
        want = (attn_flops(283, 1280) + moe_flops(283, 1280, 6, 896, 1792)) - (
            attn_flops(219, 1280) + moe_flops(219, 1280, 6, 896, 1792)
        )
        assert step == want

    def test_layer_out_of_range(self):
        with pytest.raises(InvalidInput):
            prune_at_layer_flops(283, 219, 12)
        with pytest.raises(InvalidInput):
            prune_at_layer_flops(283, 219, -1)

    def test_equal_counts_collapse(self):
        assert prune_at_layer_flops(283, 283, 4) == total_flops(283)
