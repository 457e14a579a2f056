"""Analytic FLOPs model for a decoder stack with dense and MoE layers.

All quantities are exact Python integers.  Per layer and per token the
model charges 8*n*d^2 + 4*n^2*d for attention, 6*n*d*m for a dense FFN,
and 6*n*d*(k*m1 + m2) for an MoE FFN with k routed experts of width m1
plus a shared expert of width m2.  The stack has t1 dense layers
followed by t2 MoE layers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InfeasibleCalibration, InvalidInput


@dataclass(frozen=True)
class DecoderCostConfig:
    """Decoder shape.  The default dense width m is calibrated so the
    12-layer stack at 283 tokens costs 235.7e9 FLOPs."""

    d: int = 1280
    m: int = 6854
    m1: int = 896
    m2: int = 1792
    k: int = 6
    t1: int = 1
    t2: int = 11

    def __post_init__(self) -> None:
        for name in ("d", "m", "m1", "m2", "k", "t1", "t2"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise InvalidInput(f"{name} must be a positive integer, got {value!r}")

    @property
    def layers(self) -> int:
        return self.t1 + self.t2


def _check_count(n: int, name: str = "n") -> int:
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise InvalidInput(f"{name} must be a non-negative integer, got {n!r}")
    return n


def attn_flops(n: int, d: int) -> int:
    """Self-attention cost for n tokens at hidden size d."""
    _check_count(n)
    _check_count(d, "d")
    return 8 * n * d * d + 4 * n * n * d


def ffn_flops(n: int, d: int, m: int) -> int:
    """Dense feed-forward cost for n tokens."""
    _check_count(n)
    return 6 * n * d * m


def moe_flops(n: int, d: int, k: int, m1: int, m2: int) -> int:
    """Mixture-of-experts cost: k routed experts of width m1 plus a
    shared expert of width m2."""
    _check_count(n)
    return 6 * n * d * (k * m1 + m2)


def total_flops(n: int, config: DecoderCostConfig = DecoderCostConfig()) -> int:
    """Whole-stack decoder cost for n tokens."""
    _check_count(n)
    attn = attn_flops(n, config.d)
    ffn = ffn_flops(n, config.d, config.m)
    moe = moe_flops(n, config.d, config.k, config.m1, config.m2)
    return config.layers * attn + config.t1 * ffn + config.t2 * moe


def calibrate_m(n: int, target_flops, config: DecoderCostConfig = DecoderCostConfig()) -> int:
    """Dense width m whose whole-stack cost at n tokens is nearest
    ``target_flops``.  The m stored in ``config`` is ignored.

    Raises InfeasibleCalibration when the target cannot be met by any
    positive width.
    """
    _check_count(n)
    if n == 0:
        raise InvalidInput("cannot calibrate at n = 0: the dense term vanishes")
    fixed = config.layers * attn_flops(n, config.d) + config.t2 * moe_flops(
        n, config.d, config.k, config.m1, config.m2
    )
    numerator = target_flops - fixed
    denominator = 6 * n * config.d * config.t1
    if numerator <= 0:
        raise InfeasibleCalibration(
            f"target {target_flops} is not above the fixed cost {fixed} at n = {n}"
        )
    if isinstance(numerator, int):
        # Exact nearest integer, no float round-trip.
        q, rem = divmod(numerator, denominator)
        m = q + (1 if 2 * rem >= denominator else 0)
    else:
        m = round(numerator / denominator)
    if m < 1:
        raise InfeasibleCalibration(
            f"target {target_flops} rounds to a non-positive dense width at n = {n}"
        )
    return int(m)


def calibrated_config(n: int, target_flops, config: DecoderCostConfig = DecoderCostConfig()) -> DecoderCostConfig:
    """Copy of ``config`` with m recalibrated against ``target_flops``."""
    return replace(config, m=calibrate_m(n, target_flops, config))


def prune_at_layer_flops(
    n_full: int,
    n_pruned: int,
    layer: int,
    config: DecoderCostConfig = DecoderCostConfig(),
) -> int:
    """Stack cost when pruning takes effect after ``layer``.

    Layers 0..layer run on n_full tokens, the rest on n_pruned.  Layer
    indices follow the stack order: the first t1 layers are dense, the
    remaining t2 are MoE.
    """
    _check_count(n_full, "n_full")
    _check_count(n_pruned, "n_pruned")
    if not isinstance(layer, int) or isinstance(layer, bool) or not (0 <= layer < config.layers):
        raise InvalidInput(
            f"layer must lie in [0, {config.layers - 1}], got {layer!r}"
        )
    total = 0
    for i in range(config.layers):
        n = n_full if i <= layer else n_pruned
        total += attn_flops(n, config.d)
        if i < config.t1:
            total += ffn_flops(n, config.d, config.m)
        else:
            total += moe_flops(n, config.d, config.k, config.m1, config.m2)
    return total
