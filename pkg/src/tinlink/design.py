"""Modulation-order constraints, two-layer power assignment, transmit spec.

The sub-block-1 superposition places the stronger user's constellation as the
inner layer; the weaker user's sub-block-1 constellation is lifted by the
square root of the inner order so the superposed points form a regular QAM
with unit minimum distance.  Powers then follow in closed form from the
total-power identity once the sub-block-2 power is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constellation import MAX_ORDER, Constellation, build_qam
from .system import SystemConfig

__all__ = [
    "ModulationTuple",
    "PowerAllocation",
    "TransmitSpec",
    "max_mod_orders",
    "feasible_tuples",
    "assign_power",
    "balanced_allocation",
    "build_transmit_spec",
    "inner_user",
]

_POWER_TOL = 1e-9


@dataclass(frozen=True)
class ModulationTuple:
    """Bits/symbol for user 1, user 2 sub-block 1, user 2 sub-block 2."""

    m1: int
    m21: int
    m22: int

    def __post_init__(self) -> None:
        for name, m in (("m1", self.m1), ("m21", self.m21), ("m22", self.m22)):
            if m < 0 or m % 2 != 0:
                raise ValueError(f"{name} must be 0 or even, got {m}")
        if self.m1 + self.m21 > MAX_ORDER:
            raise ValueError("m1 + m21 exceeds the supported maximum order")
        if self.m22 > MAX_ORDER:
            raise ValueError("m22 exceeds the supported maximum order")


@dataclass(frozen=True)
class PowerAllocation:
    """Per-layer linear powers and unit-energy normalization factors."""

    p1: float
    p21: float
    p22: float
    eta1: float
    eta2: float


@dataclass(frozen=True)
class TransmitSpec:
    """Scaled per-sub-block constellations plus the layering order."""

    user1: Constellation
    user2_sub1: Constellation
    user2_sub2: Constellation
    inner: int  # which user's sub-block-1 constellation is the inner layer
    tuple: ModulationTuple
    allocation: PowerAllocation


def inner_user(config: SystemConfig) -> int:
    """Stronger user is the inner layer; ties go to user 1."""
    return 1 if config.gain1 >= config.gain2 else 2


def _floor_log2(x: float) -> int:
    """floor(log2(x)) clamped at 0; nonpositive arguments also clamp to 0."""
    if x < 1.0:
        return 0
    return int(math.floor(math.log2(x)))


def max_mod_orders(
    config: SystemConfig, subblock1_power: float
) -> tuple[int, int, int]:
    """Caps (on m1+m21, m21, m22) that keep unit post-channel minimum distance.

    ``subblock1_power`` is the total power P1+P21 of the superposed first
    sub-block; the sub-block-2 power follows from the total-power identity.
    """
    if subblock1_power <= 0:
        raise ValueError("sub-block-1 power must be positive")
    p, n1, n2 = config.power, config.n1, config.n2
    if n2 > n1:
        p22 = (n2 * p - n1 * subblock1_power) / (n2 - n1)
        if p22 < -_POWER_TOL:
            raise ValueError("sub-block-1 power exceeds the total-power budget")
        p22 = max(p22, 0.0)
    else:
        p22 = 0.0
    g1sq, g2sq = config.gain1**2, config.gain2**2
    cap_sum = _floor_log2(1.0 + 6.0 * subblock1_power * max(g1sq, g2sq))
    cap_m21 = _floor_log2(6.0 * subblock1_power * g2sq)
    cap_m22 = _floor_log2(1.0 + 6.0 * p22 * g2sq)
    return cap_sum, cap_m21, cap_m22


def feasible_tuples(config: SystemConfig) -> list[ModulationTuple]:
    """Every even/zero-order tuple satisfying the caps, lexicographically sorted.

    The caps are evaluated at the balanced second-layer assignment
    (P1 + P21 = P), matching the default design path.
    """
    cap_sum, cap_m21, cap_m22 = max_mod_orders(config, config.power)
    cap_sum = min(cap_sum, MAX_ORDER)
    cap_m22 = min(cap_m22, MAX_ORDER)
    tuples = []
    for m1 in range(0, cap_sum + 1, 2):
        for m21 in range(0, min(cap_m21, cap_sum - m1) + 1, 2):
            for m22 in range(0, cap_m22 + 1, 2):
                tuples.append(ModulationTuple(m1, m21, m22))
    return tuples


def assign_power(
    tup: ModulationTuple, config: SystemConfig, p22: float
) -> PowerAllocation:
    """Split the sub-block-1 budget across the two layers, given ``p22``.

    The budget S = (N2/N1) P - ((N2-N1)/N1) p22 is shared so that each
    layer's share is proportional to its constellation's energy inside the
    unit-energy superposed QAM; the inner layer (stronger user) takes the
    (2^m_inner - 1) fraction.
    """
    if p22 < 0:
        raise ValueError("sub-block-2 power must be nonnegative")
    p, n1, n2 = config.power, config.n1, config.n2
    s = (n2 * p - (n2 - n1) * p22) / n1
    if s < -_POWER_TOL:
        raise ValueError("P22 too large: sub-block-1 power would be negative")
    s = max(s, 0.0)
    m_sum = tup.m1 + tup.m21
    if m_sum == 0:
        if s > _POWER_TOL:
            raise ValueError(
                "inconsistent degenerate case: m1 + m21 = 0 requires zero "
                "sub-block-1 power"
            )
        p1 = p21 = 0.0
    else:
        denom = float((1 << m_sum) - 1)
        if inner_user(config) == 1:
            p1 = s * ((1 << tup.m1) - 1) / denom
            p21 = s * ((1 << m_sum) - (1 << tup.m1)) / denom
        else:
            p21 = s * ((1 << tup.m21) - 1) / denom
            p1 = s * ((1 << m_sum) - (1 << tup.m21)) / denom
    eta1 = math.sqrt(6.0 / ((1 << m_sum) - 1)) if m_sum >= 1 else 0.0
    eta2 = math.sqrt(6.0 / ((1 << tup.m22) - 1)) if tup.m22 >= 1 else 0.0
    return PowerAllocation(p1=p1, p21=p21, p22=p22, eta1=eta1, eta2=eta2)


def balanced_allocation(tup: ModulationTuple, config: SystemConfig) -> PowerAllocation:
    """Balanced second-layer assignment: P22 = P1 + P21 = P."""
    return assign_power(tup, config, p22=config.power)


def _check_consistency(
    tup: ModulationTuple, alloc: PowerAllocation, config: SystemConfig
) -> None:
    reference = assign_power(tup, config, alloc.p22)
    if (
        abs(reference.p1 - alloc.p1) > _POWER_TOL
        or abs(reference.p21 - alloc.p21) > _POWER_TOL
    ):
        raise ValueError("allocation inconsistent with the closed-form assignment")


def build_transmit_spec(
    tup: ModulationTuple, alloc: PowerAllocation, config: SystemConfig
) -> TransmitSpec:
    """Scale the three constellations so their energies realize the allocation.

    Raises if the tuple violates the modulation-order caps at this allocation
    or if the allocation is inconsistent with the closed-form assignment.
    """
    _check_consistency(tup, alloc, config)
    s = alloc.p1 + alloc.p21
    if s > _POWER_TOL or alloc.p22 > _POWER_TOL:
        cap_sum, cap_m21, cap_m22 = max_mod_orders(config, max(s, _POWER_TOL))
        if tup.m1 + tup.m21 > cap_sum or tup.m21 > cap_m21 or tup.m22 > cap_m22:
            raise ValueError(
                f"tuple ({tup.m1},{tup.m21},{tup.m22}) violates the caps "
                f"({cap_sum},{cap_m21},{cap_m22}) at this allocation"
            )
    base1 = build_qam(tup.m1)
    base21 = build_qam(tup.m21)
    base22 = build_qam(tup.m22)
    inner = inner_user(config)
    root_s = math.sqrt(s)
    if inner == 1:
        scale1 = alloc.eta1 * root_s
        scale21 = alloc.eta1 * math.sqrt(float(1 << tup.m1) * s)
    else:
        scale21 = alloc.eta1 * root_s
        scale1 = alloc.eta1 * math.sqrt(float(1 << tup.m21) * s)
    scale22 = alloc.eta2 * math.sqrt(alloc.p22)
    return TransmitSpec(
        user1=base1.scale(scale1) if scale1 > 0 else base1,
        user2_sub1=base21.scale(scale21) if scale21 > 0 else base21,
        user2_sub2=base22.scale(scale22) if scale22 > 0 else base22,
        inner=inner,
        tuple=tup,
        allocation=alloc,
    )
