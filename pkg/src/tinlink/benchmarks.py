"""Perfect-SIC benchmark rate pairs for Gaussian and shell codebooks.

The strong user decodes after exact cancellation of the weak user's
sub-block-1 signal; the weak user treats the remaining interference as
Gaussian noise.  Closed-form mutual information and dispersion per effective
SNR come from the standard complex-AWGN expressions for i.i.d. Gaussian
inputs and for codewords drawn uniformly from the power shell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fbl import qinv
from .system import SystemConfig

__all__ = [
    "BenchmarkPoint",
    "gaussian_iv",
    "shell_iv",
    "sic_rate_pair",
    "region_search",
]

_LOG2E_SQ = (1.0 / math.log(2.0)) ** 2
_POWER_TOL = 1e-9
_FAMILIES = ("gaussian", "shell")


@dataclass(frozen=True)
class BenchmarkPoint:
    """One evaluated power split of a perfect-SIC benchmark scheme."""

    code_family: str
    p1: float
    p21: float
    p22: float
    r1: float
    r2: float
    iv_user1: tuple[float, float]
    iv_user2_sub1: tuple[float, float]
    iv_user2_sub2: tuple[float, float]


def gaussian_iv(gamma: float) -> tuple[float, float]:
    """(I, V) in bits, bits^2 for i.i.d. Gaussian codebooks at SNR ``gamma``."""
    if gamma < 0:
        raise ValueError("effective SNR must be nonnegative")
    mi = math.log2(1.0 + gamma)
    dispersion = (2.0 * gamma / (1.0 + gamma)) * _LOG2E_SQ
    return mi, dispersion


def shell_iv(gamma: float) -> tuple[float, float]:
    """(I, V) for shell codebooks (uniform on the power sphere)."""
    if gamma < 0:
        raise ValueError("effective SNR must be nonnegative")
    mi = math.log2(1.0 + gamma)
    dispersion = (gamma * (gamma + 2.0) / (1.0 + gamma) ** 2) * _LOG2E_SQ
    return mi, dispersion


def _family_iv(family: str, gamma: float) -> tuple[float, float]:
    if family == "gaussian":
        return gaussian_iv(gamma)
    if family == "shell":
        return shell_iv(gamma)
    raise ValueError(f"unknown code family: {family!r}")


def sic_rate_pair(
    config: SystemConfig,
    powers: tuple[float, float, float],
    family: str,
) -> tuple[float, float]:
    """Second-order rate pair under perfect SIC at the given power split.

    Assumes the |h1| >= |h2| ordering: user 1 cancels user 2's sub-block-1
    signal exactly, user 2 treats user 1 as Gaussian noise.
    """
    p1, p21, p22 = powers
    if min(p1, p21, p22) < -_POWER_TOL:
        raise ValueError("powers must be nonnegative")
    n1, n2 = config.n1, config.n2
    total = (n1 * (p1 + p21) + (n2 - n1) * p22) / n2
    if abs(total - config.power) > 1e-6 * max(1.0, config.power):
        raise ValueError("powers violate the total-power identity")
    g1sq, g2sq = config.gain1**2, config.gain2**2
    mi1, v1 = _family_iv(family, p1 * g1sq)
    r1 = max(0.0, mi1 - math.sqrt(v1 / n1) * qinv(config.eps1))
    gamma21 = p21 * g2sq / (1.0 + p1 * g2sq)
    gamma22 = p22 * g2sq
    mi21, v21 = _family_iv(family, gamma21)
    mi22, v22 = _family_iv(family, gamma22)
    len2 = n2 - n1
    mean_info = (n1 * mi21 + len2 * mi22) / n2
    backoff = math.sqrt(n1 * v21 + len2 * v22) / n2 * qinv(config.eps2)
    r2 = max(0.0, mean_info - backoff)
    return r1, r2


def _pareto(points: list[BenchmarkPoint]) -> list[BenchmarkPoint]:
    """Nondominated subset, sorted by increasing R1."""
    ordered = sorted(points, key=lambda p: (-p.r1, -p.r2))
    frontier: list[BenchmarkPoint] = []
    best_r2 = -math.inf
    for point in ordered:
        if point.r2 > best_r2:
            frontier.append(point)
            best_r2 = point.r2
    frontier.reverse()
    return frontier


def region_search(
    config: SystemConfig,
    family: str,
    grid_resolution: int = 64,
) -> list[BenchmarkPoint]:
    """Brute-force Pareto frontier over the feasible (P1, P22) power grid.

    P21 is implied by the total-power identity.  Returns the nondominated
    points sorted by increasing R1.
    """
    if grid_resolution < 32:
        raise ValueError("grid resolution must be at least 32 points per dimension")
    if family not in _FAMILIES:
        raise ValueError(f"unknown code family: {family!r}")
    p, n1, n2 = config.power, config.n1, config.n2
    g1sq, g2sq = config.gain1**2, config.gain2**2
    points: list[BenchmarkPoint] = []
    if n2 > n1:
        p22_max = n2 * p / (n2 - n1)
        p22_grid = [p22_max * i / (grid_resolution - 1) for i in range(grid_resolution)]
    else:
        p22_grid = [0.0]
    for p22 in p22_grid:
        budget = (n2 * p - (n2 - n1) * p22) / n1
        if budget < 0:
            continue
        for j in range(grid_resolution):
            p1 = budget * j / (grid_resolution - 1)
            p21 = budget - p1
            r1, r2 = sic_rate_pair(config, (p1, p21, p22), family)
            points.append(
                BenchmarkPoint(
                    code_family=family,
                    p1=p1,
                    p21=p21,
                    p22=p22,
                    r1=r1,
                    r2=r2,
                    iv_user1=_family_iv(family, p1 * g1sq),
                    iv_user2_sub1=_family_iv(
                        family, p21 * g2sq / (1.0 + p1 * g2sq)
                    ),
                    iv_user2_sub2=_family_iv(family, p22 * g2sq),
                )
            )
    return _pareto(points)
