"""Scenario description and unit conversions shared by the design and analysis layers."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SystemConfig",
    "SubBlockLayout",
    "SnrPair",
    "db_to_linear",
    "linear_to_db",
    "snr_to_channel",
    "validate",
]


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0:
        raise ValueError("dB conversion requires a positive linear value")
    return 10.0 * math.log10(value)


def snr_to_channel(snr_db: float, power: float) -> float:
    """Channel magnitude |h| realizing ``snr_db`` at transmit power ``power``.

    Noise variance is normalized to 1 throughout, so SNR = power * |h|^2.
    """
    if power <= 0:
        raise ValueError("total power must be positive")
    return math.sqrt(db_to_linear(snr_db) / power)


@dataclass(frozen=True)
class SystemConfig:
    """Two-user downlink scenario.

    ``power`` is the total transmit power relative to the (unit) noise
    variance.  ``h1``/``h2`` are the complex channel gains; only their
    magnitudes matter to the transmit-side design, receivers use the full
    value.  ``n1 <= n2`` are the users' blocklengths in symbols and
    ``eps1``/``eps2`` the per-user targets on average decoding error
    probability.
    """

    power: float
    h1: complex
    h2: complex
    n1: int
    n2: int
    eps1: float
    eps2: float

    def __post_init__(self) -> None:
        validate(self)

    @classmethod
    def from_snr(
        cls,
        power: float,
        snr1_db: float,
        snr2_db: float,
        n1: int,
        n2: int,
        eps1: float,
        eps2: float,
    ) -> "SystemConfig":
        """Build a config from per-user SNRs in dB (yields real positive gains)."""
        return cls(
            power=power,
            h1=snr_to_channel(snr1_db, power),
            h2=snr_to_channel(snr2_db, power),
            n1=n1,
            n2=n2,
            eps1=eps1,
            eps2=eps2,
        )

    @property
    def gain1(self) -> float:
        return abs(self.h1)

    @property
    def gain2(self) -> float:
        return abs(self.h2)


def validate(config: SystemConfig) -> SystemConfig:
    """Return ``config`` if every invariant holds, else raise ``ValueError``."""
    if not (config.power > 0 and math.isfinite(config.power)):
        raise ValueError("total power must be positive and finite")
    if config.n1 < 1:
        raise ValueError("N1 must be at least 1 symbol")
    if config.n1 > config.n2:
        raise ValueError("N1 exceeds N2")
    for name, eps in (("eps1", config.eps1), ("eps2", config.eps2)):
        if not (0.0 < eps < 1.0):
            raise ValueError(f"error target must be in (0,1): {name}={eps}")
    for name, h in (("h1", config.h1), ("h2", config.h2)):
        if not (math.isfinite(abs(h))):
            raise ValueError(f"channel gain must be finite: {name}={h}")
    return config


@dataclass(frozen=True)
class SubBlockLayout:
    """Sub-block boundaries of the superimposed frame: [0, n1) and [n1, n2)."""

    boundaries: tuple[int, int, int]
    lengths: tuple[int, int]

    @classmethod
    def from_config(cls, config: SystemConfig) -> "SubBlockLayout":
        layout = cls(
            boundaries=(0, config.n1, config.n2),
            lengths=(config.n1, config.n2 - config.n1),
        )
        if sum(layout.lengths) != config.n2 or min(layout.lengths) < 0:
            raise ValueError("sub-block lengths must be nonnegative and sum to N2")
        return layout


@dataclass(frozen=True)
class SnrPair:
    """Per-user SNRs in dB, SNR_i = power * |h_i|^2."""

    snr1_db: float
    snr2_db: float

    @classmethod
    def from_config(cls, config: SystemConfig) -> "SnrPair":
        return cls(
            snr1_db=linear_to_db(config.power * config.gain1**2),
            snr2_db=linear_to_db(config.power * config.gain2**2),
        )
