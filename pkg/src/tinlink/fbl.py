"""Information density, mutual information/dispersion estimation, and the
second-order (normal-approximation) achievable rates under single-user
decoding.

Monte Carlo estimates use a counter-based generator keyed by
(seed, stream, chunk index) with a fixed chunk size, so a given
(seed, n_samples) pair always reproduces bit-identical results regardless of
how the chunks would be scheduled.  The third-order O(log N / N) term of the
normal approximation is evaluated as zero everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc, erfcinv

from .design import ModulationTuple, PowerAllocation, TransmitSpec, balanced_allocation, build_transmit_spec
from .system import SystemConfig

__all__ = [
    "McEstimate",
    "RatePoint",
    "info_density",
    "info_density_user1",
    "mi_dispersion",
    "rate_user1",
    "rate_user2",
    "epsilon_from_rate",
    "qfunc",
    "qinv",
    "dt_bound_epsilon",
    "density_sampler",
    "rate_point",
]

_LN2 = math.log(2.0)
_MASK64 = (1 << 64) - 1

# Fixed Monte Carlo chunk size; part of the reproducibility contract.
CHUNK_SIZE = 1 << 14

_STREAMS = {"user1": 1, "user2_sub1": 2, "user2_sub2": 3}


def _mix64(x: int) -> int:
    """splitmix64 finalizer; spreads low-entropy seeds over the key space."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def _chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    key = np.array([_mix64((seed & _MASK64) ^ _mix64(stream)), chunk], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _logsumexp(metric: np.ndarray) -> np.ndarray:
    """Row-wise max-shifted log-sum-exp (natural log) of a 2-D metric array."""
    peak = metric.max(axis=1)
    return peak + np.log(np.exp(metric - peak[:, None]).sum(axis=1))


def _density_bits(
    y: np.ndarray,
    x_idx: np.ndarray,
    intended: np.ndarray,
    interferer: np.ndarray | None,
    h: complex,
) -> np.ndarray:
    """Per-symbol information density in bits under uniform inputs.

    The conditional law is the complex Gaussian kernel exp(-|y - h(x + b)|^2)
    averaged over the uniform interferer b; the output law additionally
    averages over the uniform intended symbol.
    """
    n_in = len(intended)
    if n_in == 1:
        return np.zeros(len(y))
    if interferer is None or len(interferer) == 1:
        offset = 0.0 if interferer is None else h * interferer[0]
        num = -np.abs(y - h * intended[x_idx] - offset) ** 2
        den_metric = -np.abs((y - offset)[:, None] - h * intended[None, :]) ** 2
        den = _logsumexp(den_metric)
    else:
        shifted = y - h * intended[x_idx]
        num_metric = -np.abs(shifted[:, None] - h * interferer[None, :]) ** 2
        num = _logsumexp(num_metric)
        pair_sums = (intended[:, None] + interferer[None, :]).ravel()
        den_metric = -np.abs(y[:, None] - h * pair_sums[None, :]) ** 2
        den = _logsumexp(den_metric)
    return (num - den) / _LN2 + math.log2(n_in)


@dataclass(frozen=True)
class McEstimate:
    """Seeded Monte Carlo estimate of a scalar statistic.

    ``mean`` is the estimate, ``variance`` the unbiased sample variance of the
    per-sample statistic, and ``std_error_mean`` the standard error of
    ``mean``.
    """

    mean: float
    variance: float
    n_samples: int
    std_error_mean: float
    seed: int


class _Moments:
    """Streaming central moments up to order 4 with exact pairwise merging.

    The merge is performed in fixed chunk order, so accumulation is
    deterministic and independent of any parallel execution plan.
    """

    def __init__(self) -> None:
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.m3 = 0.0
        self.m4 = 0.0

    def add(self, values: np.ndarray) -> None:
        nb = values.size
        if nb == 0:
            return
        mb = float(values.mean())
        d = values - mb
        d2 = d * d
        m2b = float(d2.sum())
        m3b = float((d2 * d).sum())
        m4b = float((d2 * d2).sum())
        na, n = self.n, self.n + nb
        if na == 0:
            self.n, self.mean, self.m2, self.m3, self.m4 = nb, mb, m2b, m3b, m4b
            return
        delta = mb - self.mean
        self.mean += delta * nb / n
        m2 = self.m2 + m2b + delta**2 * na * nb / n
        m3 = (
            self.m3
            + m3b
            + delta**3 * na * nb * (na - nb) / n**2
            + 3.0 * delta * (na * m2b - nb * self.m2) / n
        )
        m4 = (
            self.m4
            + m4b
            + delta**4 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6.0 * delta**2 * (na * na * m2b + nb * nb * self.m2) / n**2
            + 4.0 * delta * (na * m3b - nb * self.m3) / n
        )
        self.n, self.m2, self.m3, self.m4 = n, m2, m3, m4

    def mean_estimate(self, seed: int) -> McEstimate:
        var = self.m2 / (self.n - 1)
        return McEstimate(
            mean=self.mean,
            variance=var,
            n_samples=self.n,
            std_error_mean=math.sqrt(var / self.n),
            seed=seed,
        )

    def variance_estimate(self, seed: int) -> McEstimate:
        n = self.n
        var = self.m2 / (n - 1)
        m2, m4 = self.m2 / n, self.m4 / n
        var_of_var = max((m4 - m2 * m2 * (n - 3) / (n - 1)) / n, 0.0)
        return McEstimate(
            mean=var,
            variance=max(m4 - m2 * m2, 0.0),
            n_samples=n,
            std_error_mean=math.sqrt(var_of_var),
            seed=seed,
        )


def _resolve_constellations(
    spec: TransmitSpec, which: str
) -> tuple[np.ndarray, np.ndarray | None]:
    if which == "user1":
        return spec.user1.points, spec.user2_sub1.points
    if which == "user2_sub1":
        return spec.user2_sub1.points, spec.user1.points
    if which == "user2_sub2":
        return spec.user2_sub2.points, None
    raise ValueError(f"unknown channel selector: {which!r}")


def info_density(
    y: np.ndarray | complex,
    x: complex,
    intended: np.ndarray,
    interferer: np.ndarray | None,
    h: complex,
) -> np.ndarray:
    """Information density i(x; y) in bits for a symbol of the intended set."""
    intended = np.asarray(intended, dtype=complex).ravel()
    matches = np.flatnonzero(np.isclose(intended, x, rtol=0, atol=1e-9))
    if matches.size == 0:
        raise ValueError("x is not a point of the intended constellation")
    y_arr = np.atleast_1d(np.asarray(y, dtype=complex))
    idx = np.full(y_arr.shape, matches[0], dtype=np.intp)
    interferer_pts = (
        None if interferer is None else np.asarray(interferer, dtype=complex).ravel()
    )
    out = _density_bits(y_arr, idx, intended, interferer_pts, h)
    return out if np.ndim(y) else float(out[0])


def info_density_user1(
    x1: complex, y1: np.ndarray | complex, spec: TransmitSpec, h1: complex
) -> np.ndarray:
    """User 1's per-symbol density: user 2's sub-block-1 signal is noise."""
    intended, interferer = _resolve_constellations(spec, "user1")
    return info_density(y1, x1, intended, interferer, h1)


def mi_dispersion(
    spec: TransmitSpec,
    h: complex,
    which: str,
    n_samples: int,
    seed: int,
) -> tuple[McEstimate, McEstimate]:
    """Monte Carlo (mutual information, dispersion) of one TIN channel.

    ``which`` selects the intended/interfering constellations: ``user1``
    (interfered by user 2's first sub-block), ``user2_sub1`` (the swap), or
    ``user2_sub2`` (interference-free).  Returns (I, V) as seeded estimates.
    """
    if n_samples < 10_000:
        raise ValueError("insufficient samples: need at least 10^4")
    intended, interferer = _resolve_constellations(spec, which)
    stream = _STREAMS[which]
    moments = _Moments()
    done = 0
    chunk_idx = 0
    while done < n_samples:
        n = min(CHUNK_SIZE, n_samples - done)
        rng = _chunk_rng(seed, stream, chunk_idx)
        x_idx = rng.integers(0, len(intended), size=n)
        if interferer is not None:
            b_idx = rng.integers(0, len(interferer), size=n)
            tx = intended[x_idx] + interferer[b_idx]
        else:
            tx = intended[x_idx]
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        y = h * tx + noise
        moments.add(_density_bits(y, x_idx, intended, interferer, h))
        done += n
        chunk_idx += 1
    return moments.mean_estimate(seed), moments.variance_estimate(seed)


def qfunc(x: np.ndarray | float) -> np.ndarray | float:
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0)) if np.ndim(x) else 0.5 * float(
        erfc(x / math.sqrt(2.0))
    )


def qinv(p: float) -> float:
    """Inverse Gaussian tail function, accurate across (1e-12, 1 - 1e-12)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"probability must be in (0,1), got {p}")
    return math.sqrt(2.0) * float(erfcinv(2.0 * p))


def rate_user1(mi: float, dispersion: float, n1: int, eps1: float) -> float:
    """Second-order achievable rate of the fully interfered single sub-block."""
    if dispersion < 0:
        raise ValueError("dispersion must be nonnegative")
    backoff = math.sqrt(dispersion / n1) * qinv(eps1)
    return max(0.0, mi - backoff)


def rate_user2(
    mi_sub1: float,
    v_sub1: float,
    mi_sub2: float,
    v_sub2: float,
    n1: int,
    n2: int,
    eps2: float,
) -> float:
    """Second-order achievable rate across the two unequal sub-blocks."""
    if v_sub1 < 0 or v_sub2 < 0:
        raise ValueError("dispersion must be nonnegative")
    len1, len2 = n1, n2 - n1
    mean_info = (len1 * mi_sub1 + len2 * mi_sub2) / n2
    backoff = math.sqrt(len1 * v_sub1 + len2 * v_sub2) / n2 * qinv(eps2)
    return max(0.0, mean_info - backoff)


def epsilon_from_rate(
    rate: float,
    mi_terms: Sequence[float],
    v_terms: Sequence[float],
    lengths: Sequence[int],
) -> float:
    """Error probability implied by the normal approximation at a given rate."""
    if not (len(mi_terms) == len(v_terms) == len(lengths)):
        raise ValueError("mi_terms, v_terms and lengths must have equal length")
    total = sum(lengths)
    excess = sum(l * i for l, i in zip(lengths, mi_terms)) - total * rate
    dispersion_sum = sum(l * v for l, v in zip(lengths, v_terms))
    if dispersion_sum <= 0:
        if excess > 0:
            return 0.0
        return 0.5 if excess == 0 else 1.0
    return float(qfunc(excess / math.sqrt(dispersion_sum)))


def density_sampler(
    spec: TransmitSpec, h: complex, which: str
) -> Callable[[np.random.Generator, tuple[int, ...]], np.ndarray]:
    """i.i.d. per-symbol information-density sampler for one TIN channel."""
    intended, interferer = _resolve_constellations(spec, which)

    def sample(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        n = int(np.prod(shape))
        x_idx = rng.integers(0, len(intended), size=n)
        tx = intended[x_idx]
        if interferer is not None:
            tx = tx + interferer[rng.integers(0, len(interferer), size=n)]
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        dens = _density_bits(h * tx + noise, x_idx, intended, interferer, h)
        return dens.reshape(shape)

    return sample


def dt_bound_epsilon(
    sampler: Callable[[np.random.Generator, tuple[int, ...]], np.ndarray],
    codebook_size: int,
    n_symbols: int,
    n_samples: int,
    seed: int,
) -> McEstimate:
    """Monte Carlo dependence-testing upper bound on the error probability.

    Each trial sums ``n_symbols`` i.i.d. per-symbol densities and scores
    2^(-max(0, sum - log2((M-1)/2))); the mean over trials upper-bounds the
    average error probability of a size-M random codebook.
    """
    if codebook_size < 2:
        raise ValueError("codebook size must be at least 2")
    if n_samples < 1:
        raise ValueError("insufficient samples")
    threshold = math.log2(codebook_size - 1) - 1.0
    per_chunk = max(1, CHUNK_SIZE // n_symbols)
    moments = _Moments()
    done = 0
    chunk_idx = 0
    while done < n_samples:
        n = min(per_chunk, n_samples - done)
        rng = _chunk_rng(seed, 17, chunk_idx)
        dens = sampler(rng, (n, n_symbols))
        sums = dens.sum(axis=1)
        moments.add(np.exp2(-np.maximum(0.0, sums - threshold)))
        done += n
        chunk_idx += 1
    return moments.mean_estimate(seed)


@dataclass(frozen=True)
class RatePoint:
    """Per-user second-order rates with the design that produced them."""

    r1: float
    r2: float
    tuple: ModulationTuple
    allocation: PowerAllocation
    user1_iv: tuple[McEstimate, McEstimate]
    user2_sub1_iv: tuple[McEstimate, McEstimate]
    user2_sub2_iv: tuple[McEstimate, McEstimate]


_ZERO = McEstimate(mean=0.0, variance=0.0, n_samples=0, std_error_mean=0.0, seed=0)


def rate_point(
    config: SystemConfig,
    tup: ModulationTuple,
    n_samples: int,
    seed: int,
    allocation: PowerAllocation | None = None,
) -> RatePoint:
    """Evaluate one design point (balanced power unless given an allocation)."""
    alloc = balanced_allocation(tup, config) if allocation is None else allocation
    spec = build_transmit_spec(tup, alloc, config)
    degenerate = (_ZERO, _ZERO)
    u1 = (
        mi_dispersion(spec, config.h1, "user1", n_samples, seed)
        if tup.m1 > 0
        else degenerate
    )
    u21 = (
        mi_dispersion(spec, config.h2, "user2_sub1", n_samples, seed)
        if tup.m21 > 0
        else degenerate
    )
    u22 = (
        mi_dispersion(spec, config.h2, "user2_sub2", n_samples, seed)
        if tup.m22 > 0 and config.n2 > config.n1
        else degenerate
    )
    r1 = rate_user1(u1[0].mean, u1[1].mean, config.n1, config.eps1)
    r2 = rate_user2(
        u21[0].mean,
        u21[1].mean,
        u22[0].mean,
        u22[1].mean,
        config.n1,
        config.n2,
        config.eps2,
    )
    return RatePoint(
        r1=r1,
        r2=r2,
        tuple=tup,
        allocation=alloc,
        user1_iv=u1,
        user2_sub1_iv=u21,
        user2_sub2_iv=u22,
    )
