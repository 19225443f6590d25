"""CRC-aided polar coding: construction, encoding, and list decoding.

Codeword bits are produced in natural order (no bit reversal): the payload
is placed on the information set of u, frozen positions are zero, and the
binary polarization butterfly maps u to the codeword.  The list decoder
works in the LLR domain with the exact (approximation-free) path-metric
update and is vectorized across list paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "CRC11_POLY",
    "CodeSpec",
    "crc_attach",
    "crc_check",
    "crc_remainder",
    "polar_encode",
    "polar_transform",
    "scl_decode",
    "ga_reliability",
    "design_code",
]

# 5G CRC11: x^11 + x^10 + x^9 + x^5 + 1, most significant coefficient first.
CRC11_POLY = (1, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1)


# ---------------------------------------------------------------------------
# CRC
# ---------------------------------------------------------------------------


def _poly_mod(bits: np.ndarray, poly: tuple[int, ...]) -> np.ndarray:
    """Remainder of the bit polynomial modulo the generator (MSB first)."""
    degree = len(poly) - 1
    work = np.array(bits, dtype=np.uint8)
    if work.size < degree:
        out = np.zeros(degree, dtype=np.uint8)
        if work.size:
            out[-work.size :] = work
        return out
    gen = np.asarray(poly, dtype=np.uint8)
    for i in range(work.size - degree):
        if work[i]:
            work[i : i + degree + 1] ^= gen
    return work[-degree:]


def crc_remainder(bits: np.ndarray, poly: tuple[int, ...] = CRC11_POLY) -> np.ndarray:
    """CRC parity bits for a message (remainder of message * x^degree)."""
    degree = len(poly) - 1
    shifted = np.concatenate(
        [np.asarray(bits, dtype=np.uint8), np.zeros(degree, dtype=np.uint8)]
    )
    return _poly_mod(shifted, poly)


def crc_attach(bits: np.ndarray, poly: tuple[int, ...] = CRC11_POLY) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    return np.concatenate([bits, crc_remainder(bits, poly)])


@lru_cache(maxsize=None)
def _crc_parity_matrix(n_total: int, poly: tuple[int, ...]) -> np.ndarray:
    """Rows: x^(n_total-1-j) mod g; syndrome = bits @ matrix (mod 2)."""
    degree = len(poly) - 1
    tail = np.asarray(poly[1:], dtype=np.uint8)
    matrix = np.zeros((n_total, degree), dtype=np.uint8)
    power = np.zeros(degree, dtype=np.uint8)  # x^0
    power[-1] = 1
    for t in range(n_total):
        matrix[n_total - 1 - t] = power
        carry = power[0]
        power = np.roll(power, -1)
        power[-1] = 0
        if carry:
            power ^= tail
    return matrix


def crc_check(bits: np.ndarray, poly: tuple[int, ...] = CRC11_POLY) -> bool:
    """True iff the CRC-extended bit vector has zero remainder."""
    bits = np.asarray(bits, dtype=np.uint8)
    syndrome = bits @ _crc_parity_matrix(bits.size, poly)
    return not bool((syndrome % 2).any())


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _phi(x: np.ndarray) -> np.ndarray:
    """Mean-LLR attenuation used by Gaussian-approximation density evolution."""
    x = np.asarray(x, dtype=float)
    small = x < 10.0
    out = np.empty_like(x)
    xs = np.where(small, x, 1.0)
    out[small] = np.exp(0.0218 - 0.4527 * xs[small] ** 0.86)
    xl = np.where(small, 10.0, x)
    out[~small] = (
        np.sqrt(np.pi / xl[~small])
        * np.exp(-xl[~small] / 4.0)
        * (1.0 - 10.0 / (7.0 * xl[~small]))
    )
    return out


def _phi_inv(y: np.ndarray) -> np.ndarray:
    """Vectorized bisection inverse of _phi on (0, 1)."""
    y = np.asarray(y, dtype=float)
    lo = np.full_like(y, 1e-12)
    hi = np.full_like(y, 1e6)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        too_low = _phi(mid) > y  # phi decreases: value too large -> x too small
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
    return 0.5 * (lo + hi)


def ga_reliability(n: int, design_snr_db: float) -> np.ndarray:
    """Per-input-channel mean LLRs from density evolution at the design SNR.

    The design SNR is interpreted as the symbol SNR of a BPSK-over-complex-AWGN
    surrogate bit channel, giving an initial mean LLR of 4 * snr.
    """
    if n < 2 or n & (n - 1):
        raise ValueError("code length must be a power of two, at least 2")
    means = np.array([4.0 * 10.0 ** (design_snr_db / 10.0)])
    while means.size < n:
        checks = _phi_inv(1.0 - (1.0 - _phi(means)) ** 2)
        doubled = 2.0 * means
        means = np.empty(2 * means.size)
        means[0::2] = checks
        means[1::2] = doubled
    return means


@dataclass(frozen=True)
class CodeSpec:
    """A CRC-aided polar code: (n, k) plus CRC width, list size, frozen set."""

    n: int
    k: int
    crc_bits: int
    list_size: int
    frozen_set: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError("codeword length n must be a power of two")
        if self.crc_bits not in (0, 11):
            raise ValueError("crc_bits must be 11 (or 0 to disable the CRC)")
        if self.k < 1 or self.k + self.crc_bits > self.n:
            raise ValueError("k + crc_bits must fit inside n")
        if self.list_size < 1:
            raise ValueError("list size must be at least 1")
        frozen = tuple(sorted(self.frozen_set))
        if frozen != self.frozen_set:
            raise ValueError("frozen_set must be sorted")
        if len(frozen) != self.n - self.k - self.crc_bits:
            raise ValueError("frozen_set size must equal n - (k + crc_bits)")
        if frozen and (frozen[0] < 0 or frozen[-1] >= self.n):
            raise ValueError("frozen_set indices out of range")
        if len(set(frozen)) != len(frozen):
            raise ValueError("frozen_set contains duplicates")

    @property
    def payload_size(self) -> int:
        return self.k + self.crc_bits

    @property
    def info_set(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.frozen_set)] = False
        return np.flatnonzero(mask)


def design_code(
    n: int,
    k: int,
    list_size: int,
    design_snr_db: float,
    crc_bits: int = 11,
) -> CodeSpec:
    """Construct a CodeSpec with the GA-based frozen set at the design SNR."""
    payload = k + crc_bits
    if payload > n:
        raise ValueError("k + crc_bits must fit inside n")
    means = ga_reliability(n, design_snr_db)
    order = np.argsort(means, kind="stable")
    frozen = tuple(sorted(int(i) for i in order[: n - payload]))
    return CodeSpec(n=n, k=k, crc_bits=crc_bits, list_size=list_size, frozen_set=frozen)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply the binary polarization butterfly along the last axis."""
    x = np.array(u, dtype=np.uint8)
    n = x.shape[-1]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    step = 1
    while step < n:
        blocks = x.reshape(*x.shape[:-1], -1, 2 * step)
        blocks[..., :step] ^= blocks[..., step:]
        step *= 2
    return x


def polar_encode(spec: CodeSpec, payload: np.ndarray) -> np.ndarray:
    """Encode k + crc_bits payload bits into an n-bit codeword."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.size != spec.payload_size:
        raise ValueError(
            f"payload must have {spec.payload_size} bits, got {payload.size}"
        )
    u = np.zeros(spec.n, dtype=np.uint8)
    u[spec.info_set] = payload
    return polar_transform(u)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


def _boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact LLR check-node combination, numerically stable."""
    sign = np.copysign(1.0, a) * np.copysign(1.0, b)
    mag = np.minimum(np.abs(a), np.abs(b))
    return (sign * mag + np.log1p(np.exp(-np.abs(a + b)))) - np.log1p(
        np.exp(-np.abs(a - b))
    )


class _ListDecoder:
    """Successive-cancellation list decoding, vectorized across paths.

    Stage-s LLR/bit buffers for all paths live in flat arrays (stage s at
    offset 2^s - 1); forking a path gathers whole rows, which keeps the hot
    loop in a handful of numpy operations per tree node.
    """

    def __init__(self, spec: CodeSpec, llrs: np.ndarray, list_size: int) -> None:
        self.n = spec.n
        self.stages = int(math.log2(spec.n))
        self.limit = list_size
        self.chan = llrs.astype(np.float64)
        self.frozen_mask = np.zeros(spec.n, dtype=bool)
        self.frozen_mask[list(spec.frozen_set)] = True
        size = spec.n - 1
        self.alpha = np.zeros((list_size, size))
        self.beta = np.zeros((list_size, size), dtype=np.uint8)
        self.beta_left = np.zeros((list_size, size), dtype=np.uint8)
        self.decisions = np.zeros((list_size, spec.n), dtype=np.uint8)
        self.pm = np.zeros(list_size)
        self.active = 1
        self.pos = 0

    def _slice(self, s: int) -> slice:
        off = (1 << s) - 1
        return slice(off, off + (1 << s))

    def run(self) -> tuple[np.ndarray, np.ndarray]:
        self._visit(self.stages)
        order = np.argsort(self.pm[: self.active], kind="stable")
        return self.decisions[: self.active][order], self.pm[: self.active][order]

    def _visit(self, s: int) -> None:
        if s == 0:
            self._leaf()
            return
        half = 1 << (s - 1)
        child = self._slice(s - 1)
        a = self._alpha_in(s)
        self.alpha[: self.active, child] = _boxplus(a[:, :half], a[:, half:])
        self._visit(s - 1)
        self.beta_left[: self.active, child] = self.beta[: self.active, child]
        a = self._alpha_in(s)  # re-read: rows may have been forked below
        left_bits = self.beta_left[: self.active, child].astype(np.float64)
        self.alpha[: self.active, child] = a[:, half:] + (1.0 - 2.0 * left_bits) * a[
            :, :half
        ]
        self._visit(s - 1)
        if s < self.stages:
            parent = self._slice(s)
            left = self.beta_left[: self.active, child] ^ self.beta[: self.active, child]
            self.beta[: self.active, parent.start : parent.start + half] = left
            self.beta[: self.active, parent.start + half : parent.stop] = self.beta[
                : self.active, child
            ]

    def _alpha_in(self, s: int) -> np.ndarray:
        if s == self.stages:
            return self.chan[None, :]
        return self.alpha[: self.active, self._slice(s)]

    def _leaf(self) -> None:
        i = self.pos
        act = self.active
        llr = self.alpha[:act, 0]
        if self.frozen_mask[i]:
            self.pm[:act] += np.logaddexp(0.0, -llr)
            self.decisions[:act, i] = 0
            self.beta[:act, 0] = 0
        else:
            pm0 = self.pm[:act] + np.logaddexp(0.0, -llr)
            pm1 = self.pm[:act] + np.logaddexp(0.0, llr)
            cand = np.concatenate([pm0, pm1])
            if 2 * act <= self.limit:
                sel = np.arange(2 * act)
            else:
                sel = np.argpartition(cand, self.limit - 1)[: self.limit]
            parent = sel % act
            bits = (sel // act).astype(np.uint8)
            new_act = sel.size
            self.alpha[:new_act] = self.alpha[parent]
            self.beta[:new_act] = self.beta[parent]
            self.beta_left[:new_act] = self.beta_left[parent]
            self.decisions[:new_act] = self.decisions[parent]
            self.pm[:new_act] = cand[sel]
            self.decisions[:new_act, i] = bits
            self.beta[:new_act, 0] = bits
            self.active = new_act
        self.pos += 1


def scl_decode(
    spec: CodeSpec,
    llrs: np.ndarray,
    list_size: int | None = None,
) -> tuple[np.ndarray, bool]:
    """Decode channel LLRs (positive favors bit 0) to the k + crc payload.

    Returns the payload of the most likely CRC-passing path, or of the most
    likely path overall when no candidate passes, together with the CRC
    verdict.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.size != spec.n:
        raise ValueError(f"expected {spec.n} LLRs, got {llrs.size}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    width = spec.list_size if list_size is None else list_size
    decisions, _ = _ListDecoder(spec, llrs, width).run()
    payloads = decisions[:, spec.info_set]
    if spec.crc_bits == 0:
        return payloads[0], True
    parity = _crc_parity_matrix(spec.payload_size, CRC11_POLY)
    syndromes = (payloads.astype(np.int64) @ parity) % 2
    passing = np.flatnonzero(~syndromes.any(axis=1))
    if passing.size:
        return payloads[passing[0]], True
    return payloads[0], False
