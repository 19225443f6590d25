"""Regular QAM constellations with Gray bit labels and superposition mapping.

Constellations are stored with their points ordered by integer label value,
so ``points[label_as_int]`` is the symbol carrying that label.  Fresh
constellations are square QAM grids with unit spacing (minimum distance 1)
and zero mean; only even orders plus the degenerate order 0 are supported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = ["Constellation", "build_qam", "superimpose", "min_distance"]

MAX_ORDER = 16


def _gray_decode(g: np.ndarray) -> np.ndarray:
    """Inverse of the binary reflected Gray code (vectorized prefix XOR)."""
    x = g.copy()
    shift = 1
    while shift < 32:
        x ^= x >> shift
        shift <<= 1
    return x


def _axis_coordinates(bits: np.ndarray) -> np.ndarray:
    """Map per-axis label bits to unit-spacing, zero-mean PAM coordinates."""
    if bits.shape[1] == 0:
        return np.zeros(bits.shape[0])
    weights = 1 << np.arange(bits.shape[1] - 1, -1, -1)
    gray = bits @ weights
    pos = _gray_decode(gray.astype(np.int64))
    levels = 1 << bits.shape[1]
    return pos - (levels - 1) / 2.0


@dataclass(frozen=True)
class Constellation:
    """Labeled complex point set with geometric metadata."""

    points: np.ndarray  # complex128, ordered by integer label value
    labels: np.ndarray  # uint8, shape (len(points), m)
    m: int
    dmin: float
    mean: complex
    energy: float

    def __post_init__(self) -> None:
        self.points.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def scale(self, factor: float) -> "Constellation":
        """Return a copy with every point multiplied by ``factor`` (> 0)."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Constellation(
            points=self.points * factor,
            labels=self.labels,
            m=self.m,
            dmin=self.dmin * factor,
            mean=self.mean * factor,
            energy=self.energy * factor**2,
        )


def min_distance(points: np.ndarray) -> float:
    """Exact minimum pairwise Euclidean distance (+inf for fewer than 2 points)."""
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size < 2:
        return float("inf")
    xy = np.column_stack([pts.real, pts.imag])
    dists, _ = cKDTree(xy).query(xy, k=2)
    return float(dists[:, 1].min())


def _finalize(points: np.ndarray, labels: np.ndarray, m: int) -> Constellation:
    return Constellation(
        points=points,
        labels=labels,
        m=m,
        dmin=min_distance(points),
        mean=complex(points.mean()),
        energy=float(np.mean(np.abs(points) ** 2)),
    )


def build_qam(m: int) -> Constellation:
    """Zero-mean regular (square) QAM of order ``m`` with minimum distance 1.

    ``m = 0`` yields the single point 0 with the empty label.  Gray labeling
    is per-axis reflected Gray code with the first m/2 bits on the in-phase
    axis.
    """
    if m < 0 or m % 2 != 0:
        raise ValueError(f"modulation order must be 0 or even, got {m}")
    if m > MAX_ORDER:
        raise ValueError(f"modulation order must be at most {MAX_ORDER}, got {m}")
    size = 1 << m
    labels = ((np.arange(size)[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(
        np.uint8
    )
    half = m // 2
    coords_i = _axis_coordinates(labels[:, :half])
    coords_q = _axis_coordinates(labels[:, half:])
    points = coords_i + 1j * coords_q
    return _finalize(points, labels, m)


def _is_unit_spacing_qam(const: Constellation) -> bool:
    reference = build_qam(const.m)
    order = np.lexsort((const.points.imag, const.points.real))
    ref_order = np.lexsort((reference.points.imag, reference.points.real))
    return bool(
        np.allclose(
            const.points[order], reference.points[ref_order], rtol=0, atol=1e-9
        )
    )


def superimpose(inner: Constellation, outer: Constellation) -> Constellation:
    """Superpose two unit-spacing regular QAM layers into one regular QAM.

    Returns {a + sqrt(2^m_inner) * b : a in inner, b in outer} with
    concatenated labels (inner bits first).  The result is again a regular
    QAM of order ``inner.m + outer.m`` with unit minimum distance and zero
    mean.
    """
    for name, const in (("inner", inner), ("outer", outer)):
        if not _is_unit_spacing_qam(const):
            raise ValueError(f"{name} constellation is not a unit-spacing regular QAM")
    if inner.m + outer.m > MAX_ORDER:
        raise ValueError("combined order exceeds the supported maximum")
    lift = np.sqrt(float(1 << inner.m))
    points = (inner.points[:, None] + lift * outer.points[None, :]).ravel()
    labels = np.concatenate(
        [
            np.repeat(inner.labels, len(outer), axis=0),
            np.tile(outer.labels, (len(inner), 1)),
        ],
        axis=1,
    )
    return _finalize(points, labels, inner.m + outer.m)
