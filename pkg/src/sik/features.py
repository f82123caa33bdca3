"""Binary feature maps over a fitted sphere ensemble.

Two encodings of the same membership information:

* boundary features: one bit per partitioning, set when the point falls
  outside all spheres of that partitioning.  Stored bit-packed, 64 bits per
  word, partitioning index ascending (bit i of the vector lives at word
  i // 64, bit position i % 64).
* assignment features: one sphere index per partitioning (-1 when outside
  all spheres), semantically a concatenation of t one-hot blocks of width
  psi.  Stored as the index, not the dense block; :meth:`IkFeature.dense`
  expands it when the dense form is needed.

The two are consistent by construction: bit i is set exactly when
assignment i is -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ShapeError
from .partitioning import SphereEnsemble, assign_batch, as_embedding_matrix

__all__ = [
    "NO_SPHERE",
    "SikFeature",
    "IkFeature",
    "SikFeatureBatch",
    "IkFeatureBatch",
    "sik_map",
    "ik_map",
    "sik_map_batch",
    "ik_map_batch",
    "pack_bits",
    "unpack_bits",
    "sik_store_bits_per_point",
    "sik_store_bytes_per_point",
    "ik_store_bytes_per_point",
    "ik_dense_bits_per_point",
]

NO_SPHERE = -1
_WORD_BITS = 64


def _word_count(t: int) -> int:
    return (t + _WORD_BITS - 1) // _WORD_BITS


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack an (n, t) 0/1 matrix into (n, ceil(t/64)) uint64 words, LSB first."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    n, t = bits.shape
    packed = np.packbits(bits, axis=1, bitorder="little")
    words = np.zeros((n, _word_count(t) * 8), dtype=np.uint8)
    words[:, : packed.shape[1]] = packed
    return words.view(np.uint64)


def unpack_bits(words: np.ndarray, t: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns an (n, t) uint8 matrix."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    flat = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return flat[:, :t]


@dataclass(frozen=True)
class SikFeature:
    """Bit-packed boundary feature of one point: bit i = outside all spheres of partitioning i."""

    words: np.ndarray
    t: int

    def __post_init__(self) -> None:
        self.words.setflags(write=False)

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words[None, :], self.t)[0]

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())


@dataclass(frozen=True)
class IkFeature:
    """Per-partitioning sphere assignment of one point (-1 = outside all)."""

    assignments: np.ndarray
    psi: int

    def __post_init__(self) -> None:
        self.assignments.setflags(write=False)

    @property
    def t(self) -> int:
        return self.assignments.shape[0]

    def dense(self) -> np.ndarray:
        """Expand to the dense (t * psi,) 0/1 vector of one-hot blocks."""
        out = np.zeros(self.t * self.psi, dtype=np.uint8)
        inside = np.nonzero(self.assignments != NO_SPHERE)[0]
        out[inside * self.psi + self.assignments[inside]] = 1
        return out

    def outside_count(self) -> int:
        return int(np.count_nonzero(self.assignments == NO_SPHERE))


class SikFeatureBatch:
    """Sequence of :class:`SikFeature` backed by one packed (n, words) matrix."""

    def __init__(self, words: np.ndarray, t: int):
        if words.ndim != 2 or words.shape[1] != _word_count(t):
            raise ShapeError(f"packed matrix shape {words.shape} inconsistent with t={t}")
        words.setflags(write=False)
        self.words = words
        self.t = t

    def __len__(self) -> int:
        return self.words.shape[0]

    def __getitem__(self, i: int) -> SikFeature:
        return SikFeature(words=self.words[i], t=self.t)

    def __iter__(self) -> Iterator[SikFeature]:
        return (self[i] for i in range(len(self)))

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.t)

    def popcounts(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)


class IkFeatureBatch:
    """Sequence of :class:`IkFeature` backed by one (n, t) assignment matrix."""

    def __init__(self, assignments: np.ndarray, psi: int):
        if assignments.ndim != 2:
            raise ShapeError(f"expected (n, t) assignments, got shape {assignments.shape}")
        assignments.setflags(write=False)
        self.assignments = assignments
        self.psi = psi

    @property
    def t(self) -> int:
        return self.assignments.shape[1]

    def __len__(self) -> int:
        return self.assignments.shape[0]

    def __getitem__(self, i: int) -> IkFeature:
        return IkFeature(assignments=self.assignments[i], psi=self.psi)

    def __iter__(self) -> Iterator[IkFeature]:
        return (self[i] for i in range(len(self)))

    def outside_counts(self) -> np.ndarray:
        return np.count_nonzero(self.assignments == NO_SPHERE, axis=1).astype(np.int64)


def ik_map_batch(ensemble: SphereEnsemble, data, threads: int = 1) -> IkFeatureBatch:
    """Assignment features for every row of ``data`` (order preserved)."""
    return IkFeatureBatch(assign_batch(ensemble, data, threads=threads), psi=ensemble.psi)


def sik_map_batch(ensemble: SphereEnsemble, data, threads: int = 1) -> SikFeatureBatch:
    """Boundary features for every row of ``data`` (order preserved)."""
    assignments = assign_batch(ensemble, data, threads=threads)
    outside = (assignments == NO_SPHERE).astype(np.uint8)
    return SikFeatureBatch(pack_bits(outside), t=ensemble.t)


def ik_map(ensemble: SphereEnsemble, x) -> IkFeature:
    """Assignment feature of a single point."""
    return ik_map_batch(ensemble, _row(x, ensemble.d))[0]


def sik_map(ensemble: SphereEnsemble, x) -> SikFeature:
    """Boundary feature of a single point."""
    return sik_map_batch(ensemble, _row(x, ensemble.d))[0]


def _row(x, d: int) -> np.ndarray:
    p = np.asarray(x, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] != d:
        raise ShapeError(f"expected a point of dimensionality {d}, got shape {p.shape}")
    return as_embedding_matrix(p[None, :], expect_dim=d)


def sik_store_bits_per_point(t: int) -> int:
    """Bits needed to store one boundary feature: exactly t."""
    return t


def sik_store_bytes_per_point(t: int) -> int:
    """Bytes of the packed boundary encoding: ceil(t/8)."""
    return (t + 7) // 8


def ik_store_bytes_per_point(psi: int, t: int) -> int:
    """Bytes of the compact assignment encoding.

    One fixed-width unsigned slot per partitioning, wide enough for psi
    sphere indices plus the outside sentinel.
    """
    index_bits = max(1, int(psi + 1).bit_length())
    return t * ((index_bits + 7) // 8)


def ik_dense_bits_per_point(psi: int, t: int) -> int:
    """Bits of the dense one-hot-block equivalent: psi * t."""
    return psi * t
