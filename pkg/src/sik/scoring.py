"""Kernels and anomaly scores over the binary feature maps.

The boundary kernel between two points is the fraction of partitionings in
which both fall outside all spheres; the assignment kernel is the fraction
in which both fall inside the same sphere.  The anomaly score of a point is
its boundary kernel against the ideal anomaly, whose feature vector is all
ones, which reduces to popcount / t.  The assignment-side score
1 - |dense feature| / t counts exactly the same partitionings, so the two
scores are identical for every point; both are exposed so the identity is
directly testable.

The distributional baseline averages dense assignment features over a
training set (the kernel mean) and scores a point by its negated mean
similarity, keeping the higher-is-more-anomalous convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyReferenceError, ParameterError, ShapeError
from .features import (
    NO_SPHERE,
    IkFeature,
    IkFeatureBatch,
    SikFeature,
    SikFeatureBatch,
    unpack_bits,
)

__all__ = [
    "KernelMean",
    "sik_kernel",
    "ik_kernel",
    "sik_score",
    "sik_score_batch",
    "ik_score",
    "ik_score_batch",
    "idk_fit",
    "idk_score",
    "idk_score_batch",
    "gram_matrix",
]


def sik_kernel(fx: SikFeature, fy: SikFeature) -> float:
    """Boundary kernel: fraction of partitionings where both points are outside all spheres."""
    if fx.t != fy.t:
        raise ShapeError(f"feature lengths differ: {fx.t} vs {fy.t}")
    both = np.bitwise_and(fx.words, fy.words)
    return int(np.bitwise_count(both).sum()) / fx.t


def ik_kernel(fx: IkFeature, fy: IkFeature) -> float:
    """Assignment kernel: fraction of partitionings where both points share a sphere.

    Two outside assignments contribute nothing (both one-hot blocks are zero).
    """
    if fx.t != fy.t or fx.psi != fy.psi:
        raise ShapeError(
            f"feature shapes differ: t={fx.t},psi={fx.psi} vs t={fy.t},psi={fy.psi}"
        )
    a, b = fx.assignments, fy.assignments
    agree = np.count_nonzero((a == b) & (a != NO_SPHERE))
    return int(agree) / fx.t


def sik_score(f: SikFeature) -> float:
    """Anomaly score: similarity to the all-ones ideal anomaly, popcount / t, in [0, 1]."""
    return f.popcount() / f.t


def sik_score_batch(features: SikFeatureBatch | Sequence[SikFeature]) -> np.ndarray:
    batch = _as_sik_batch(features)
    return batch.popcounts() / batch.t


def ik_score(f: IkFeature, norm: str = "l1") -> float:
    """Anomaly score 1 - |dense feature| / t under the L0 or L1 norm.

    The dense feature is a concatenation of one-hot blocks, so both norms
    equal the count of inside assignments and the two choices coincide.
    """
    _check_norm(norm)
    return f.outside_count() / f.t


def ik_score_batch(features: IkFeatureBatch | Sequence[IkFeature], norm: str = "l1") -> np.ndarray:
    _check_norm(norm)
    batch = _as_ik_batch(features)
    return batch.outside_counts() / batch.t


def _check_norm(norm: str) -> None:
    if norm not in ("l0", "l1"):
        raise ParameterError(f"norm must be 'l0' or 'l1', got {norm!r}")


@dataclass(frozen=True)
class KernelMean:
    """Average dense assignment feature of a reference set, shape (t, psi)."""

    mean: np.ndarray

    def __post_init__(self) -> None:
        self.mean.setflags(write=False)

    @property
    def t(self) -> int:
        return self.mean.shape[0]

    @property
    def psi(self) -> int:
        return self.mean.shape[1]


def idk_fit(train_features: IkFeatureBatch | Sequence[IkFeature]) -> KernelMean:
    """Kernel mean of a training set: entrywise average of dense features.

    Computed from integer occupancy counts divided once by the set size, so
    the result equals the direct float summation exactly.

    Raises:
        EmptyReferenceError: the training set is empty.
    """
    batch = _as_ik_batch(train_features)
    m = len(batch)
    if m == 0:
        raise EmptyReferenceError("kernel mean requires a non-empty reference set")
    t, psi = batch.t, batch.psi
    counts = np.zeros((t, psi), dtype=np.int64)
    a = batch.assignments
    inside_rows, inside_parts = np.nonzero(a != NO_SPHERE)
    np.add.at(counts, (inside_parts, a[inside_rows, inside_parts]), 1)
    return KernelMean(mean=counts / m)


def idk_score(f: IkFeature, mean: KernelMean) -> float:
    """Distributional anomaly score: negated mean similarity, in [-1, 0].

    Similarity is (1/t) <dense(f), mean>; the sign is flipped so that higher
    means more anomalous, like the other scores.  A point sharing no sphere
    with the reference set scores 0, the maximum.
    """
    if f.t != mean.t or f.psi != mean.psi:
        raise ShapeError(
            f"feature shape t={f.t},psi={f.psi} does not match mean t={mean.t},psi={mean.psi}"
        )
    inside = np.nonzero(f.assignments != NO_SPHERE)[0]
    sim = float(mean.mean[inside, f.assignments[inside]].sum()) / f.t
    return -sim


def idk_score_batch(
    features: IkFeatureBatch | Sequence[IkFeature], mean: KernelMean
) -> np.ndarray:
    batch = _as_ik_batch(features)
    if batch.t != mean.t or batch.psi != mean.psi:
        raise ShapeError(
            f"feature shape t={batch.t},psi={batch.psi} does not match mean "
            f"t={mean.t},psi={mean.psi}"
        )
    a = batch.assignments
    gathered = np.where(a != NO_SPHERE, mean.mean[np.arange(batch.t)[None, :], a], 0.0)
    return -gathered.sum(axis=1) / batch.t


def gram_matrix(features) -> np.ndarray:
    """Symmetric matrix of pairwise kernel values.

    The kernel is chosen by feature type: boundary features use the boundary
    kernel, assignment features the assignment kernel.
    """
    if _is_sik(features):
        batch = _as_sik_batch(features)
        bits = unpack_bits(batch.words, batch.t).astype(np.float64)
        return (bits @ bits.T) / batch.t
    batch = _as_ik_batch(features)
    a = batch.assignments
    agree = (a[:, None, :] == a[None, :, :]) & (a != NO_SPHERE)[:, None, :]
    return agree.sum(axis=2) / batch.t


def _is_sik(features) -> bool:
    if isinstance(features, SikFeatureBatch):
        return True
    if isinstance(features, IkFeatureBatch):
        return False
    seq = list(features)
    if not seq:
        raise EmptyReferenceError("cannot infer kernel from an empty feature list")
    return isinstance(seq[0], SikFeature)


def _as_sik_batch(features) -> SikFeatureBatch:
    if isinstance(features, SikFeatureBatch):
        return features
    seq = list(features)
    if not seq:
        raise EmptyReferenceError("empty feature list")
    t = seq[0].t
    for f in seq:
        if f.t != t:
            raise ShapeError("features have inconsistent lengths")
    return SikFeatureBatch(np.stack([f.words for f in seq]), t=t)


def _as_ik_batch(features) -> IkFeatureBatch:
    if isinstance(features, IkFeatureBatch):
        return features
    seq = list(features)
    if not seq:
        raise EmptyReferenceError("empty feature list")
    t, psi = seq[0].t, seq[0].psi
    for f in seq:
        if f.t != t or f.psi != psi:
            raise ShapeError("features have inconsistent shapes")
    return IkFeatureBatch(np.stack([f.assignments for f in seq]), psi=psi)
