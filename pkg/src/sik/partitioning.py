"""Adaptive hypersphere partitionings over embedding matrices.

A partitioning isolates each of ``psi`` points sampled uniformly without
replacement from the data: every sampled point becomes the center of a
hypersphere whose radius is the Euclidean distance to its nearest neighbor
among the other sampled points.  Dense regions therefore get small spheres
and sparse regions large ones, so the union of spheres traces an adaptive
boundary around the data.  An ensemble stacks ``t`` independently sampled
partitionings for stability.

Membership convention: a point exactly on a sphere's surface counts as
inside, and a point inside several spheres belongs to the one whose center
is closest (lowest index on exact distance ties).  Zero-radius spheres
(possible when the sample contains duplicate rows) contain only exact
duplicates of their center.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import HyperparameterError, InternalInvariantError, ParameterError, ShapeError

__all__ = [
    "Partitioning",
    "SphereEnsemble",
    "as_embedding_matrix",
    "sample_subset",
    "build_partitioning",
    "fit_ensemble",
    "locate",
    "assign_batch",
]

MAX_SEED = 2**64 - 1

# Row-chunk sizes for the batched assignment pipeline.  Fixed constants so
# that results never depend on thread count or available memory.
_POINT_CHUNK = 1024
_CENTER_CHUNK = 6400

# Slack factor for the rounding-error bound of the matmul-based squared
# distances (see _assign_dense).  Deliberately generous; flagged entries are
# recomputed exactly, so a large margin costs time, never correctness.
_REPAIR_SLACK = 64.0


def as_embedding_matrix(data, expect_dim: int | None = None) -> np.ndarray:
    """Validate and return ``data`` as an (n, d) float64 matrix.

    Args:
        data: Array-like of shape (n, d); rows are points.
        expect_dim: If given, require d to equal this value.

    Raises:
        ShapeError: Not 2-D, empty, or d mismatches ``expect_dim``.
        ParameterError: Contains NaN or infinite entries.
    """
    x = np.ascontiguousarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix of points, got shape {x.shape}")
    n, d = x.shape
    if n < 1 or d < 1:
        raise ShapeError(f"matrix must be at least 1x1, got shape {x.shape}")
    if expect_dim is not None and d != expect_dim:
        raise ShapeError(f"expected dimensionality {expect_dim}, got {d}")
    if not np.isfinite(x).all():
        raise ParameterError("matrix contains NaN or infinite entries")
    return x


def _as_point(x, expect_dim: int) -> np.ndarray:
    p = np.asarray(x, dtype=np.float64)
    if p.ndim != 1 or p.shape[0] != expect_dim:
        raise ShapeError(f"expected a point of dimensionality {expect_dim}, got shape {p.shape}")
    if not np.isfinite(p).all():
        raise ParameterError("point contains NaN or infinite entries")
    return p


@dataclass(frozen=True)
class Partitioning:
    """One division of the space by psi hyperspheres plus the exterior.

    Attributes:
        centers: (psi, d) float64 sphere centers (sampled data rows).
        radii: (psi,) float64; radii[j] is the distance from center j to its
            nearest neighbor among the other centers.
    """

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self) -> None:
        if self.centers.ndim != 2:
            raise ShapeError(f"centers must be (psi, d), got shape {self.centers.shape}")
        if self.radii.shape != (self.centers.shape[0],):
            raise ShapeError(
                f"radii shape {self.radii.shape} does not match {self.centers.shape[0]} centers"
            )
        self.centers.setflags(write=False)
        self.radii.setflags(write=False)

    @property
    def psi(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class SphereEnsemble:
    """t hypersphere partitionings with shared psi and dimensionality.

    Stored as stacked arrays; :meth:`partitioning` returns lightweight views.
    Instances are immutable and safe to share across threads.

    Attributes:
        centers: (t, psi, d) float64.
        radii: (t, psi) float64.
        seed: RNG seed the ensemble was fitted with.
    """

    centers: np.ndarray
    radii: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if self.centers.ndim != 3:
            raise ShapeError(f"centers must be (t, psi, d), got shape {self.centers.shape}")
        if self.radii.shape != self.centers.shape[:2]:
            raise ShapeError(
                f"radii shape {self.radii.shape} does not match centers {self.centers.shape}"
            )
        self.centers.setflags(write=False)
        self.radii.setflags(write=False)

    @property
    def t(self) -> int:
        return self.centers.shape[0]

    @property
    def psi(self) -> int:
        return self.centers.shape[1]

    @property
    def d(self) -> int:
        return self.centers.shape[2]

    def partitioning(self, i: int) -> Partitioning:
        return Partitioning(self.centers[i], self.radii[i])

    @property
    def partitionings(self) -> tuple[Partitioning, ...]:
        return tuple(self.partitioning(i) for i in range(self.t))

    @classmethod
    def from_partitionings(cls, parts, seed: int = 0) -> "SphereEnsemble":
        """Assemble an ensemble from explicit partitionings (mainly for tests)."""
        parts = list(parts)
        if not parts:
            raise ParameterError("at least one partitioning is required")
        psi, d = parts[0].centers.shape
        for p in parts:
            if p.centers.shape != (psi, d):
                raise ShapeError("all partitionings must share psi and dimensionality")
        centers = np.stack([p.centers for p in parts]).astype(np.float64)
        radii = np.stack([p.radii for p in parts]).astype(np.float64)
        return cls(centers=centers, radii=radii, seed=seed)


def sample_subset(data, psi: int, rng: np.random.Generator) -> np.ndarray:
    """Sample psi distinct row indices uniformly without replacement.

    Implemented as a seeded Fisher-Yates permutation truncated to psi, so the
    cost is linear in n and every index has marginal probability psi/n.

    Raises:
        HyperparameterError: psi < 2 (a nearest neighbor must exist) or
            psi > n (cannot sample without replacement).
    """
    data = as_embedding_matrix(data)
    n = data.shape[0]
    if psi < 2:
        raise HyperparameterError(f"psi must be >= 2, got {psi}")
    if psi > n:
        raise HyperparameterError(f"psi must be <= n ({n} points available), got {psi}")
    return rng.permutation(n)[:psi]


def build_partitioning(data, indices) -> Partitioning:
    """Build one partitioning from the selected rows of ``data``.

    Each selected row becomes a sphere center; its radius is the minimum
    Euclidean distance to the other selected rows (0 when the sample contains
    an exact duplicate of the center).

    Raises:
        InternalInvariantError: ``indices`` contains duplicates.
        HyperparameterError: fewer than 2 indices.
    """
    data = as_embedding_matrix(data)
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1 or idx.shape[0] < 2:
        raise HyperparameterError(f"need at least 2 indices, got {idx.shape}")
    if np.unique(idx).shape[0] != idx.shape[0]:
        raise InternalInvariantError("duplicate indices in partitioning sample")
    centers = np.ascontiguousarray(data[idx])
    return Partitioning(centers=centers, radii=_nn_radii(centers))


def _nn_radii(centers: np.ndarray) -> np.ndarray:
    dist = cdist(centers, centers)
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def _subseed(seed: int, i: int) -> np.random.SeedSequence:
    # Fixed mixing: partitioning i of a fit with seed s draws from
    # SeedSequence(s, spawn_key=(0, i)).  Key prefix 0 reserves other
    # prefixes for unrelated streams (splits, injection, benches).
    return np.random.SeedSequence(entropy=seed, spawn_key=(0, i))


def fit_ensemble(data, psi: int, t: int, seed: int, threads: int = 1) -> SphereEnsemble:
    """Fit t hypersphere partitionings, each from an independent subsample.

    A pure function of (data, psi, t, seed): partitioning i uses its own RNG
    stream derived from (seed, i), so results are identical regardless of
    execution order or thread count.

    Args:
        data: (n, d) matrix of training points.
        psi: spheres per partitioning, 2 <= psi <= n.
        t: number of partitionings, >= 1.
        seed: RNG seed in [0, 2**64 - 1].
        threads: worker threads across partitionings; 0 means one per CPU.

    Raises:
        HyperparameterError: any bound above is violated.
    """
    data = as_embedding_matrix(data)
    n, d = data.shape
    if t < 1:
        raise HyperparameterError(f"t must be >= 1, got {t}")
    if not 0 <= seed <= MAX_SEED:
        raise HyperparameterError(f"seed must be in [0, {MAX_SEED}], got {seed}")
    if psi < 2:
        raise HyperparameterError(f"psi must be >= 2, got {psi}")
    if psi > n:
        raise HyperparameterError(f"psi must be <= n ({n} points available), got {psi}")

    centers = np.empty((t, psi, d), dtype=np.float64)
    radii = np.empty((t, psi), dtype=np.float64)

    def fit_one(i: int) -> None:
        # Same draws and arithmetic as sample_subset + build_partitioning,
        # without revalidating the (already validated) matrix per call.
        rng = np.random.default_rng(_subseed(seed, i))
        idx = rng.permutation(n)[:psi]
        centers[i] = data[idx]
        radii[i] = _nn_radii(centers[i])

    workers = _resolve_threads(threads)
    if workers > 1 and t > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fit_one, range(t)))
    else:
        for i in range(t):
            fit_one(i)
    return SphereEnsemble(centers=centers, radii=radii, seed=seed)


def locate(partitioning: Partitioning, x) -> int | None:
    """Resolve which sphere of a partitioning contains point ``x``.

    Returns the index of the containing sphere with the closest center
    (lowest index on exact ties), or None when x is outside all spheres.
    A distance exactly equal to the radius counts as inside.
    """
    p = _as_point(x, partitioning.d)
    dist = cdist(p[None, :], partitioning.centers)[0]
    inside = dist <= partitioning.radii
    if not inside.any():
        return None
    return int(np.argmin(np.where(inside, dist, np.inf)))


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ParameterError(f"threads must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def assign_batch(ensemble: SphereEnsemble, data, threads: int = 1) -> np.ndarray:
    """Containing-sphere index per (point, partitioning); -1 means outside all.

    Vectorized equivalent of calling :func:`locate` on every partitioning for
    every row.  Squared distances are computed with a BLAS matmul for speed;
    any entry whose inside/outside decision could be affected by matmul
    rounding (relative gap below the error bound) is recomputed with the
    exact sequential formula, so decisions match the plain-cdist reference.

    Returns:
        (n, t) int32 array of sphere indices, -1 encoding "outside".
    """
    x = as_embedding_matrix(data, expect_dim=ensemble.d)
    n = x.shape[0]
    t, psi = ensemble.t, ensemble.psi
    flat_centers = np.ascontiguousarray(ensemble.centers.reshape(t * psi, ensemble.d))
    flat_radii = ensemble.radii.reshape(t * psi)
    csq = np.einsum("ij,ij->i", flat_centers, flat_centers)
    max_cnorm = float(np.sqrt(csq.max(initial=0.0)))

    out = np.empty((n, t), dtype=np.int32)
    chunks = range(0, n, _POINT_CHUNK)

    def run_chunk(start: int) -> None:
        stop = min(start + _POINT_CHUNK, n)
        out[start:stop] = _assign_dense(
            x[start:stop], flat_centers, csq, max_cnorm, flat_radii, t, psi
        )

    workers = _resolve_threads(threads)
    if workers > 1 and n > _POINT_CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, chunks))
    else:
        for start in chunks:
            run_chunk(start)
    return out


def _assign_dense(
    x: np.ndarray,
    flat_centers: np.ndarray,
    csq: np.ndarray,
    max_cnorm: float,
    flat_radii: np.ndarray,
    t: int,
    psi: int,
) -> np.ndarray:
    nc, d = x.shape
    total = flat_centers.shape[0]
    xsq = np.einsum("ij,ij->i", x, x)
    # Error bound for S = |x|^2 + |c|^2 - 2<x,c> in float64: each term is off
    # by at most ~d*eps times its magnitude, so K*d*eps*(|x|+|c|)^2 bounds the
    # total with a wide safety factor K.
    eps = np.finfo(np.float64).eps
    margin = _REPAIR_SLACK * d * eps * (np.sqrt(xsq) + max_cnorm) ** 2
    rsq = flat_radii * flat_radii

    sq = np.empty((nc, total), dtype=np.float64)
    for j0 in range(0, total, _CENTER_CHUNK):
        j1 = min(j0 + _CENTER_CHUNK, total)
        block = sq[:, j0:j1]
        np.matmul(x, flat_centers[j0:j1].T, out=block)
        block *= -2.0
        block += xsq[:, None]
        block += csq[None, j0:j1]
        np.maximum(block, 0.0, out=block)
        _repair_borderline(block, x, flat_centers[j0:j1], rsq[j0:j1], margin)

    dist = np.sqrt(sq, out=sq)
    dist = dist.reshape(nc, t, psi)
    inside = dist <= flat_radii.reshape(t, psi)
    masked = np.where(inside, dist, np.inf)
    assignments = masked.argmin(axis=2).astype(np.int32)
    assignments[~inside.any(axis=2)] = -1
    return assignments


def _repair_borderline(
    sq: np.ndarray,
    x: np.ndarray,
    centers: np.ndarray,
    rsq: np.ndarray,
    margin: np.ndarray,
) -> None:
    """Recompute entries of ``sq`` whose boundary decision is within rounding.

    Flags entries whose matmul-based squared distance is within the error
    margin of the squared radius (or of zero, which covers duplicates and
    points equal to a center) and replaces them with the exact sequential
    sum of squares, in place.
    """
    col = margin[:, None]
    flagged = np.abs(sq - rsq[None, :]) <= col
    flagged |= sq <= col
    count = int(np.count_nonzero(flagged))
    if count == 0:
        return
    if count > 0.05 * sq.size:
        # Pathological inputs (e.g. mostly duplicate rows): exact everywhere.
        sq[:] = cdist(x, centers, "sqeuclidean")
        return
    rows = np.nonzero(flagged.any(axis=1))[0]
    for i in rows:
        js = np.nonzero(flagged[i])[0]
        sq[i, js] = cdist(x[i : i + 1], centers[js], "sqeuclidean")[0]
