"""Evaluation harness: AUROC, synthetic data, detector runs, sweeps, benchmarks.

The experimental protocol mirrors semi-supervised anomaly detection on
embedding matrices: a fraction of the normal points forms the training
split, the remaining normals plus all anomalies form the test split, the
detector is fitted on the training split only and evaluated by AUROC on the
test split.  Contamination sweeps move a controlled fraction of anomalies
into the training split before fitting.

Feature-store sizes in reports are analytic, derived from the feature
encodings, because the structural ratio between the boundary and assignment
representations is the claim worth checking; process memory is platform
noise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import ParameterError, ShapeError, UndefinedMetricError
from .features import (
    ik_map_batch,
    ik_store_bytes_per_point,
    sik_map_batch,
    sik_store_bytes_per_point,
)
from .partitioning import as_embedding_matrix, fit_ensemble
from .scoring import idk_fit, idk_score_batch, ik_score_batch, sik_score_batch

__all__ = [
    "METHODS",
    "LabeledDataset",
    "ExperimentReport",
    "BenchRow",
    "auroc",
    "gen_blobs_with_outliers",
    "detection_split",
    "run_detector",
    "contamination_sweep",
    "sensitivity_sweep",
    "bench_scaling",
    "DEFAULT_SEEDS",
    "DEFAULT_PSI_GRID",
    "DEFAULT_T",
]

METHODS = ("sik", "ik", "idk")

# Default repetition seeds and hyperparameter grid for sweeps.
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DEFAULT_PSI_GRID = (32, 64, 128, 256, 512)
DEFAULT_T = 200
DEFAULT_TRAIN_FRACTION = 0.7


def auroc(scores, labels) -> float:
    """Area under the ROC curve with average ranks on tied scores.

    Equivalent to the normalized Mann-Whitney U statistic: the probability
    that a uniformly random anomaly outscores a uniformly random normal
    point, counting ties as half.

    Raises:
        UndefinedMetricError: labels contain only one class.
        ShapeError: score/label lengths differ.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or y.shape != s.shape:
        raise ShapeError(f"scores shape {s.shape} and labels shape {y.shape} must match (1-D)")
    if not np.isfinite(s).all():
        raise ParameterError("scores contain NaN or infinite entries")
    if not np.isin(y, (0, 1)).all():
        raise ParameterError("labels must be 0 or 1")
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(s.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC requires both an anomaly and a normal example")
    ranks = rankdata(s, method="average")
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class LabeledDataset:
    """Embedding matrix with binary labels (1 = anomaly) and an optional fixed split."""

    values: np.ndarray
    labels: np.ndarray
    train_indices: np.ndarray | None = None
    test_indices: np.ndarray | None = None

    def __post_init__(self) -> None:
        x = as_embedding_matrix(self.values)
        y = np.asarray(self.labels)
        if y.shape != (x.shape[0],):
            raise ShapeError(f"labels shape {y.shape} does not match n={x.shape[0]}")
        if not np.isin(y, (0, 1)).all():
            raise ParameterError("labels must be 0 or 1")
        object.__setattr__(self, "values", x)
        object.__setattr__(self, "labels", y.astype(np.uint8))
        self.values.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def gen_blobs_with_outliers(
    n_normal: int, n_anomaly: int, d: int, separation: float, seed: int
) -> LabeledDataset:
    """Synthetic dataset: a Gaussian cluster plus a far shell of anomalies.

    Normals are drawn from a unit-variance Gaussian at the origin; anomalies
    are placed uniformly in the spherical shell between separation*sqrt(d)
    and twice that distance, so a separation of a few units guarantees the
    anomalies lie beyond every normal point.  Normal rows come first.
    """
    if n_normal < 1 or n_anomaly < 1:
        raise ParameterError(
            f"n_normal and n_anomaly must be >= 1, got {n_normal} and {n_anomaly}"
        )
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if not separation > 0:
        raise ParameterError(f"separation must be > 0, got {separation}")
    rng = np.random.default_rng(seed)
    normals = rng.standard_normal((n_normal, d))
    dirs = rng.standard_normal((n_anomaly, d))
    norms = np.linalg.norm(dirs, axis=1)
    while (norms < 1e-12).any():  # pragma: no cover - essentially impossible draw
        bad = norms < 1e-12
        dirs[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(dirs, axis=1)
    inner = separation * np.sqrt(d)
    shell = rng.uniform(inner, 2.0 * inner, n_anomaly)
    anomalies = dirs * (shell / norms)[:, None]
    values = np.vstack([normals, anomalies])
    labels = np.concatenate([np.zeros(n_normal, dtype=np.uint8), np.ones(n_anomaly, dtype=np.uint8)])
    return LabeledDataset(values=values, labels=labels)


def detection_split(
    dataset: LabeledDataset,
    seed: int,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> tuple[np.ndarray, np.ndarray]:
    """Split for semi-supervised detection: normals-only train, rest test.

    Returns the dataset's fixed split when present.  Otherwise shuffles the
    normal points with a stream derived from (seed, split) and assigns
    ``train_fraction`` of them to the training split; the remaining normals
    and all anomalies form the test split.
    """
    if dataset.train_indices is not None and dataset.test_indices is not None:
        return np.asarray(dataset.train_indices), np.asarray(dataset.test_indices)
    if not 0 < train_fraction < 1:
        raise ParameterError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    normal_idx = np.nonzero(dataset.labels == 0)[0]
    anomaly_idx = np.nonzero(dataset.labels == 1)[0]
    if normal_idx.size == 0:
        raise ParameterError("dataset has no normal points to train on")
    order = rng.permutation(normal_idx.size)
    n_train = int(np.floor(train_fraction * normal_idx.size))
    if n_train == 0 or n_train == normal_idx.size:
        raise ParameterError(
            f"train fraction {train_fraction} leaves an empty split for "
            f"{normal_idx.size} normal points"
        )
    train = np.sort(normal_idx[order[:n_train]])
    test = np.sort(np.concatenate([normal_idx[order[n_train:]], anomaly_idx]))
    return train, test


@dataclass(frozen=True)
class ExperimentReport:
    """One detector evaluation: configuration, AUROC, timings, feature-store size."""

    method: str
    psi: int
    t: int
    seed: int
    auroc: float
    fit_seconds: float
    score_seconds: float
    feature_bytes: int
    ratio: float | None = field(default=None)


def _score_split(method, train_x, test_x, psi, t, seed, threads):
    """Fit on train_x, score test_x; returns (scores, fit_s, score_s, feature_bytes)."""
    n_train, n_test = train_x.shape[0], test_x.shape[0]
    if method == "sik":
        t0 = time.perf_counter()
        ens = fit_ensemble(train_x, psi, t, seed, threads=threads)
        t1 = time.perf_counter()
        scores = sik_score_batch(sik_map_batch(ens, test_x, threads=threads))
        t2 = time.perf_counter()
        bytes_ = n_test * sik_store_bytes_per_point(t)
    elif method == "ik":
        t0 = time.perf_counter()
        ens = fit_ensemble(train_x, psi, t, seed, threads=threads)
        t1 = time.perf_counter()
        scores = ik_score_batch(ik_map_batch(ens, test_x, threads=threads))
        t2 = time.perf_counter()
        bytes_ = n_test * ik_store_bytes_per_point(psi, t)
    elif method == "idk":
        # Fitting the distributional baseline includes mapping the whole
        # training split to build the kernel mean.
        t0 = time.perf_counter()
        ens = fit_ensemble(train_x, psi, t, seed, threads=threads)
        mean = idk_fit(ik_map_batch(ens, train_x, threads=threads))
        t1 = time.perf_counter()
        scores = idk_score_batch(ik_map_batch(ens, test_x, threads=threads), mean)
        t2 = time.perf_counter()
        per_point = ik_store_bytes_per_point(psi, t)
        mean_bytes = 8 * t * psi
        bytes_ = max(n_train, n_test) * per_point + mean_bytes
    else:
        raise ParameterError(f"method must be one of {METHODS}, got {method!r}")
    return scores, t1 - t0, t2 - t1, bytes_


def run_detector(
    dataset: LabeledDataset,
    method: str,
    psi: int,
    t: int,
    seed: int,
    threads: int = 1,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> ExperimentReport:
    """Fit on the training split, score the test split, report AUROC and costs."""
    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got {method!r}")
    train_idx, test_idx = detection_split(dataset, seed, train_fraction)
    return _run_on_split(dataset, train_idx, test_idx, method, psi, t, seed, threads)


def _run_on_split(dataset, train_idx, test_idx, method, psi, t, seed, threads, ratio=None):
    train_x = dataset.values[train_idx]
    test_x = dataset.values[test_idx]
    scores, fit_s, score_s, bytes_ = _score_split(method, train_x, test_x, psi, t, seed, threads)
    value = auroc(scores, dataset.labels[test_idx])
    return ExperimentReport(
        method=method,
        psi=psi,
        t=t,
        seed=seed,
        auroc=value,
        fit_seconds=fit_s,
        score_seconds=score_s,
        feature_bytes=bytes_,
        ratio=ratio,
    )


def _mean_report(reports: list[ExperimentReport], ratio=None) -> ExperimentReport:
    """Average AUROC/timings over per-seed reports; seed field keeps the first seed."""
    first = reports[0]
    return ExperimentReport(
        method=first.method,
        psi=first.psi,
        t=first.t,
        seed=first.seed,
        auroc=float(np.mean([r.auroc for r in reports])),
        fit_seconds=float(np.mean([r.fit_seconds for r in reports])),
        score_seconds=float(np.mean([r.score_seconds for r in reports])),
        feature_bytes=first.feature_bytes,
        ratio=ratio,
    )


def contamination_sweep(
    dataset: LabeledDataset,
    ratios,
    method: str,
    psi: int,
    t: int,
    seeds=DEFAULT_SEEDS,
    threads: int = 1,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> list[ExperimentReport]:
    """Evaluate with a controlled anomaly fraction injected into training.

    For each ratio r, enough anomalies are moved from the test split into the
    training split that they make up fraction r of it; the remaining
    anomalies stay in the test split.  Ratio 0 reproduces the clean run
    exactly.  One averaged report per ratio, in input order.

    Raises:
        ParameterError: a ratio is outside [0, 0.5), or the anomaly pool is
            too small to reach a ratio while keeping at least one test anomaly.
    """
    ratios = [float(r) for r in ratios]
    seeds = list(seeds)
    if not ratios:
        raise ParameterError("at least one contamination ratio is required")
    if not seeds:
        raise ParameterError("at least one seed is required")
    for r in ratios:
        if not 0.0 <= r < 0.5:
            raise ParameterError(f"contamination ratio must be in [0, 0.5), got {r}")
    out = []
    for r in ratios:
        per_seed = []
        for seed in seeds:
            train_idx, test_idx = detection_split(dataset, seed, train_fraction)
            train_idx, test_idx = _inject_anomalies(dataset, train_idx, test_idx, r, seed)
            per_seed.append(
                _run_on_split(dataset, train_idx, test_idx, method, psi, t, seed, threads, ratio=r)
            )
        out.append(_mean_report(per_seed, ratio=r))
    return out


def _inject_anomalies(dataset, train_idx, test_idx, ratio, seed):
    if ratio == 0.0:
        return train_idx, test_idx
    pool = test_idx[dataset.labels[test_idx] == 1]
    n_train = train_idx.size
    # k anomalies so that k / (n_train + k) = ratio.
    k = int(round(ratio * n_train / (1.0 - ratio)))
    if k < 1:
        return train_idx, test_idx
    if k >= pool.size:
        raise ParameterError(
            f"contamination ratio {ratio} needs {k} anomalies but only {pool.size} are "
            "available (at least one must remain in the test split)"
        )
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2,)))
    chosen = pool[np.sort(rng.permutation(pool.size)[:k])]
    new_train = np.sort(np.concatenate([train_idx, chosen]))
    new_test = np.setdiff1d(test_idx, chosen)
    return new_train, new_test


def sensitivity_sweep(
    dataset: LabeledDataset,
    psi_grid,
    t_grid,
    fixed_psi: int,
    fixed_t: int,
    seeds=DEFAULT_SEEDS,
    method: str = "sik",
    threads: int = 1,
) -> list[ExperimentReport]:
    """One averaged report per grid point: psi values at fixed t, then t values at fixed psi."""
    psi_grid = [int(p) for p in psi_grid]
    t_grid = [int(v) for v in t_grid]
    seeds = list(seeds)
    if not psi_grid and not t_grid:
        raise ParameterError("at least one of psi_grid and t_grid must be non-empty")
    if not seeds:
        raise ParameterError("at least one seed is required")
    out = []
    for psi in psi_grid:
        out.append(
            _mean_report(
                [run_detector(dataset, method, psi, fixed_t, s, threads) for s in seeds]
            )
        )
    for t in t_grid:
        out.append(
            _mean_report(
                [run_detector(dataset, method, fixed_psi, t, s, threads) for s in seeds]
            )
        )
    return out


@dataclass(frozen=True)
class BenchRow:
    """Timing and feature-store comparison at one dataset size."""

    size: int
    sik_fit_seconds: float
    sik_score_seconds: float
    idk_fit_seconds: float
    idk_score_seconds: float
    sik_feature_bytes: int
    idk_feature_bytes: int


def bench_scaling(d: int, sizes, psi: int, t: int, seed: int, threads: int = 1) -> list[BenchRow]:
    """Time both detectors on standard-normal data of increasing size.

    Per size n: fit the boundary detector and score all n points, then fit
    the distributional baseline (which additionally maps the whole training
    set into its kernel mean) and score all n points.  Feature bytes are the
    analytic store sizes for n points.
    """
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise ParameterError("at least one size is required")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ParameterError(f"sizes must be strictly ascending, got {sizes}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")

    # Untimed warmup so the first timed pass does not absorb one-time BLAS
    # and allocator initialization.
    warm_rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(4,)))
    warm = warm_rng.standard_normal((max(2 * psi, 256), d))
    warm_ens = fit_ensemble(warm, psi, min(t, 16), seed, threads=threads)
    sik_score_batch(sik_map_batch(warm_ens, warm, threads=threads))
    idk_score_batch(
        ik_map_batch(warm_ens, warm, threads=threads),
        idk_fit(ik_map_batch(warm_ens, warm, threads=threads)),
    )

    rows = []
    for ix, n in enumerate(sizes):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(3, ix)))
        data = rng.standard_normal((n, d))

        t0 = time.perf_counter()
        ens = fit_ensemble(data, psi, t, seed, threads=threads)
        t1 = time.perf_counter()
        sik_score_batch(sik_map_batch(ens, data, threads=threads))
        t2 = time.perf_counter()

        t3 = time.perf_counter()
        ens_idk = fit_ensemble(data, psi, t, seed, threads=threads)
        mean = idk_fit(ik_map_batch(ens_idk, data, threads=threads))
        t4 = time.perf_counter()
        idk_score_batch(ik_map_batch(ens_idk, data, threads=threads), mean)
        t5 = time.perf_counter()

        rows.append(
            BenchRow(
                size=n,
                sik_fit_seconds=t1 - t0,
                sik_score_seconds=t2 - t1,
                idk_fit_seconds=t4 - t3,
                idk_score_seconds=t5 - t4,
                sik_feature_bytes=n * sik_store_bytes_per_point(t),
                idk_feature_bytes=n * ik_store_bytes_per_point(psi, t) + 8 * t * psi,
            )
        )
    return rows
