"""Independent oracles shared by the test modules.

These deliberately avoid the library's vectorized code paths: distances are
sequential Python loops (the same accumulation order as the C reference the
library is tested against), memberships are brute-force scans over all
spheres, and AUROC enumerates every (anomaly, normal) pair.
"""

from __future__ import annotations

import math

import numpy as np


def seq_distance(a, b) -> float:
    """Euclidean distance with strictly sequential accumulation."""
    s = 0.0
    for x, y in zip(a, b):
        diff = float(x) - float(y)
        s += diff * diff
    return math.sqrt(s)


def nn_radii(centers) -> list[float]:
    """Brute-force nearest-neighbor distance per center over all pairs."""
    centers = np.asarray(centers, dtype=np.float64)
    out = []
    for j in range(len(centers)):
        best = math.inf
        for k in range(len(centers)):
            if k != j:
                best = min(best, seq_distance(centers[j], centers[k]))
        out.append(best)
    return out


def brute_locate(partitioning, x):
    """Scan all spheres: closest containing center, lowest index on ties."""
    best = None
    best_dist = math.inf
    for j in range(partitioning.psi):
        dist = seq_distance(x, partitioning.centers[j])
        if dist <= partitioning.radii[j] and dist < best_dist:
            best = j
            best_dist = dist
    return best


def brute_assignments(ensemble, X) -> np.ndarray:
    out = np.full((len(X), ensemble.t), -1, dtype=np.int64)
    for r, x in enumerate(X):
        for i in range(ensemble.t):
            loc = brute_locate(ensemble.partitioning(i), x)
            out[r, i] = -1 if loc is None else loc
    return out


def brute_auroc(scores, labels) -> float:
    """All-pairs Mann-Whitney: wins plus half-ties over anomaly x normal pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def dense_inner_kernel(dense_x, dense_y, t) -> float:
    """Kernel value from dense 0/1 vectors: normalized inner product."""
    return float(np.dot(np.asarray(dense_x, dtype=np.float64), np.asarray(dense_y, dtype=np.float64))) / t
