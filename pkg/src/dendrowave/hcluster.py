"""Agglomerative hierarchical clustering with Lance-Williams updates.

`agglomerate` turns a dissimilarity matrix into a node-ranked dendrogram:
at every step the globally closest pair of clusters merges, the merge
order becomes the ranks, and the dissimilarities to the new cluster are
produced by the Lance-Williams recurrence

    d(k, i+j) = a_i d(k,i) + a_j d(k,j) + b d(i,j) + g |d(k,i) - d(k,j)|

with the standard coefficient table per criterion.  The recurrence is
applied to the dissimilarities exactly as given; for the variance-style
criteria (ward, centroid, median) the classical construction feeds
squared Euclidean distances, which is the caller's choice to make.

Ties are broken deterministically by the lexicographically smallest pair
of original indices.  The naive O(n^3) scan is intentional; inputs here
are desk scale.
"""

from __future__ import annotations

import warnings
from typing import Callable, Sequence

import numpy as np

from .tree import Dendrogram, NodeRef, ValidationError, build_from_merges, cluster, terminal

# coefficient table: (size_a, size_b, size_other) -> (alpha_a, alpha_b, beta, gamma)
_Coeffs = Callable[[int, int, int], tuple[float, float, float, float]]

LINKAGES: dict[str, _Coeffs] = {
    "single": lambda na, nb, nk: (0.5, 0.5, 0.0, -0.5),
    "complete": lambda na, nb, nk: (0.5, 0.5, 0.0, 0.5),
    "average": lambda na, nb, nk: (na / (na + nb), nb / (na + nb), 0.0, 0.0),
    "ward": lambda na, nb, nk: (
        (na + nk) / (na + nb + nk),
        (nb + nk) / (na + nb + nk),
        -nk / (na + nb + nk),
        0.0,
    ),
    "centroid": lambda na, nb, nk: (
        na / (na + nb),
        nb / (na + nb),
        -(na * nb) / (na + nb) ** 2,
        0.0,
    ),
    "median_wpgmc": lambda na, nb, nk: (0.5, 0.5, -0.25, 0.0),
}


def pairwise_euclidean(X) -> np.ndarray:
    """Euclidean distance matrix between the rows of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValidationError(f"expected a 2-d data matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValidationError("data contains non-finite entries")
    diffs = X[:, None, :] - X[None, :, :]
    return np.sqrt((diffs**2).sum(axis=-1))


def validate_dissimilarity(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"dissimilarity matrix must be square, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValidationError("dissimilarity matrix contains non-finite entries")
    if not np.allclose(M, M.T, rtol=1e-9, atol=1e-12):
        raise ValidationError("dissimilarity matrix is not symmetric")
    if np.abs(np.diag(M)).max(initial=0.0) > 0:
        raise ValidationError("dissimilarity matrix needs a zero diagonal")
    if M.min(initial=0.0) < 0:
        raise ValidationError("dissimilarities must be nonnegative")
    return M


def _agglomerate_core(
    M: np.ndarray, criterion: str
) -> tuple[list[tuple[NodeRef, NodeRef]], list[float]]:
    coeffs = LINKAGES[criterion]
    n = M.shape[0]
    refs: dict[int, NodeRef] = {i: terminal(i + 1) for i in range(n)}
    sizes: dict[int, int] = {i: 1 for i in range(n)}
    mins: dict[int, int] = {i: i for i in range(n)}
    dist: dict[tuple[int, int], float] = {
        (i, j): float(M[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    active = set(range(n))
    merges: list[tuple[NodeRef, NodeRef]] = []
    levels: list[float] = []

    def pair_key(i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    for step in range(1, n):
        best = None
        for i, j in dist:
            lo, hi = sorted((mins[i], mins[j]))
            cand = (dist[(i, j)], lo, hi, i, j)
            if best is None or cand < best:
                best = cand
        level, _, _, ia, ib = best
        if mins[ib] < mins[ia]:
            ia, ib = ib, ia
        merges.append((refs[ia], refs[ib]))
        levels.append(level)

        new_id = n + step - 1
        na, nb = sizes[ia], sizes[ib]
        d_ab = dist.pop(pair_key(ia, ib))
        active.discard(ia)
        active.discard(ib)
        for k in active:
            d_ka = dist.pop(pair_key(k, ia))
            d_kb = dist.pop(pair_key(k, ib))
            aa, ab, beta, gamma = coeffs(na, nb, sizes[k])
            dist[pair_key(k, new_id)] = (
                aa * d_ka + ab * d_kb + beta * d_ab + gamma * abs(d_ka - d_kb)
            )
        refs[new_id] = cluster(step)
        sizes[new_id] = na + nb
        mins[new_id] = min(mins[ia], mins[ib])
        active.add(new_id)
    return merges, levels


def agglomerate(
    diss, criterion: str, labels: Sequence[str] | None = None
) -> Dendrogram:
    """Cluster a dissimilarity matrix into a node-ranked dendrogram.

    Ranks record the merge order, each merge's children stored with the
    subtree holding the smallest original index first.  Merge levels are
    attached only when they come out strictly increasing; centroid and
    median linkage can invert (and exact ties can repeat), in which case
    the levels are dropped with a warning and the ranks remain the
    authoritative order.
    """
    if criterion not in LINKAGES:
        raise ValidationError(
            f"unknown linkage {criterion!r}; choose from {sorted(LINKAGES)}"
        )
    M = validate_dissimilarity(diss)
    if M.shape[0] < 2:
        raise ValidationError("need n >= 2 observations to cluster")
    merges, levels = _agglomerate_core(M, criterion)
    monotone = all(levels[k] < levels[k + 1] for k in range(len(levels) - 1))
    if not monotone:
        warnings.warn(
            f"{criterion} produced merge levels that are not strictly increasing; "
            "levels dropped, ranks keep the merge order",
            stacklevel=2,
        )
    return build_from_merges(
        merges, levels=levels if monotone else None, labels=labels
    )


def merge_levels(diss, criterion: str) -> list[float]:
    """Raw merge levels in rank order, inversions and ties included."""
    if criterion not in LINKAGES:
        raise ValidationError(
            f"unknown linkage {criterion!r}; choose from {sorted(LINKAGES)}"
        )
    M = validate_dissimilarity(diss)
    if M.shape[0] < 2:
        raise ValidationError("need n >= 2 observations to cluster")
    return _agglomerate_core(M, criterion)[1]
