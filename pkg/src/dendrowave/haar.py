"""Haar wavelet transform driven by a node-ranked dendrogram.

Ascending the merges in rank order, each cluster gets a smooth signal
s = (s_first + s_second) / 2 and a detail d = (s_first - s_second) / 2,
where first/second is the canonical child order.  Collecting the details
row by row gives the matrix identity

    X = C @ D + S

with C the branch-code matrix (+1 / -1 / 0), D the (n-1) x m detail matrix
and S the final smooth replicated over all n rows.  The transform is
orthogonal-free but exactly invertible: descending the ranks recovers
every terminal row.

The weighted variant replaces the plain average by the cardinality
weighted mean and stores the child sizes so its inverse stays exact; the
matrix identity above only holds for the unweighted filters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import (
    Dendrogram,
    NodeRef,
    ValidationError,
    branch_signs,
    canonical_orient,
    cluster,
)

MODE_ULTRAMETRIC = "ultrametric"
MODE_INDICATOR = "indicator"

THRESHOLD_RULES = ("absolute", "keep-k", "cluster-norm")


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    """Transform output: tree, branch codes C, details D, final smooth.

    ``details[k - 1]`` is the detail row of the cluster with rank k, and
    ``branch_codes`` column k - 1 is nonzero exactly on the terminals of
    that cluster.  ``child_sizes`` is populated by the weighted variant
    only.
    """

    tree: Dendrogram
    branch_codes: np.ndarray
    details: np.ndarray
    smooth: np.ndarray
    mode: str
    child_sizes: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.mode not in (MODE_ULTRAMETRIC, MODE_INDICATOR):
            raise ValidationError(f"unknown mode {self.mode!r}")
        n = self.tree.n_terminals
        if self.branch_codes.shape != (n, n - 1):
            raise ValidationError("branch codes must be n x (n-1)")
        if self.details.shape != (n - 1, self.smooth.shape[0]):
            raise ValidationError("details must be (n-1) x m")
        if self.child_sizes is not None and self.child_sizes.shape != (n - 1, 2):
            raise ValidationError("child sizes must be (n-1) x 2")

    @property
    def n_terminals(self) -> int:
        return self.tree.n_terminals

    @property
    def n_features(self) -> int:
        return int(self.smooth.shape[0])

    @property
    def order(self) -> tuple[int, ...]:
        """Cluster processing order: ranks ascending."""
        return tuple(range(1, self.tree.n_terminals))

    @property
    def is_weighted(self) -> bool:
        return self.child_sizes is not None


def _checked_data(X, d: Dendrogram) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != d.n_terminals:
        raise ValidationError(
            f"data must have one row per terminal ({d.n_terminals}), got shape {X.shape}"
        )
    if not np.isfinite(X).all():
        raise ValidationError("data contains non-finite entries")
    return X


def forward(X, d: Dendrogram, orient: bool = True, mode: str = MODE_ULTRAMETRIC) -> WaveletDecomposition:
    """Run the transform on data rows indexed by the tree's terminals.

    The tree is canonically oriented first unless ``orient`` is False, in
    which case the stored child order defines the signs (useful to observe
    that a child swap negates one C column and one D row and nothing else).
    """
    tree = canonical_orient(d) if orient else d
    X = _checked_data(X, tree)
    m = X.shape[1]
    smooth: dict[NodeRef, np.ndarray] = {}
    details = np.zeros((tree.n_clusters, m))
    for k in range(1, tree.n_clusters + 1):
        a, b = tree.children(k)
        sa = smooth[a] if not a.is_terminal else X[a.index - 1]
        sb = smooth[b] if not b.is_terminal else X[b.index - 1]
        smooth[cluster(k)] = (sa + sb) / 2.0
        details[k - 1] = (sa - sb) / 2.0
    final = smooth[tree.root] if tree.n_clusters else X[0].copy()
    return WaveletDecomposition(tree, branch_signs(tree), details, final, mode)


def forward_indicator(d: Dendrogram, orient: bool = True) -> WaveletDecomposition:
    """Transform the identity matrix: one indicator column per terminal.

    Every detail row then sums to zero, since both child smooths carry
    total mass one.
    """
    eye = np.eye(d.n_terminals)
    return forward(eye, d, orient=orient, mode=MODE_INDICATOR)


def forward_weighted(X, d: Dendrogram, orient: bool = True) -> WaveletDecomposition:
    """Cardinality-weighted variant of `forward`.

    Each merge stores s = (|a| s_a + |b| s_b) / (|a| + |b|) and the detail
    d = s_a - s; the child cardinalities ride along in ``child_sizes`` so
    `inverse` can undo the unequal split exactly.  For two singletons this
    reduces to the plain transform.
    """
    tree = canonical_orient(d) if orient else d
    X = _checked_data(X, tree)
    m = X.shape[1]
    smooth: dict[NodeRef, np.ndarray] = {}
    details = np.zeros((tree.n_clusters, m))
    sizes = np.zeros((tree.n_clusters, 2), dtype=np.int64)
    for k in range(1, tree.n_clusters + 1):
        a, b = tree.children(k)
        sa = smooth[a] if not a.is_terminal else X[a.index - 1]
        sb = smooth[b] if not b.is_terminal else X[b.index - 1]
        na, nb = len(tree.term_set(a)), len(tree.term_set(b))
        merged = (na * sa + nb * sb) / (na + nb)
        smooth[cluster(k)] = merged
        details[k - 1] = sa - merged
        sizes[k - 1] = (na, nb)
    final = smooth[tree.root] if tree.n_clusters else X[0].copy()
    return WaveletDecomposition(
        tree, branch_signs(tree), details, final, MODE_ULTRAMETRIC, child_sizes=sizes
    )


def inverse(w: WaveletDecomposition) -> np.ndarray:
    """Reconstruct the data matrix by descending the ranks from the root."""
    tree = w.tree
    n, m = tree.n_terminals, w.n_features
    X = np.zeros((n, m))
    if tree.n_clusters == 0:
        X[0] = w.smooth
        return X
    smooth: dict[NodeRef, np.ndarray] = {tree.root: np.asarray(w.smooth, dtype=float)}
    for k in range(tree.n_clusters, 0, -1):
        a, b = tree.children(k)
        s = smooth.pop(cluster(k))
        detail = w.details[k - 1]
        if w.child_sizes is None:
            sa = s + detail
            sb = s - detail
        else:
            na, nb = w.child_sizes[k - 1]
            sa = s + detail
            sb = s - (na / nb) * detail
        for node, val in ((a, sa), (b, sb)):
            if node.is_terminal:
                X[node.index - 1] = val
            else:
                smooth[node] = val
    return X


def inverse_weighted(w: WaveletDecomposition) -> np.ndarray:
    """Inverse for decompositions produced by `forward_weighted`."""
    if w.child_sizes is None:
        raise ValidationError("decomposition carries no child sizes; use inverse()")
    return inverse(w)


def reconstruct_matrix_form(w: WaveletDecomposition) -> np.ndarray:
    """Evaluate C @ D + S directly (unweighted decompositions only)."""
    if w.child_sizes is not None:
        raise ValidationError("the matrix identity does not hold for the weighted variant")
    n = w.n_terminals
    prod = w.branch_codes.astype(float) @ w.details
    return prod + np.tile(w.smooth, (n, 1))


def detail_norms(w: WaveletDecomposition) -> np.ndarray:
    """Euclidean norm of each detail row, indexed by rank - 1.

    These norms rank the clusters by signal content and can replace raw
    merge levels when choosing a partition.
    """
    return np.linalg.norm(w.details, axis=1)


def hard_threshold(w: WaveletDecomposition, rule: str, value) -> WaveletDecomposition:
    """Zero out detail coefficients (or whole rows) by one of three rules.

    ``absolute``: keep entries with |d| >= value (value 0 keeps everything).
    ``keep-k``: keep the value rows with the largest Euclidean norm.
    ``cluster-norm``: keep rows whose Euclidean norm is >= value.
    """
    if rule not in THRESHOLD_RULES:
        raise ValidationError(f"rule must be one of {THRESHOLD_RULES}, got {rule!r}")
    D = w.details.copy()
    if rule == "absolute":
        t = float(value)
        if t < 0:
            raise ValidationError("threshold must be >= 0")
        D[np.abs(D) < t] = 0.0
    elif rule == "keep-k":
        k = int(value)
        if not 0 <= k <= D.shape[0]:
            raise ValidationError(f"keep-k needs 0 <= k <= {D.shape[0]}, got {k}")
        norms = np.linalg.norm(D, axis=1)
        # stable order: larger norm first, earlier rank breaks ties
        keep = sorted(range(len(norms)), key=lambda i: (-norms[i], i))[:k]
        mask = np.ones(len(norms), dtype=bool)
        mask[keep] = False
        D[mask] = 0.0
    else:
        t = float(value)
        if t < 0:
            raise ValidationError("threshold must be >= 0")
        D[np.linalg.norm(D, axis=1) < t] = 0.0
    return WaveletDecomposition(
        w.tree, w.branch_codes, D, w.smooth.copy(), w.mode, child_sizes=w.child_sizes
    )
