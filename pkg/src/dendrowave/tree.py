"""Node-ranked binary dendrograms.

A dendrogram on n terminals is a rooted binary tree whose n - 1 internal
nodes carry the merge order as ranks 1..n-1; rank n - 1 is the root and
every child merges strictly below its parent.  Child order is stored
explicitly, so the 2**(n-1) equivalent representations obtained by
exchanging the two subtrees at any subset of nodes can be produced
(`apply_swap`), compared, and reduced to a single canonical orientation
(`canonical_orient`).

Terminals are indexed 1..n and carry string labels; the label order fixes
the row order of any data matrix associated with the tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when a structural invariant is violated."""


@dataclass(frozen=True)
class NodeRef:
    """Reference to one node: a terminal (index 1..n) or a cluster (rank 1..n-1)."""

    kind: str
    index: int

    def __post_init__(self) -> None:
        if self.kind not in ("terminal", "cluster"):
            raise ValidationError(f"unknown node kind {self.kind!r}")
        if self.index < 1:
            raise ValidationError(f"{self.kind} index must be >= 1, got {self.index}")

    @property
    def is_terminal(self) -> bool:
        return self.kind == "terminal"

    @property
    def rank(self) -> int:
        """Merge rank of the node.  Terminals sit below every merge and get 0."""
        return 0 if self.is_terminal else self.index

    def __repr__(self) -> str:
        return f"{'x' if self.is_terminal else 'q'}{self.index}"


def terminal(i: int) -> NodeRef:
    return NodeRef("terminal", i)


def cluster(j: int) -> NodeRef:
    return NodeRef("cluster", j)


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class Dendrogram:
    """An ordered, node-ranked binary dendrogram.

    Attributes
    ----------
    labels:
        Terminal labels; terminal i (1-based) is ``labels[i - 1]``.
    merges:
        ``merges[k - 1]`` holds the ordered child pair of the cluster with
        rank k.  Every terminal and every non-root cluster appears exactly
        once as a child, and a child cluster's rank is strictly below its
        parent's.
    levels:
        Optional real merge heights, strictly increasing in rank.
    """

    labels: tuple[str, ...]
    merges: tuple[tuple[NodeRef, NodeRef], ...]
    levels: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.labels)
        if n < 1:
            raise ValidationError("need at least one terminal")
        if len(set(self.labels)) != n:
            raise ValidationError("terminal labels must be distinct")
        if len(self.merges) != n - 1:
            raise ValidationError(
                f"{n} terminals require {n - 1} merges, got {len(self.merges)}"
            )
        seen: set[NodeRef] = set()
        for k, pair in enumerate(self.merges, start=1):
            if len(pair) != 2:
                raise ValidationError(f"rank {k}: a merge joins exactly two nodes")
            for child in pair:
                if child.is_terminal:
                    if child.index > n:
                        raise ValidationError(
                            f"rank {k}: terminal {child.index} out of range 1..{n}"
                        )
                elif child.index >= k:
                    raise ValidationError(
                        f"rank {k}: child cluster q{child.index} must rank below {k}"
                    )
                if child in seen:
                    raise ValidationError(f"rank {k}: {child!r} already merged earlier")
                seen.add(child)
        for i in range(1, n + 1):
            if n > 1 and terminal(i) not in seen:
                raise ValidationError(f"terminal {i} never takes part in a merge")
        for j in range(1, n - 1):
            if cluster(j) not in seen:
                raise ValidationError(f"cluster q{j} is never merged further (dangling)")
        if self.levels is not None:
            if len(self.levels) != n - 1:
                raise ValidationError(
                    f"levels must have one entry per merge, got {len(self.levels)}"
                )
            for k, v in enumerate(self.levels, start=1):
                if not np.isfinite(v):
                    raise ValidationError(f"rank {k}: level {v!r} is not finite")
                if k >= 2 and not self.levels[k - 2] < v:
                    raise ValidationError(
                        f"rank {k}: levels must be strictly increasing "
                        f"({self.levels[k - 2]!r} then {v!r})"
                    )

    # ------------------------------------------------------------------ sizes

    @property
    def n_terminals(self) -> int:
        return len(self.labels)

    @property
    def n_clusters(self) -> int:
        return len(self.merges)

    @property
    def root(self) -> NodeRef:
        return cluster(self.n_clusters) if self.merges else terminal(1)

    # ------------------------------------------------------------- structure

    @cached_property
    def _term_sets(self) -> tuple[frozenset[int], ...]:
        sets: list[frozenset[int]] = []
        for a, b in self.merges:
            sa = sets[a.index - 1] if not a.is_terminal else frozenset((a.index,))
            sb = sets[b.index - 1] if not b.is_terminal else frozenset((b.index,))
            sets.append(sa | sb)
        return tuple(sets)

    @cached_property
    def _parent_rank(self) -> dict[NodeRef, int]:
        parents: dict[NodeRef, int] = {}
        for k, (a, b) in enumerate(self.merges, start=1):
            parents[a] = k
            parents[b] = k
        return parents

    def _check_node(self, node: NodeRef) -> None:
        bound = self.n_terminals if node.is_terminal else self.n_clusters
        if node.index > bound:
            raise ValidationError(f"unknown node {node!r} for {self.n_terminals} terminals")

    def children(self, rank: int) -> tuple[NodeRef, NodeRef]:
        if not 1 <= rank <= self.n_clusters:
            raise ValidationError(f"no cluster of rank {rank}")
        return self.merges[rank - 1]

    def term_set(self, node: NodeRef) -> frozenset[int]:
        """Terminal indices lying under ``node``."""
        self._check_node(node)
        if node.is_terminal:
            return frozenset((node.index,))
        return self._term_sets[node.index - 1]

    def lca(self, i: int, j: int) -> NodeRef:
        """Lowest cluster containing both terminals i and j (i != j)."""
        if i == j:
            raise ValidationError("lca needs two distinct terminals")
        for t in (i, j):
            self._check_node(terminal(t))
        ancestors: set[int] = set()
        node = terminal(i)
        while node in self._parent_rank:
            ancestors.add(self._parent_rank[node])
            node = cluster(self._parent_rank[node])
        node = terminal(j)
        while node in self._parent_rank:
            k = self._parent_rank[node]
            if k in ancestors:
                return cluster(k)
            node = cluster(k)
        raise ValidationError(f"terminals {i} and {j} share no ancestor")

    def level_of(self, rank: int) -> float:
        if self.levels is None:
            raise ValidationError("this dendrogram carries no levels")
        if not 1 <= rank <= self.n_clusters:
            raise ValidationError(f"no cluster of rank {rank}")
        return self.levels[rank - 1]

    def leaf_order(self) -> tuple[int, ...]:
        """Terminal indices read left to right, following stored child order."""
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_terminal:
                out.append(node.index)
            else:
                a, b = self.merges[node.index - 1]
                stack.append(b)
                stack.append(a)
        return tuple(out)

    def label_of(self, i: int) -> str:
        self._check_node(terminal(i))
        return self.labels[i - 1]


def build_from_merges(
    merges: Iterable[tuple[NodeRef, NodeRef]],
    levels: Sequence[float] | None = None,
    labels: Sequence[str] | None = None,
) -> Dendrogram:
    """Assemble and validate a dendrogram from its ordered merge list.

    ``merges[k - 1]`` becomes the child pair of rank k.  With no merges the
    result is the single-terminal tree.  Labels default to ``x1..xn``.
    """
    merge_tuple = tuple((a, b) for a, b in merges)
    n = len(merge_tuple) + 1
    if labels is None:
        labels = default_labels(n)
    level_tuple = None if levels is None else tuple(float(v) for v in levels)
    return Dendrogram(tuple(str(s) for s in labels), merge_tuple, level_tuple)


# ---------------------------------------------------------------- reorientation

SwapMask = tuple[bool, ...]


def apply_swap(d: Dendrogram, mask: Sequence[bool | int]) -> Dendrogram:
    """Exchange the two children at every node whose mask bit is set."""
    bits = tuple(bool(b) for b in mask)
    if len(bits) != d.n_clusters:
        raise ValidationError(
            f"mask needs {d.n_clusters} bits, got {len(bits)}"
        )
    merges = tuple(
        (b, a) if bit else (a, b) for (a, b), bit in zip(d.merges, bits)
    )
    return Dendrogram(d.labels, merges, d.levels)


def canonical_orient(d: Dendrogram) -> Dendrogram:
    """Reorder children so the subtree holding the smallest terminal comes first.

    All 2**(n-1) representations of the same hierarchy collapse to this one
    fixed point, and applying the function twice changes nothing.
    """
    merges = []
    for a, b in d.merges:
        if min(d.term_set(a)) < min(d.term_set(b)):
            merges.append((a, b))
        else:
            merges.append((b, a))
    return Dendrogram(d.labels, tuple(merges), d.levels)


def branch_signs(d: Dendrogram) -> np.ndarray:
    """The n x (n-1) branch-code matrix of the tree as stored.

    Column k is +1 on terminals under the first child of rank k, -1 under
    the second child, 0 elsewhere.  Orientation follows the stored child
    order; canonicalize first if a representation-independent matrix is
    wanted.
    """
    n = d.n_terminals
    out = np.zeros((n, d.n_clusters), dtype=np.int8)
    for k, (a, b) in enumerate(d.merges, start=1):
        for i in d.term_set(a):
            out[i - 1, k - 1] = 1
        for i in d.term_set(b):
            out[i - 1, k - 1] = -1
    return out


# -------------------------------------------------------------------- JSON I/O

_FORMAT = "dendrogram"


def _node_to_json(node: NodeRef) -> dict:
    return {node.kind: node.index}


def _node_from_json(obj: object, where: str) -> NodeRef:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValidationError(f"{where}: expected one-key node object, got {obj!r}")
    kind, index = next(iter(obj.items()))
    if kind not in ("terminal", "cluster") or not isinstance(index, int):
        raise ValidationError(f"{where}: bad node {obj!r}")
    return NodeRef(kind, index)


def to_json(d: Dendrogram, indent: int | None = 2) -> str:
    """Serialize to the JSON interchange schema (ranks explicit per merge)."""
    doc: dict = {
        "format": _FORMAT,
        "n_terminals": d.n_terminals,
        "terminals": list(d.labels),
        "merges": [
            {"rank": k, "children": [_node_to_json(a), _node_to_json(b)]}
            for k, (a, b) in enumerate(d.merges, start=1)
        ],
    }
    if d.levels is not None:
        doc["levels"] = list(d.levels)
    return json.dumps(doc, indent=indent, sort_keys=True)


def from_json(text: str) -> Dendrogram:
    """Parse the JSON schema produced by `to_json`, with located errors."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise ValidationError(f"expected a {_FORMAT!r} document")
    labels = doc.get("terminals")
    if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
        raise ValidationError("terminals: expected a list of strings")
    n = len(labels)
    if doc.get("n_terminals") != n:
        raise ValidationError(
            f"n_terminals says {doc.get('n_terminals')!r} but {n} labels given"
        )
    raw = doc.get("merges")
    if not isinstance(raw, list):
        raise ValidationError("merges: expected a list")
    by_rank: dict[int, tuple[NodeRef, NodeRef]] = {}
    for idx, entry in enumerate(raw):
        where = f"merges[{idx}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object")
        rank = entry.get("rank")
        if not isinstance(rank, int) or not 1 <= rank <= n - 1:
            raise ValidationError(f"{where}: rank {rank!r} outside 1..{n - 1}")
        if rank in by_rank:
            raise ValidationError(f"{where}: duplicate rank {rank}")
        kids = entry.get("children")
        if not isinstance(kids, list) or len(kids) != 2:
            raise ValidationError(f"{where}: children must list exactly two nodes")
        by_rank[rank] = (
            _node_from_json(kids[0], where),
            _node_from_json(kids[1], where),
        )
    if len(by_rank) != n - 1:
        missing = sorted(set(range(1, n)) - set(by_rank))
        raise ValidationError(f"missing merges for ranks {missing}")
    merges = tuple(by_rank[k] for k in range(1, n))
    levels = doc.get("levels")
    if levels is not None:
        if not isinstance(levels, list) or not all(
            isinstance(v, (int, float)) for v in levels
        ):
            raise ValidationError("levels: expected a list of numbers")
        levels = tuple(float(v) for v in levels)
    return Dendrogram(tuple(labels), merges, levels)


def save_json(d: Dendrogram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(d))
        fh.write("\n")


def load_json(path) -> Dendrogram:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json(fh.read())


# ------------------------------------------------------------------ generators

def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_dendrogram(
    n: int,
    rng: int | np.random.Generator | None = None,
    with_levels: bool = False,
    labels: Sequence[str] | None = None,
) -> Dendrogram:
    """Draw a uniform random merge order on n terminals."""
    if n < 1:
        raise ValidationError("need at least one terminal")
    gen = _as_rng(rng)
    active: list[NodeRef] = [terminal(i) for i in range(1, n + 1)]
    merges: list[tuple[NodeRef, NodeRef]] = []
    for k in range(1, n):
        i, j = sorted(gen.choice(len(active), size=2, replace=False))
        b = active.pop(int(j))
        a = active.pop(int(i))
        merges.append((a, b))
        active.append(cluster(k))
    levels = None
    if with_levels:
        levels = tuple(np.cumsum(gen.uniform(0.1, 1.0, size=n - 1)).tolist())
    return build_from_merges(merges, levels=levels, labels=labels)
