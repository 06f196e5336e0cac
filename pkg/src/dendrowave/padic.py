"""P-adic codes for dendrogram nodes and the arithmetic they support.

Each terminal of an n-terminal dendrogram gets a code: a formal sum of
signed powers p^1..p^(n-1), one power per internal node on its root path,
signed +1 when the terminal lies under the first (canonical) child and -1
under the second.  Clusters get the unanimity sum of their members, which
coincides with reading the root path strictly above the cluster itself.
The root therefore carries the null code 0.

Norms and distances are returned as exact `fractions.Fraction` values.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .tree import (
    Dendrogram,
    NodeRef,
    ValidationError,
    branch_signs,
    build_from_merges,
    canonical_orient,
    cluster,
    terminal,
)

DEFAULT_BASE = 3


@dataclass(frozen=True)
class PAdicCode:
    """Coefficients in {-1, 0, +1} for powers p^1..p^(n-1) of the base."""

    coeffs: tuple[int, ...]
    base: int = DEFAULT_BASE

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValidationError(f"base must be >= 2, got {self.base}")
        for j, c in enumerate(self.coeffs, start=1):
            if c not in (-1, 0, 1):
                raise ValidationError(f"coefficient of p^{j} must be -1, 0 or +1, got {c}")

    @property
    def n_terminals(self) -> int:
        return len(self.coeffs) + 1

    @property
    def is_null(self) -> bool:
        return not any(self.coeffs)

    def support(self) -> tuple[int, ...]:
        """Levels whose coefficient is nonzero, ascending."""
        return tuple(j for j, c in enumerate(self.coeffs, start=1) if c)

    def decimal(self, base: int | None = None) -> int:
        """Exact integer value sum(c_j * p**j)."""
        p = self.base if base is None else base
        return sum(c * p**j for j, c in enumerate(self.coeffs, start=1))

    def to_string(self, symbol: str | None = None) -> str:
        """Signed-power form, e.g. ``+p^1+p^2+p^5+p^7``; the null code is ``0``.

        ``symbol`` defaults to the letter p; pass e.g. ``"2"`` to spell the
        base out.
        """
        sym = "p" if symbol is None else str(symbol)
        parts = [
            f"{'+' if c > 0 else '-'}{sym}^{j}"
            for j, c in enumerate(self.coeffs, start=1)
            if c
        ]
        return "".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self.to_string()


_TERM_RE = re.compile(r"([+-])([A-Za-z0-9]+)\^(\d+)")


def parse_code(text: str, n_terminals: int, base: int = DEFAULT_BASE) -> PAdicCode:
    """Parse a signed-power string back into a code (inverse of `to_string`)."""
    text = text.strip()
    coeffs = [0] * (n_terminals - 1)
    if text == "0":
        return PAdicCode(tuple(coeffs), base)
    pos = 0
    for m in _TERM_RE.finditer(text):
        if m.start() != pos:
            raise ValidationError(f"cannot parse code at {text[pos:]!r}")
        pos = m.end()
        sign, sym, exp = m.group(1), m.group(2), int(m.group(3))
        if sym not in ("p", str(base)):
            raise ValidationError(f"unexpected base symbol {sym!r}")
        if not 1 <= exp <= n_terminals - 1:
            raise ValidationError(f"exponent {exp} outside 1..{n_terminals - 1}")
        if coeffs[exp - 1]:
            raise ValidationError(f"repeated exponent {exp}")
        coeffs[exp - 1] = 1 if sign == "+" else -1
    if pos != len(text):
        raise ValidationError(f"cannot parse code at {text[pos:]!r}")
    return PAdicCode(tuple(coeffs), base)


def code_from_decimal(value: int, n_terminals: int, base: int = DEFAULT_BASE) -> PAdicCode:
    """Recover a code from its integer value.

    Unique for base >= 3 (the balanced digit set); base 2 is ambiguous and
    rejected here.
    """
    if base < 3:
        raise ValidationError("decimal round-trip needs base >= 3 (base 2 collides)")
    coeffs = []
    v = value
    for j in range(n_terminals):
        r = v % base
        if r > base // 2:
            r -= base
        if r not in (-1, 0, 1):
            raise ValidationError(f"{value} is not the value of any code in base {base}")
        if j == 0:
            if r != 0:
                raise ValidationError(f"{value} has a p^0 component, codes start at p^1")
        else:
            coeffs.append(r)
        v = (v - r) // base
    if v != 0:
        raise ValidationError(f"{value} needs powers beyond p^{n_terminals - 1}")
    return PAdicCode(tuple(coeffs), base)


def encode(d: Dendrogram, base: int = DEFAULT_BASE) -> tuple[list[PAdicCode], np.ndarray]:
    """Codes for all terminals plus the branch-code matrix, canonically oriented.

    Row i - 1 of the matrix holds the coefficients of terminal i's code.
    """
    oriented = canonical_orient(d)
    signs = branch_signs(oriented)
    codes = [PAdicCode(tuple(int(c) for c in row), base) for row in signs]
    return codes, signs


def decimal_value(code: PAdicCode, base: int | None = None) -> int:
    return code.decimal(base)


def _require_same_context(a: PAdicCode, b: PAdicCode) -> None:
    if len(a.coeffs) != len(b.coeffs) or a.base != b.base:
        raise ValidationError("codes come from different contexts (length or base differ)")


def padd(a: PAdicCode, b: PAdicCode) -> PAdicCode:
    """Average-and-threshold sum: keep a coefficient only where both agree.

    The null code is absorbing: anything summed with 0 gives 0, and 0 + 0
    stays 0.  The operation is commutative, associative and idempotent.
    """
    _require_same_context(a, b)
    coeffs = tuple(ca if ca == cb else 0 for ca, cb in zip(a.coeffs, b.coeffs))
    return PAdicCode(coeffs, a.base)


def cluster_code(d: Dendrogram, node: NodeRef, base: int = DEFAULT_BASE) -> PAdicCode:
    """Code of any node: a terminal's own code, or the unanimity sum of members.

    Computed both as the fold of member codes and as the root-path reading
    above the node's own rank; the two must agree.  The root gets the null
    code.
    """
    oriented = canonical_orient(d)
    codes, _ = encode(oriented, base)
    members = sorted(oriented.term_set(node))
    folded = codes[members[0] - 1]
    for i in members[1:]:
        folded = padd(folded, codes[i - 1])

    coeffs = [0] * (oriented.n_terminals - 1)
    child: NodeRef = node
    parents = oriented._parent_rank
    while child in parents:
        k = parents[child]
        first, _second = oriented.children(k)
        coeffs[k - 1] = 1 if child == first else -1
        child = cluster(k)
    from_path = PAdicCode(tuple(coeffs), base)
    if from_path != folded:
        raise ValidationError(f"member sum and root path disagree at {node!r}")
    return folded


# ----------------------------------------------------------------- polynomials

IntPoly = dict[int, int]


def poly_from_code(code: PAdicCode) -> IntPoly:
    return {j: c for j, c in enumerate(code.coeffs, start=1) if c}


def pmultiply(a: IntPoly, b: IntPoly, n_terminals: int) -> IntPoly:
    """Convolution product of integer polynomials in p, truncated above p^(n-1).

    Keys are powers (negative powers are legal in intermediate results),
    values are integer coefficients; zero coefficients are dropped.
    """
    out: IntPoly = {}
    for (ja, ca), (jb, cb) in itertools.product(a.items(), b.items()):
        j = ja + jb
        if j > n_terminals - 1:
            continue
        out[j] = out.get(j, 0) + ca * cb
    return {j: c for j, c in sorted(out.items()) if c}


def dilate(code: PAdicCode) -> PAdicCode:
    """Multiply by 1/p: every coefficient drops one level, the lowest is lost.

    The top coefficient becomes 0, so n - 1 applications send any code to
    the null code.
    """
    coeffs = code.coeffs[1:] + (0,)
    return PAdicCode(coeffs, code.base)


def dilation_steps_to_null(code: PAdicCode) -> int:
    """Number of dilations until the null code is reached (at most n - 1)."""
    steps = 0
    while not code.is_null:
        code = dilate(code)
        steps += 1
    return steps


def dilate_tree(d: Dendrogram) -> Dendrogram:
    """Structural counterpart of dilation: fuse the rank-1 pair into one terminal.

    The two children of the lowest merge (always terminals) become a single
    terminal labelled ``a+b``; every remaining rank drops by one.
    """
    if d.n_clusters == 0:
        raise ValidationError("a single terminal cannot be dilated further")
    oriented = canonical_orient(d)
    a, b = oriented.children(1)
    keep_pos, drop_pos = a.index, b.index
    fused = f"{oriented.labels[keep_pos - 1]}+{oriented.labels[drop_pos - 1]}"

    def remap(i: int) -> int:
        return i - 1 if i > drop_pos else i

    labels = [
        fused if i == keep_pos else lab
        for i, lab in enumerate(oriented.labels, start=1)
        if i != drop_pos
    ]

    def convert(ref: NodeRef) -> NodeRef:
        if ref.is_terminal:
            return terminal(remap(ref.index))
        if ref.index == 1:
            return terminal(remap(keep_pos))
        return cluster(ref.index - 1)

    merges = [
        (convert(x), convert(y)) for x, y in oriented.merges[1:]
    ]
    levels = None if oriented.levels is None else oriented.levels[1:]
    return build_from_merges(merges, levels=levels, labels=labels)


# -------------------------------------------------------------- norm, distance

def pnorm(d: Dendrogram, node: NodeRef, base: int = DEFAULT_BASE) -> Fraction:
    """Ultrametric norm of a node: 1 for terminals, p^-rank for clusters.

    The root (whose code is null) gets 0 by convention, so the norm is
    below 1 exactly for genuine (non-singleton) clusters.
    """
    d._check_node(node)
    if node.is_terminal:
        return Fraction(1)
    if node.index == d.n_clusters:
        return Fraction(0)
    return Fraction(1, base**node.index)


def dilation_operator_norm(base: int = DEFAULT_BASE) -> Fraction:
    """Operator norm of multiplication by 1/p, namely |1/p| = p."""
    return Fraction(base)


def pdistance(
    a: PAdicCode | NodeRef,
    b: PAdicCode | NodeRef,
    d: Dendrogram | None = None,
    base: int = DEFAULT_BASE,
) -> Fraction:
    """Ultrametric distance p^-r between two codes (or nodes of ``d``).

    r is the lowest level where both codes carry a nonzero coefficient.
    Equal codes are at distance 0; if one code is null (or the supports
    never meet) the distance takes the coarsest value p^-(n-1).  For two
    terminals this reproduces p^-rank(lca).
    """
    if isinstance(a, NodeRef) or isinstance(b, NodeRef):
        if d is None:
            raise ValidationError("node references need the dendrogram they live in")
        if isinstance(a, NodeRef):
            a = cluster_code(d, a, base)
        if isinstance(b, NodeRef):
            b = cluster_code(d, b, base)
    _require_same_context(a, b)
    if a == b:
        return Fraction(0)
    common = [j for j, (ca, cb) in enumerate(zip(a.coeffs, b.coeffs), start=1) if ca and cb]
    r = common[0] if common else a.n_terminals - 1
    return Fraction(1, a.base**r)


def power_repr(value: Fraction, base: int) -> str:
    """Render an exact p-power value symbolically: ``0``, ``1``, ``p^-2``, ``p^1``."""
    value = Fraction(value)
    if value == 0:
        return "0"
    if value == 1:
        return "1"
    if value.numerator == 1:
        e = 0
        den = value.denominator
        while den % base == 0:
            den //= base
            e += 1
        if den == 1:
            return f"p^-{e}"
    if value.denominator == 1:
        e = 0
        num = value.numerator
        while num % base == 0:
            num //= base
            e += 1
        if num == 1:
            return f"p^{e}"
    return str(value)


# ----------------------------------------------------------------------- decode

def decode(
    codes_or_matrix: Sequence[PAdicCode] | np.ndarray,
    labels: Sequence[str] | None = None,
) -> Dendrogram:
    """Rebuild the dendrogram whose branch codes are given.

    Accepts the n x (n-1) sign matrix or the list of terminal codes (its
    rows).  Column supports must form a laminar family with +1 rows and -1
    rows each covering exactly one already-built node; otherwise a
    `ValidationError` reports the offending column.  Composing with
    `encode` returns the canonical orientation of the original tree.
    """
    if isinstance(codes_or_matrix, np.ndarray):
        mat = np.asarray(codes_or_matrix)
    else:
        rows = [c.coeffs for c in codes_or_matrix]
        mat = np.array(rows, dtype=np.int8) if rows else np.zeros((1, 0), dtype=np.int8)
        if mat.shape[0] and mat.shape[1] != mat.shape[0] - 1:
            raise ValidationError(
                f"{mat.shape[0]} codes need length {mat.shape[0] - 1}, got {mat.shape[1]}"
            )
    if mat.ndim != 2:
        raise ValidationError("branch codes must form a 2-d matrix")
    n, m = mat.shape
    if m != n - 1:
        raise ValidationError(f"matrix must be n x (n-1), got {n} x {m}")
    if not np.isin(mat, (-1, 0, 1)).all():
        raise ValidationError("branch codes contain entries other than -1, 0, +1")

    covering: dict[int, NodeRef] = {i: terminal(i) for i in range(1, n + 1)}
    node_terms: dict[NodeRef, frozenset[int]] = {
        terminal(i): frozenset((i,)) for i in range(1, n + 1)
    }
    merges: list[tuple[NodeRef, NodeRef]] = []
    for k in range(1, n):
        col = mat[:, k - 1]
        plus = frozenset(int(i) + 1 for i in np.flatnonzero(col == 1))
        minus = frozenset(int(i) + 1 for i in np.flatnonzero(col == -1))
        if not plus or not minus:
            raise ValidationError(f"column {k}: both signs must appear")
        children = []
        for side, name in ((plus, "+1"), (minus, "-1")):
            node = covering[min(side)]
            if node_terms[node] != side:
                raise ValidationError(
                    f"column {k}: {name} rows do not match any current subtree "
                    "(not a laminar family)"
                )
            children.append(node)
        new = cluster(k)
        node_terms[new] = plus | minus
        for i in plus | minus:
            covering[i] = new
        merges.append((children[0], children[1]))
    if merges and node_terms[cluster(n - 1)] != frozenset(range(1, n + 1)):
        raise ValidationError("the final column must merge everything into the root")
    return build_from_merges(merges, labels=labels)
