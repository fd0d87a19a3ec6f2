"""Rooted forests decorated by linear forms.

Forests are commutative multisets of non-planar rooted trees; every vertex
carries a linear-form decoration and an id that later names its series
variable.  Construction is locality-guarded: concatenation and grafting
demand Q-orthogonality, mirroring the partial product and partial grafting
action of the underlying operated structure.

The module also owns the text grammar (canonical weight mode and explicit
vector mode), the order-independent canonical encoding, and a catalog of all
forest shapes of a given size.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import (
    LocalityViolation,
    NonPositiveWeight,
    NotProperlyDecorated,
    ParseError,
)
from .pairing import (
    InnerProduct,
    LinearForm,
    Rational,
    ZERO_FORM,
    basis,
    check_properly_decorated,
    inner,
    is_independent,
)

VertexId = int


@dataclass(frozen=True)
class DecoratedTree:
    """A rooted tree: root decoration, root id, and an unordered children tuple."""

    root_id: VertexId
    decoration: LinearForm
    children: tuple["DecoratedTree", ...]

    def vertex_count(self) -> int:
        return 1 + sum(c.vertex_count() for c in self.children)


@dataclass(frozen=True)
class DecoratedForest:
    """A multiset of decorated rooted trees; the empty tuple is the unit."""

    trees: tuple[DecoratedTree, ...]

    def degree(self) -> int:
        return sum(t.vertex_count() for t in self.trees)

    def is_empty(self) -> bool:
        return not self.trees


EMPTY_FOREST = DecoratedForest(())


def tree(
    root_id: VertexId,
    decoration: LinearForm,
    children: Sequence[DecoratedTree] = (),
) -> DecoratedTree:
    return DecoratedTree(root_id, decoration, tuple(children))


def forest_of(*trees_: DecoratedTree) -> DecoratedForest:
    return DecoratedForest(tuple(trees_))


def iter_vertices(forest: DecoratedForest) -> Iterator[DecoratedTree]:
    """Every vertex of the forest, as the subtree node rooted there."""
    stack = list(forest.trees)
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children)


def vertex_ids(forest: DecoratedForest) -> tuple[VertexId, ...]:
    return tuple(sorted(node.root_id for node in iter_vertices(forest)))


def degree(forest: DecoratedForest) -> int:
    """Total vertex count; the unit forest has degree zero."""
    return forest.degree()


def decorations(forest: DecoratedForest) -> dict[VertexId, LinearForm]:
    return {node.root_id: node.decoration for node in iter_vertices(forest)}


def concat(
    f1: DecoratedForest, f2: DecoratedForest, Q: InnerProduct
) -> DecoratedForest:
    """Disjoint product of two forests; defined only on independent pairs."""
    d1 = decorations(f1)
    d2 = decorations(f2)
    shared = set(d1) & set(d2)
    if shared:
        raise ValueError(
            f"vertex ids {sorted(shared)} occur in both concatenation operands"
        )
    for v, a in d1.items():
        for w, b in d2.items():
            if not is_independent(Q, a, b):
                raise LocalityViolation(
                    f"decorations of vertices {v} and {w} pair nontrivially: "
                    f"Q({a}, {b}) = {inner(Q, a, b)}"
                )
    return DecoratedForest(f1.trees + f2.trees)


def graft(
    omega: LinearForm,
    forest: DecoratedForest,
    Q: InnerProduct,
    root_id: Optional[VertexId] = None,
) -> DecoratedTree:
    """Grow a new root decorated ``omega`` below ``forest``.

    The grafting action is partial: ``omega`` must be independent of every
    decoration already present.  When no ``root_id`` is given, one larger
    than every existing id is used.
    """
    for node in iter_vertices(forest):
        if not is_independent(Q, omega, node.decoration):
            raise LocalityViolation(
                f"grafting decoration pairs nontrivially with vertex "
                f"{node.root_id}: Q({omega}, {node.decoration}) = "
                f"{inner(Q, omega, node.decoration)}"
            )
    if root_id is None:
        ids = vertex_ids(forest)
        root_id = (max(ids) + 1) if ids else 0
    elif root_id in vertex_ids(forest):
        raise ValueError(f"root id {root_id} already used in the forest")
    return DecoratedTree(root_id, omega, forest.trees)


@dataclass(frozen=True)
class Empty:
    """Decomposition case: the unit forest."""


@dataclass(frozen=True)
class Product:
    """Decomposition case: a product of at least two trees."""

    factors: tuple[DecoratedTree, ...]


@dataclass(frozen=True)
class Grafted:
    """Decomposition case: a single tree, recorded as a graft."""

    omega: LinearForm
    inner: DecoratedForest
    root_id: VertexId


Decomposition = Union[Empty, Product, Grafted]


def decompose(forest: DecoratedForest) -> Decomposition:
    """The unique way a forest arises: unit, product, or a single graft."""
    if not forest.trees:
        return Empty()
    if len(forest.trees) > 1:
        return Product(forest.trees)
    t = forest.trees[0]
    return Grafted(t.decoration, DecoratedForest(t.children), t.root_id)


def subtree_sums(forest: DecoratedForest) -> dict[VertexId, LinearForm]:
    """For each vertex v, the sum L_v of decorations over its maximal subtree."""
    sums: dict[VertexId, LinearForm] = {}

    def walk(node: DecoratedTree) -> LinearForm:
        acc = node.decoration
        for child in node.children:
            acc = acc + walk(child)
        sums[node.root_id] = acc
        return acc

    for t in forest.trees:
        walk(t)
    return sums


# --------------------------------------------------------------------------
# Canonical encoding
# --------------------------------------------------------------------------


def _tree_canonical(node: DecoratedTree, Q: InnerProduct) -> str:
    w = inner(Q, node.decoration, node.decoration)
    kids = sorted(_tree_canonical(c, Q) for c in node.children)
    return f"({w}|{','.join(kids)})"


def canonical(forest: DecoratedForest, Q: InnerProduct) -> bytes:
    """Order-independent byte encoding of a forest.

    Vertices are keyed by their weight q_v = Q(d(v), d(v)) and the multiset
    of child encodings; tree order and sibling order never matter, and
    neither do the concrete basis indices of the decorations.  Two properly
    decorated forests encode equally exactly when they carry the same
    Gram data, which is what every downstream value depends on.
    """
    keys = sorted(_tree_canonical(t, Q) for t in forest.trees)
    return ";".join(keys).encode("utf-8")


# --------------------------------------------------------------------------
# Text grammar
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\(|\)|\[[^\[\]]*\]|[^\s()\[\]]+")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    for m in _TOKEN_RE.finditer(text):
        between = text[pos : m.start()]
        if between.strip():
            raise ParseError(f"unexpected character {between.strip()[0]!r}")
        tokens.append(m.group())
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}")
    return tokens


def _parse_fraction(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"invalid rational {tok!r}") from exc


def _parse_q_matrix(text: str) -> InnerProduct:
    rows = []
    for row_text in text.split(";"):
        # Entries may be separated by commas, whitespace, or both.
        entries = row_text.replace(",", " ").split()
        if not entries:
            raise ParseError("empty row in Q matrix")
        rows.append([_parse_fraction(e) for e in entries])
    try:
        Q = InnerProduct.from_matrix(rows)
    except ValueError as exc:
        raise ParseError(f"bad Q matrix: {exc}") from exc
    if not Q.is_positive_definite():
        raise ParseError("Q matrix must be positive definite")
    return Q


class _Parser:
    def __init__(self, tokens: list[str], explicit_Q: Optional[InnerProduct]):
        self.tokens = tokens
        self.k = 0
        self.explicit_Q = explicit_Q
        self.next_id = 0
        self.weights: dict[int, Fraction] = {}

    def peek(self) -> Optional[str]:
        return self.tokens[self.k] if self.k < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.k += 1
        return tok

    def parse_decoration(self) -> LinearForm:
        tok = self.take()
        if self.explicit_Q is not None:
            if not tok.startswith("["):
                raise ParseError(
                    f"expected vector literal in explicit mode, got {tok!r}"
                )
            body = tok[1:-1].strip()
            if not body:
                raise ParseError("empty vector literal")
            coords = [_parse_fraction(p.strip()) for p in body.split(",")]
            dim = len(self.explicit_Q.indices)
            if len(coords) != dim:
                raise ParseError(
                    f"vector has {len(coords)} entries; Q is {dim}x{dim}"
                )
            lf = LinearForm.from_coeffs(
                {i: c for i, c in enumerate(coords)}
            )
            if lf.is_zero():
                raise NotProperlyDecorated("zero decoration vector")
            return lf
        if tok.startswith("["):
            raise ParseError("vector literal requires a leading Q= line")
        w = _parse_fraction(tok)
        if w <= 0:
            raise NonPositiveWeight(f"vertex weight {w} must be positive")
        vid = self.next_id
        self.weights[vid] = w
        return basis(vid)

    def parse_tree(self) -> DecoratedTree:
        tok = self.take()
        if tok != "(":
            raise ParseError(f"expected '(', got {tok!r}")
        deco = self.parse_decoration()
        vid = self.next_id
        self.next_id += 1
        children = []
        while self.peek() == "(":
            children.append(self.parse_tree())
        closing = self.take()
        if closing != ")":
            raise ParseError(f"expected ')', got {closing!r}")
        return DecoratedTree(vid, deco, tuple(children))


def parse_forest(text: str) -> tuple[DecoratedForest, InnerProduct]:
    """Parse the forest grammar, returning the forest and its inner product.

    Canonical mode::

        forest := "1" | tree+        tree := "(" weight tree* ")"

    with positive rational weights; each vertex receives a fresh orthogonal
    direction whose self-pairing is its weight.  Explicit mode starts with a
    line ``Q=<matrix>`` (rows semicolon-separated, entries comma-separated)
    and then uses vector literals ``[c1,...,cn]`` as decorations; the result
    must be properly decorated.
    """
    stripped = text.lstrip()
    explicit_Q: Optional[InnerProduct] = None
    body = text
    if stripped.startswith("Q="):
        first, _, rest = stripped.partition("\n")
        explicit_Q = _parse_q_matrix(first[2:])
        body = rest
    tokens = _tokenize(body)
    if not tokens:
        raise ParseError("empty input")
    if tokens == ["1"]:
        if explicit_Q is not None:
            return EMPTY_FOREST, explicit_Q
        return EMPTY_FOREST, InnerProduct.diagonal({})
    parser = _Parser(tokens, explicit_Q)
    trees = []
    while parser.peek() is not None:
        trees.append(parser.parse_tree())
    forest = DecoratedForest(tuple(trees))
    if explicit_Q is not None:
        Q = explicit_Q
        if not check_properly_decorated(forest, Q):
            raise NotProperlyDecorated(
                "explicit decorations must be nonzero and pairwise Q-orthogonal"
            )
        for node in iter_vertices(forest):
            q = inner(Q, node.decoration, node.decoration)
            if q <= 0:
                raise NonPositiveWeight(
                    f"decoration of vertex {node.root_id} has weight {q}"
                )
    else:
        Q = InnerProduct.diagonal(parser.weights)
    return forest, Q


def _weight_of(node: DecoratedTree, Q: InnerProduct) -> Fraction:
    return inner(Q, node.decoration, node.decoration)


def _is_canonical_mode(forest: DecoratedForest, Q: InnerProduct) -> bool:
    if not Q.is_diagonal():
        return False
    seen = set()
    for node in iter_vertices(forest):
        items = node.decoration.items
        if len(items) != 1 or items[0][1] != 1 or items[0][0] in seen:
            return False
        seen.add(items[0][0])
    return True


def serialize(forest: DecoratedForest, Q: InnerProduct) -> str:
    """Render a forest in the grammar, trees and siblings in canonical order."""
    if _is_canonical_mode(forest, Q):

        def render(node: DecoratedTree) -> str:
            kids = sorted(node.children, key=lambda c: _tree_canonical(c, Q))
            inner_txt = " ".join(render(c) for c in kids)
            w = _weight_of(node, Q)
            return f"({w} {inner_txt})" if inner_txt else f"({w})"

        if forest.is_empty():
            return "1"
        tops = sorted(forest.trees, key=lambda t: _tree_canonical(t, Q))
        return " ".join(render(t) for t in tops)

    # Explicit mode: emit the dense Q matrix over its active set, then the
    # decorations as coordinate vectors in that index order.
    idx = list(Q.indices)
    rows = ";".join(
        ",".join(str(Q.entry(i, j)) for j in idx) for i in idx
    )

    def render_explicit(node: DecoratedTree) -> str:
        vec = "[" + ",".join(str(node.decoration.coeff(i)) for i in idx) + "]"
        kids = sorted(node.children, key=lambda c: _tree_canonical(c, Q))
        inner_txt = " ".join(render_explicit(c) for c in kids)
        return f"({vec} {inner_txt})" if inner_txt else f"({vec})"

    body = (
        "1"
        if forest.is_empty()
        else " ".join(
            render_explicit(t)
            for t in sorted(forest.trees, key=lambda t: _tree_canonical(t, Q))
        )
    )
    return f"Q={rows}\n{body}"


# --------------------------------------------------------------------------
# Shape catalog
# --------------------------------------------------------------------------
#
# A tree shape is a sorted tuple of child shapes; a forest shape is a sorted
# tuple of tree shapes.  Nested tuples compare lexicographically, which gives
# a total order, so "sorted" is canonical.


Shape = tuple  # recursive: tuple of child Shapes


@lru_cache(maxsize=None)
def tree_shapes(n: int) -> tuple[Shape, ...]:
    """All rooted-tree shapes with exactly n vertices, canonically sorted."""
    if n < 1:
        return ()
    return tuple(sorted(forest_shapes(n - 1)))


@lru_cache(maxsize=None)
def forest_shapes(n: int) -> tuple[Shape, ...]:
    """All forest shapes (multisets of tree shapes) with exactly n vertices."""
    if n == 0:
        return ((),)
    # Trees of every size up to n, in a fixed global order; choose a
    # nondecreasing sequence whose sizes sum to n.
    pool: list[tuple[int, Shape]] = []
    for s in range(1, n + 1):
        pool.extend((s, t) for t in tree_shapes(s))
    results: list[Shape] = []

    def rec(remaining: int, start: int, acc: list[Shape]) -> None:
        if remaining == 0:
            results.append(tuple(sorted(acc)))
            return
        for k in range(start, len(pool)):
            size, shape = pool[k]
            if size > remaining:
                continue
            acc.append(shape)
            rec(remaining - size, k, acc)
            acc.pop()

    rec(n, 0, [])
    return tuple(sorted(set(results)))


def shape_size(shape: Shape) -> int:
    """Vertex count of a forest shape."""
    return sum(1 + shape_size(child) for child in shape)


def from_shape(
    shape: Shape,
    weights: Sequence[Rational],
    id_start: int = 0,
) -> tuple[DecoratedForest, InnerProduct]:
    """Instantiate a forest shape with canonical-mode decorations.

    ``weights`` are consumed in preorder (root before children, trees left to
    right); ids are assigned sequentially from ``id_start``.
    """
    n = shape_size(shape)
    if len(weights) != n:
        raise ValueError(f"shape needs {n} weights, got {len(weights)}")
    weight_iter = iter([Fraction(w) for w in weights])
    counter = [id_start]
    table: dict[int, Fraction] = {}

    def build(tree_shape: Shape) -> DecoratedTree:
        vid = counter[0]
        counter[0] += 1
        w = next(weight_iter)
        if w <= 0:
            raise NonPositiveWeight(f"vertex weight {w} must be positive")
        table[vid] = w
        kids = tuple(build(c) for c in tree_shape)
        return DecoratedTree(vid, basis(vid), kids)

    trees_ = tuple(build(t) for t in shape)
    return DecoratedForest(trees_), InnerProduct.diagonal(table)
