import random
from fractions import Fraction

import pytest

from forestren import (
    DecoratedForest,
    EMPTY_FOREST,
    InnerProduct,
    LocalityViolation,
    NonPositiveWeight,
    NotProperlyDecorated,
    ParseError,
    basis,
    canonical,
    concat,
    decompose,
    degree,
    forest_shapes,
    form,
    from_shape,
    graft,
    parse_forest,
    serialize,
    subtree_sums,
    tree_shapes,
)
from forestren.forest import (
    Empty,
    Grafted,
    Product,
    forest_of,
    shape_size,
    tree,
    vertex_ids,
)

import helpers


class TestParsing:
    def test_empty_forest(self):
        f, Q = parse_forest("1")
        assert f.is_empty()
        assert degree(f) == 0

    def test_single_vertex(self):
        f, Q = parse_forest("(3/2)")
        assert degree(f) == 1
        (vid,) = vertex_ids(f)
        assert Q.entry(vid, vid) == Fraction(3, 2)

    def test_ladder(self):
        f, Q = parse_forest("(1 (2))")
        sums = subtree_sums(f)
        assert sums[0] == form({0: 1, 1: 1})
        assert sums[1] == basis(1)
        assert Q.entry(0, 0) == 1 and Q.entry(1, 1) == 2

    def test_multi_tree_forest(self):
        f, _ = parse_forest("(1) (2 (3))")
        assert len(f.trees) == 2
        assert degree(f) == 3

    @pytest.mark.parametrize(
        "text",
        ["(1", "(1))", "(", ")", "(x)", "(1 2)", "[1,0]", ""],
    )
    def test_malformed_input(self, text):
        with pytest.raises(ParseError):
            parse_forest(text)

    @pytest.mark.parametrize("text", ["(0)", "(-1)", "(1 (-2/3))"])
    def test_weights_must_be_positive(self, text):
        with pytest.raises(NonPositiveWeight):
            parse_forest(text)


class TestExplicitMode:
    def test_parse_and_weights(self):
        f, Q = parse_forest("Q=1,0;0,2\n([1,0] ([0,1]))")
        assert Q.entry(1, 1) == 2
        assert not f.is_empty()

    def test_whitespace_matrix_rows(self):
        f1, Q1 = parse_forest("Q=1 0; 0 2\n([1,0] ([0,1]))")
        f2, Q2 = parse_forest("Q=1,0;0,2\n([1,0] ([0,1]))")
        assert canonical(f1, Q1) == canonical(f2, Q2)

    def test_non_orthogonal_rejected(self):
        with pytest.raises(NotProperlyDecorated):
            parse_forest("Q=1,0;0,1\n([1,0] ([1,1]))")

    def test_zero_vector_rejected(self):
        with pytest.raises(NotProperlyDecorated):
            parse_forest("Q=1,0;0,1\n([0,0] ([0,1]))")

    def test_wrong_vector_length(self):
        with pytest.raises(ParseError):
            parse_forest("Q=1,0;0,1\n([1,0,0])")

    def test_asymmetric_matrix(self):
        with pytest.raises(ParseError):
            parse_forest("Q=1,2;3,1\n([1,0] ([0,1]))")

    def test_non_positive_definite_matrix(self):
        with pytest.raises(ParseError):
            parse_forest("Q=1,2;2,1\n([1,0] ([0,1]))")

    def test_vector_needs_q_line(self):
        with pytest.raises(ParseError):
            parse_forest("([1,0])")

    def test_roundtrip_non_basis_decorations(self):
        # orthogonal but not axis-aligned: e0+e1 and e0-e1 under Q=I
        text = "Q=1,0;0,1\n([1,1]) ([1,-1])"
        f, Q = parse_forest(text)
        out = serialize(f, Q)
        f2, Q2 = parse_forest(out)
        assert canonical(f, Q) == canonical(f2, Q2)


class TestSerialize:
    def test_golden(self):
        f, Q = parse_forest("(1 (1))")
        assert serialize(f, Q) == "(1 (1))"

    def test_sibling_order_is_canonical(self):
        a = serialize(*parse_forest("(1 (2) (3))"))
        b = serialize(*parse_forest("(1 (3) (2))"))
        assert a == b

    def test_tree_order_is_canonical(self):
        a = serialize(*parse_forest("(5) (2 (7))"))
        b = serialize(*parse_forest("(2 (7)) (5)"))
        assert a == b

    def test_empty(self):
        assert serialize(EMPTY_FOREST, InnerProduct.diagonal({})) == "1"

    def test_roundtrip_random(self):
        rng = random.Random(1)
        for _ in range(30):
            f, Q = helpers.random_forest(rng, 6, allow_fractions=True)
            text = serialize(f, Q)
            f2, Q2 = parse_forest(text)
            assert serialize(f2, Q2) == text
            assert canonical(f, Q) == canonical(f2, Q2)


class TestCanonical:
    def test_invariant_under_vertex_relabeling(self):
        w = [Fraction(2), Fraction(3)]
        f1, Q1 = from_shape(helpers.ladder_shape(2), w)
        f2, Q2 = from_shape(helpers.ladder_shape(2), w, id_start=17)
        assert canonical(f1, Q1) == canonical(f2, Q2)

    def test_sensitive_to_weights(self):
        f1, Q1 = from_shape(helpers.ladder_shape(2), [1, 2])
        f2, Q2 = from_shape(helpers.ladder_shape(2), [2, 1])
        assert canonical(f1, Q1) != canonical(f2, Q2)

    def test_sensitive_to_shape(self):
        f1, Q1 = from_shape(helpers.ladder_shape(3), [1, 1, 1])
        f2, Q2 = from_shape(helpers.corolla_shape(3), [1, 1, 1])
        assert canonical(f1, Q1) != canonical(f2, Q2)


class TestStructure:
    def test_decompose_cases(self):
        assert isinstance(decompose(EMPTY_FOREST), Empty)

        f, _ = parse_forest("(1 (2))")
        d = decompose(f)
        assert isinstance(d, Grafted)
        assert d.omega == basis(0)
        assert degree(d.inner) == 1

        f, _ = parse_forest("(1) (2)")
        d = decompose(f)
        assert isinstance(d, Product)
        assert len(d.factors) == 2

    def test_graft_extends_degree(self):
        f, Q0 = parse_forest("(1) (2)")
        Q = helpers.merge_diagonal(Q0, InnerProduct.diagonal({5: Fraction(3)}))
        t = graft(basis(5), f, Q)
        assert t.vertex_count() == 3
        assert t.decoration == basis(5)
        grafted = forest_of(t)
        assert subtree_sums(grafted)[t.root_id] == form({0: 1, 1: 1, 5: 1})

    def test_graft_locality_guard(self):
        f, Q = parse_forest("(1)")
        with pytest.raises(LocalityViolation):
            graft(basis(0), f, Q)  # same direction as the existing vertex

    def test_graft_id_collision(self):
        f, Q0 = parse_forest("(1)")
        Q = helpers.merge_diagonal(Q0, InnerProduct.diagonal({9: Fraction(1)}))
        with pytest.raises(ValueError):
            graft(basis(9), f, Q, root_id=0)

    def test_concat_additive_degree(self):
        rng = random.Random(2)
        f1, f2, Q, fc = helpers.independent_pair(rng, 3)
        assert degree(fc) == degree(f1) + degree(f2)

    def test_concat_locality_guard(self):
        f1 = forest_of(tree(0, basis(0)))
        f2 = forest_of(tree(1, basis(0)))
        with pytest.raises(LocalityViolation):
            concat(f1, f2, InnerProduct.identity(1))

    def test_concat_id_collision(self):
        f1 = forest_of(tree(0, basis(0)))
        f2 = forest_of(tree(0, basis(1)))
        with pytest.raises(ValueError):
            concat(f1, f2, InnerProduct.identity(2))

    def test_subtree_sums_corolla(self):
        f, _ = parse_forest("(1 (2) (3))")
        sums = subtree_sums(f)
        assert sums[0] == form({0: 1, 1: 1, 2: 1})
        assert sums[1] == basis(1)
        assert sums[2] == basis(2)


class TestShapeCatalog:
    def test_tree_shape_counts(self):
        # unlabeled rooted trees: 1, 1, 2, 4, 9, 20
        assert [len(tree_shapes(n)) for n in range(1, 7)] == [1, 1, 2, 4, 9, 20]

    def test_forest_shape_counts(self):
        # unlabeled rooted forests: 1, 2, 4, 9, 20, 48, 115, 286
        counts = [len(forest_shapes(n)) for n in range(1, 9)]
        assert counts == [1, 2, 4, 9, 20, 48, 115, 286]

    def test_shapes_are_distinct_forests(self):
        seen = set()
        for shape in forest_shapes(5):
            f, Q = from_shape(shape, [1] * 5)
            key = canonical(f, Q)
            assert key not in seen
            seen.add(key)

    def test_from_shape_preorder_weights(self):
        f, Q = from_shape(helpers.ladder_shape(3), [5, 7, 11])
        # ids follow preorder: root 0 weight 5, then 1, then 2
        assert [Q.entry(i, i) for i in range(3)] == [5, 7, 11]

    def test_from_shape_weight_count_mismatch(self):
        with pytest.raises(ValueError):
            from_shape(helpers.ladder_shape(2), [1, 2, 3])

    def test_from_shape_rejects_bad_weight(self):
        with pytest.raises(NonPositiveWeight):
            from_shape(helpers.ladder_shape(2), [1, 0])
