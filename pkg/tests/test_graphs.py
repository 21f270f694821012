import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvan.graphs import (
    FEATURE_NAMES,
    N_FEATURES,
    GraphConstructionError,
    RetweetRecord,
    UserFeatures,
    build_propagation_graph,
    impute_user_features,
    parse_builder,
    truncate_by_deadline,
)


def records(parents, tweet_id="t1"):
    return [
        RetweetRecord(tweet_id=tweet_id, user_id=f"u{i}", order=i, parent_user_id=p)
        for i, p in enumerate(parents)
    ]


def features_for(n, start=0.0):
    return {
        f"u{i}": UserFeatures(values=np.full(N_FEATURES, start + i), missing=False)
        for i in range(n)
    }


def neighbor_sets(graph):
    return [set(map(int, nbrs)) for nbrs in graph.neighbors]


class TestBuilderParsing:
    def test_chain_default_span(self):
        assert parse_builder("chain") == ("chain", 1)

    def test_chain_explicit_span(self):
        assert parse_builder("chain(3)") == ("chain", 3)

    def test_parent_tree(self):
        assert parse_builder("parent_tree") == ("parent_tree", 0)

    def test_unknown_builder_rejected(self):
        with pytest.raises(GraphConstructionError, match="builder"):
            parse_builder("ring")

    def test_zero_span_rejected(self):
        with pytest.raises(GraphConstructionError):
            parse_builder("chain(0)")


class TestConstruction:
    def test_single_retweeter_self_loop_only(self):
        g = build_propagation_graph(records([None]), "chain(1)", features_for(1))
        assert neighbor_sets(g) == [{0}]

    def test_chain_of_three(self):
        g = build_propagation_graph(records([None] * 3), "chain(1)", features_for(3))
        assert neighbor_sets(g) == [{0, 1}, {0, 1, 2}, {1, 2}]

    def test_chain_span_two(self):
        g = build_propagation_graph(records([None] * 4), "chain(2)", features_for(4))
        assert neighbor_sets(g) == [{0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2, 3}, {1, 2, 3}]

    def test_parent_tree_star(self):
        g = build_propagation_graph(
            records([None, "u0", "u0"]), "parent_tree", features_for(3)
        )
        assert neighbor_sets(g) == [{0, 1, 2}, {0, 1}, {0, 2}]

    def test_parentless_falls_back_to_chain(self):
        g = build_propagation_graph(
            records([None, None, "u0"]), "parent_tree", features_for(3)
        )
        # u1 has no parent: linked to predecessor u0; u2 links to its parent u0
        assert neighbor_sets(g) == [{0, 1, 2}, {0, 1}, {0, 2}]

    def test_nodes_sorted_by_order(self):
        recs = [
            RetweetRecord("t1", "late", order=5),
            RetweetRecord("t1", "early", order=1),
        ]
        g = build_propagation_graph(recs, "chain(1)", {})
        assert g.user_ids == ["early", "late"]
        np.testing.assert_array_equal(g.orders, [1, 5])

    def test_empty_records_rejected(self):
        with pytest.raises(GraphConstructionError, match="zero"):
            build_propagation_graph([], "chain(1)", {})

    def test_duplicate_orders_rejected(self):
        recs = [RetweetRecord("t1", "a", 0), RetweetRecord("t1", "b", 0)]
        with pytest.raises(GraphConstructionError, match="duplicate"):
            build_propagation_graph(recs, "chain(1)", {})

    def test_dangling_parent_named_in_error(self):
        recs = records([None, "ghost"])
        with pytest.raises(GraphConstructionError, match="ghost"):
            build_propagation_graph(recs, "parent_tree", features_for(2))

    def test_unknown_user_marked_missing(self):
        g = build_propagation_graph(records([None, None]), "chain(1)", features_for(1))
        assert not g.missing[0]
        assert g.missing[1]

    def test_validate_catches_missing_self_loop(self):
        g = build_propagation_graph(records([None, None]), "chain(1)", features_for(2))
        g.neighbors[0] = np.array([1])
        with pytest.raises(GraphConstructionError, match="self-loop"):
            g.validate()


class TestImputation:
    def graph_with_missing(self, donor_values):
        n = len(donor_values) + 1
        feats = {f"u{i}": UserFeatures(np.full(N_FEATURES, v), False)
                 for i, v in enumerate(donor_values)}
        return build_propagation_graph(records([None] * n), "chain(1)", feats)

    def test_single_donor(self):
        g = impute_user_features(self.graph_with_missing([2.0]))
        np.testing.assert_array_equal(g.features[1], np.full(N_FEATURES, 2.0))

    def test_fractional_mean_of_binaries(self):
        g = impute_user_features(self.graph_with_missing([0.0, 1.0]))
        np.testing.assert_array_equal(g.features[2], np.full(N_FEATURES, 0.5))

    def test_all_missing_falls_back_to_zeros(self, caplog):
        g = build_propagation_graph(records([None, None]), "chain(1)", {})
        with caplog.at_level(logging.WARNING, logger="mvan.graphs"):
            out = impute_user_features(g)
        np.testing.assert_array_equal(out.features, np.zeros((2, N_FEATURES)))
        assert any("missing" in r.message for r in caplog.records)

    def test_donors_unaltered_and_flags_preserved(self):
        g0 = self.graph_with_missing([3.0, 5.0])
        g = impute_user_features(g0)
        np.testing.assert_array_equal(g.features[0], g0.features[0])
        np.testing.assert_array_equal(g.features[1], g0.features[1])
        np.testing.assert_array_equal(g.missing, [False, False, True])

    def test_no_missing_is_identity(self):
        g0 = build_propagation_graph(records([None] * 2), "chain(1)", features_for(2))
        assert impute_user_features(g0) is g0


class TestTruncation:
    def chain_graph(self, n):
        return build_propagation_graph(records([None] * n), "chain(1)", features_for(n))

    def test_keep_all_is_identity(self):
        g = self.chain_graph(4)
        assert truncate_by_deadline(g, 1.0) is g

    def test_ceil_rule(self):
        g = truncate_by_deadline(self.chain_graph(10), 0.25)
        assert g.n_nodes == 3
        assert g.user_ids == ["u0", "u1", "u2"]

    def test_prefix_chain_structure(self):
        g = truncate_by_deadline(self.chain_graph(6), 0.5)
        assert neighbor_sets(g) == [{0, 1}, {0, 1, 2}, {1, 2}]

    def test_parent_tree_rebuild(self):
        g0 = build_propagation_graph(
            records([None, "u0", "u1", "u0"]), "parent_tree", features_for(4)
        )
        g = truncate_by_deadline(g0, 0.75)  # keeps u0,u1,u2
        assert g.n_nodes == 3
        assert neighbor_sets(g) == [{0, 1}, {0, 1, 2}, {1, 2}]

    def test_invalid_fraction_rejected(self):
        with pytest.raises(ValueError):
            truncate_by_deadline(self.chain_graph(3), 0.0)
        with pytest.raises(ValueError):
            truncate_by_deadline(self.chain_graph(3), 1.5)

    @given(
        st.integers(min_value=1, max_value=12),
        st.floats(min_value=0.05, max_value=1.0),
        st.sampled_from(["chain(1)", "chain(2)", "parent_tree"]),
        st.integers(min_value=0, max_value=2**16),
    )
    def test_truncation_preserves_invariants(self, n, frac, builder, seed):
        rng = np.random.default_rng(seed)
        parents = [None] + [f"u{int(rng.integers(0, i))}" for i in range(1, n)]
        g0 = build_propagation_graph(records(parents), builder, features_for(n))
        g = truncate_by_deadline(g0, frac)
        g.validate()  # every node keeps its self-loop, indices in range
        assert g.n_nodes == int(np.ceil(frac * n))
        assert g.user_ids == g0.user_ids[: g.n_nodes]
        assert g.builder == g0.builder


class TestUserFeatures:
    def test_null_field_marks_whole_record_missing(self):
        fields = {name: 1 for name in FEATURE_NAMES}
        fields["user_verified"] = None
        uf = UserFeatures.from_mapping(fields)
        assert uf.missing
        np.testing.assert_array_equal(uf.values, np.zeros(N_FEATURES))

    def test_absent_field_marks_missing(self):
        fields = {name: 1 for name in FEATURE_NAMES if name != "user_protected"}
        assert UserFeatures.from_mapping(fields).missing

    def test_complete_record_round_trips(self):
        fields = {name: i for i, name in enumerate(FEATURE_NAMES)}
        uf = UserFeatures.from_mapping(fields)
        assert not uf.missing
        assert uf.to_mapping() == fields

    def test_missing_record_serializes_as_nulls(self):
        assert UserFeatures.absent().to_mapping() == {n: None for n in FEATURE_NAMES}
