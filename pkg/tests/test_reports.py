"""Artifact-writer tests: fixed-precision formatting, exact round-trips, and
byte-identical re-export."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvan.metrics import aggregate_runs, compute_metrics
from mvan.reports import (
    SCHEMA_VERSION,
    explanation_record,
    export_report,
    format_float,
    read_metrics_json,
    to_json,
    write_aggregate_csv,
    write_curve_csv,
    write_edge_coeffs_csv,
    write_explanations_jsonl,
    write_history_csv,
    write_metrics_json,
    write_top_users_csv,
)
from mvan.train import EpochStats

from test_explain import make_expl, make_user


class TestFormatting:
    def test_six_decimal_places(self):
        assert format_float(0.5) == "0.500000"
        assert format_float(1 / 3) == "0.333333"
        assert format_float(2) == "2.000000"

    def test_json_floats_use_fixed_precision(self):
        assert to_json({"a": 0.1, "b": [1.0, 2]}) == '{"a": 0.100000, "b": [1.000000, 2]}'

    def test_json_bool_is_not_an_int(self):
        assert to_json({"flag": True, "n": 1}) == '{"flag": true, "n": 1}'

    def test_json_numpy_scalars_and_arrays(self):
        out = to_json({"v": np.float64(0.25), "a": np.array([1, 2])})
        assert out == '{"v": 0.250000, "a": [1, 2]}'

    def test_json_none_and_strings(self):
        assert to_json({"x": None, "s": "héllo"}) == '{"x": null, "s": "héllo"}'

    def test_json_rejects_unknown_types(self):
        with pytest.raises(TypeError):
            to_json(object())


class TestMetricsJson:
    def test_round_trip_is_exact(self, tmp_path):
        y_true = [1, 1, 1, 0, 0, 0, 1, 0]
        y_pred = [1, 0, 1, 0, 1, 0, 1, 0]
        metrics = compute_metrics(y_true, y_pred)
        path = tmp_path / "metrics.json"
        write_metrics_json(metrics, path)
        back = read_metrics_json(path)
        assert back.accuracy == metrics.accuracy
        assert back.precision == metrics.precision
        assert back.recall == metrics.recall
        assert back.f1 == metrics.f1
        assert back.confusion == metrics.confusion
        assert back.degenerate == metrics.degenerate

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_round_trip_is_exact_for_any_confusion(self, tmp_path_factory, pairs):
        y_true = [a for a, _ in pairs]
        y_pred = [b for _, b in pairs]
        metrics = compute_metrics(y_true, y_pred)
        path = tmp_path_factory.mktemp("m") / "metrics.json"
        write_metrics_json(metrics, path)
        assert read_metrics_json(path) == metrics

    def test_payload_shape(self, tmp_path):
        metrics = compute_metrics([1, 0], [1, 0])
        path = tmp_path / "metrics.json"
        write_metrics_json(metrics, path)
        payload = json.loads(path.read_text())
        assert payload["schema_version"] == SCHEMA_VERSION
        assert payload["kind"] == "metrics"
        assert payload["n_examples"] == 2
        assert payload["confusion"] == {"tp": 1, "tn": 1, "fp": 0, "fn": 0}
        assert payload["degenerate"] is False

    def test_wrong_kind_rejected(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"kind": "curve"}')
        with pytest.raises(ValueError, match="not a metrics file"):
            read_metrics_json(path)


class TestByteIdenticalReexport:
    def test_same_inputs_same_bytes(self, tmp_path):
        metrics = compute_metrics([1, 0, 1], [1, 1, 1])
        aggs = {"accuracy": aggregate_runs([0.8, 0.9, 0.85])}
        expls = [
            make_expl([0.25, 0.75], users=[make_user("u1", 0, 0.4)]),
            make_expl([1.0]),
        ]
        curve = [(1.0, 0.9), (0.1, 0.7)]
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        for d in (a_dir, b_dir):
            export_report(d, metrics=metrics, aggregates=aggs, explanations=expls, curve=curve)
        files = sorted(p.name for p in a_dir.iterdir())
        assert files == ["aggregate.csv", "curve.csv", "explanations.jsonl", "metrics.json"]
        for name in files:
            assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()

    def test_no_carriage_returns(self, tmp_path):
        write_history_csv([EpochStats(0, 0.5, 0.6, 0.7)], tmp_path / "h.csv")
        assert b"\r" not in (tmp_path / "h.csv").read_bytes()


class TestCsvWriters:
    def test_aggregate_header_and_rows(self, tmp_path):
        aggs = {
            "accuracy": aggregate_runs([0.9, 1.0]),
            "f1": aggregate_runs([0.8, 0.8]),
        }
        path = tmp_path / "aggregate.csv"
        write_aggregate_csv(aggs, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "metric,n_runs,mean,std,hw90,hw95,hw98"
        assert len(lines) == 3
        acc = lines[1].split(",")
        assert acc[0] == "accuracy"
        assert acc[1] == "2"
        assert acc[2] == "0.950000"

    def test_curve_sorted_by_fraction(self, tmp_path):
        path = tmp_path / "curve.csv"
        write_curve_csv([(0.5, 0.8), (0.1, 0.6), (1.0, 0.9)], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "fraction,accuracy"
        assert [l.split(",")[0] for l in lines[1:]] == ["0.100000", "0.500000", "1.000000"]

    def test_history_rows(self, tmp_path):
        path = tmp_path / "history.csv"
        write_history_csv(
            [EpochStats(0, 0.69, 0.5, 0.5), EpochStats(1, 0.55, 0.75, 0.5)], path
        )
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,train_acc,val_acc"
        assert lines[1] == "0,0.690000,0.500000,0.500000"
        assert lines[2] == "1,0.550000,0.750000,0.500000"

    def test_edge_coefficients_rows(self, tmp_path):
        path = tmp_path / "edges.csv"
        write_edge_coeffs_csv([("t1", 0, 1, "ua", "ub", 0.125)], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "tweet_id,layer,head,src_user,dst_user,coeff"
        assert lines[1] == "t1,0,1,ua,ub,0.125000"

    def test_top_users_skips_userless_explanations(self, tmp_path):
        expls = [
            make_expl([1.0], tid="t1"),
            make_expl(
                [1.0],
                tid="t2",
                users=[make_user("u2", 1, 0.3), make_user("u1", 0, 0.7)],
            ),
        ]
        path = tmp_path / "top.csv"
        write_top_users_csv(expls, 2, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("tweet_id,rank,user_id,order,received,")
        assert len(lines) == 3
        assert lines[1].startswith("t2,1,u1,0,0.700000")
        assert lines[2].startswith("t2,2,u2,1,0.300000")


class TestExplanationsJsonl:
    def test_one_record_per_line(self, tmp_path):
        expls = [make_expl([1.0], tid="t1"), make_expl([0.5, 0.5], tid="t2")]
        path = tmp_path / "expl.jsonl"
        write_explanations_jsonl(expls, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        recs = [json.loads(l) for l in lines]
        assert [r["tweet_id"] for r in recs] == ["t1", "t2"]

    def test_empty_corpus_writes_empty_file(self, tmp_path):
        path = tmp_path / "expl.jsonl"
        write_explanations_jsonl([], path)
        assert path.read_bytes() == b""

    def test_record_top_user_and_fields(self):
        users = [make_user("low", 0, 0.1), make_user("high", 1, 0.9)]
        rec = explanation_record(make_expl([0.5, 0.5], users=users))
        assert rec["schema_version"] == SCHEMA_VERSION
        assert rec["top_user"]["user_id"] == "high"
        assert len(rec["users"]) == 2
        assert rec["word_weights"] == [0.5, 0.5]

    def test_record_without_users_has_null_top_user(self):
        rec = explanation_record(make_expl([1.0]))
        assert rec["top_user"] is None
        assert rec["users"] == []
