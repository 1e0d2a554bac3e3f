"""File formats: embeddings, corpora, CSVs, curve exports, reports."""

import json
import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mauvelib import (
    DataFormatError,
    EmbeddingSet,
    LogProbRecord,
    ParameterError,
    ReportDocument,
    TokenCorpus,
    divergence_curve,
    read_embeddings,
    read_logprob_csv,
    read_ratings_csv,
    read_report,
    read_token_corpus,
    renormalize,
    write_curve_csv,
    write_curve_svg,
    write_embeddings,
    write_report,
    write_token_corpus,
)
from mauvelib.formats import guess_embedding_format, read_metric_columns, write_logprob_csv


class TestBinaryEmbeddings:
    def test_round_trip_is_exact_in_float32(self, tmp_path):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(7, 5)).astype(np.float32).astype(np.float64)
        path = tmp_path / "emb.bin"
        write_embeddings(EmbeddingSet(data), path)
        loaded = read_embeddings(path, "binary")
        assert_array_equal(loaded.data, data)

    def test_known_payload(self, tmp_path):
        path = tmp_path / "emb.bin"
        write_embeddings(EmbeddingSet(np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])), path)
        loaded = read_embeddings(path, "binary")
        assert loaded.n == 2 and loaded.dim == 3
        assert_array_equal(loaded.data, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "emb.bin"
        write_embeddings(EmbeddingSet(np.ones((2, 2))), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(DataFormatError, match="magic"):
            read_embeddings(path, "binary")

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "emb.bin"
        write_embeddings(EmbeddingSet(np.ones((3, 3))), path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(DataFormatError, match="payload"):
            read_embeddings(path, "binary")

    def test_unknown_version_rejected(self, tmp_path):
        path = tmp_path / "emb.bin"
        write_embeddings(EmbeddingSet(np.ones((1, 1))), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(DataFormatError, match="version"):
            read_embeddings(path, "binary")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError, match="no such file"):
            read_embeddings(tmp_path / "absent.bin", "binary")


class TestTextEmbeddings:
    def test_csv_parse(self, tmp_path):
        path = tmp_path / "emb.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        loaded = read_embeddings(path, "csv")
        assert_array_equal(loaded.data, [[1.0, 2.0], [3.0, 4.0]])

    def test_csv_ragged_row_names_line(self, tmp_path):
        path = tmp_path / "emb.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_embeddings(path, "csv")

    def test_csv_non_numeric_names_line(self, tmp_path):
        path = tmp_path / "emb.csv"
        path.write_text("1.0,2.0\n3.0,zebra\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_embeddings(path, "csv")

    def test_csv_rejects_nan_with_row_index(self, tmp_path):
        path = tmp_path / "emb.csv"
        path.write_text("1.0,2.0\nnan,4.0\n")
        with pytest.raises(DataFormatError, match="row 1"):
            read_embeddings(path, "csv")

    def test_jsonl_parse(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text("[1.5, 2.5]\n[3.5, 4.5]\n")
        loaded = read_embeddings(path, "jsonl")
        assert_array_equal(loaded.data, [[1.5, 2.5], [3.5, 4.5]])

    def test_jsonl_ragged_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text("[1.5, 2.5]\n[3.5]\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_embeddings(path, "jsonl")

    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "emb.bin"
        write_embeddings(EmbeddingSet(np.ones((1, 1))), path)
        with pytest.raises(ParameterError):
            read_embeddings(path, "parquet")

    def test_format_guessing(self):
        assert guess_embedding_format("x.csv") == "csv"
        assert guess_embedding_format("x.jsonl") == "jsonl"
        assert guess_embedding_format("x.bin") == "binary"
        assert guess_embedding_format("x") == "binary"


class TestTokenCorpusFile:
    def test_round_trip(self, tmp_path):
        corpus = TokenCorpus(([1, 2, 3], [4, 5]))
        path = tmp_path / "corpus.jsonl"
        write_token_corpus(corpus, path)
        loaded = read_token_corpus(path)
        assert len(loaded) == 2
        assert_array_equal(loaded.sequences[0], [1, 2, 3])
        assert_array_equal(loaded.sequences[1], [4, 5])

    def test_bad_json_names_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("[1, 2]\nnot json\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_token_corpus(path)

    def test_non_integer_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("[1, 2.5]\n")
        with pytest.raises(DataFormatError, match="line 1"):
            read_token_corpus(path)

    def test_negative_ids_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("[1, -2]\n")
        with pytest.raises(DataFormatError, match="line 1"):
            read_token_corpus(path)

    def test_empty_sequence_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("[]\n")
        with pytest.raises(DataFormatError):
            read_token_corpus(path)


class TestLogProbCsv:
    def test_round_trip(self, tmp_path):
        records = (LogProbRecord(-12.5, 10), LogProbRecord(-0.25, 1))
        path = tmp_path / "lp.csv"
        write_logprob_csv(records, path)
        assert read_logprob_csv(path) == records

    def test_header_required(self, tmp_path):
        path = tmp_path / "lp.csv"
        path.write_text("-12.5,10\n")
        with pytest.raises(DataFormatError, match="header"):
            read_logprob_csv(path)

    def test_bad_row_names_line(self, tmp_path):
        path = tmp_path / "lp.csv"
        path.write_text("total_logprob,n_tokens\n-1.0,abc\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_logprob_csv(path)

    def test_zero_tokens_rejected(self, tmp_path):
        path = tmp_path / "lp.csv"
        path.write_text("total_logprob,n_tokens\n-1.0,0\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_logprob_csv(path)


class TestRatingsCsv:
    def test_read(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("player_a,player_b,rating\nx,y,def_a\ny,x,tie\n")
        assert read_ratings_csv(path) == [("x", "y", "def_a"), ("y", "x", "tie")]

    def test_header_required(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("x,y,def_a\n")
        with pytest.raises(DataFormatError, match="header"):
            read_ratings_csv(path)


class TestMetricColumns:
    def test_with_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("mauve,human_score\n0.9,40\n0.5,10\n")
        names, a, b = read_metric_columns(path)
        assert names == ("mauve", "human_score")
        assert_array_equal(a, [0.9, 0.5])
        assert_array_equal(b, [40.0, 10.0])

    def test_without_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.9,40\n0.5,10\n")
        names, a, b = read_metric_columns(path)
        assert names == ("a", "b")

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.9,40\n0.5\n")
        with pytest.raises(DataFormatError, match="line 2"):
            read_metric_columns(path)


class TestRenormalize:
    def test_counts_become_distribution(self):
        assert_allclose(renormalize([2.0, 6.0]), [0.25, 0.75])

    def test_zero_total_rejected(self):
        with pytest.raises(ParameterError):
            renormalize([0.0, 0.0])

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            renormalize([1.0, -1.0])


class TestCurveExports:
    def test_csv_layout_and_values(self, tmp_path):
        curve = divergence_curve([0.8, 0.2], [0.3, 0.7], c=5.0, n_grid=3)
        path = tmp_path / "curve.csv"
        write_curve_csv(curve, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "lambda,x,y"
        assert len(lines) == 1 + 5  # 3 interior + 2 anchors
        rows = [tuple(float(v) for v in line.split(",")) for line in lines[1:]]
        assert rows[0][0] == 1.0 and rows[-1][0] == 0.0
        for (lam, x, y), cx, cy in zip(rows, curve.xs, curve.ys):
            assert x == cx and y == cy

    def test_svg_is_written(self, tmp_path):
        curve = divergence_curve([0.8, 0.2], [0.3, 0.7], c=5.0, n_grid=5)
        path = tmp_path / "curve.svg"
        write_curve_svg(curve, path)
        text = path.read_text()
        assert text.startswith("<svg")
        assert "polyline" in text


class TestReports:
    def make_report(self):
        return ReportDocument(
            kind="mauve",
            config={"num_buckets": 10, "scaling_c": 5.0, "seed": 0},
            results={"mauve": 0.1, "kl_p_q": math.inf, "curve": [[0.0, 0.0, 1.0]]},
            timing={"seconds": 0.5},
        )

    def test_round_trip_equality(self, tmp_path):
        report = self.make_report()
        path = tmp_path / "report.json"
        write_report(report, path)
        assert read_report(path) == report

    def test_seventeen_digit_floats(self, tmp_path):
        report = self.make_report()
        path = tmp_path / "report.json"
        write_report(report, path)
        assert "0.10000000000000001" in path.read_text()

    def test_exact_one_round_trips(self, tmp_path):
        report = ReportDocument(
            kind="mauve", config={}, results={"mauve": 1.0}, timing={}
        )
        path = tmp_path / "report.json"
        write_report(report, path)
        assert read_report(path).results["mauve"] == 1.0

    def test_infinity_round_trips(self, tmp_path):
        report = self.make_report()
        path = tmp_path / "report.json"
        write_report(report, path)
        assert read_report(path).results["kl_p_q"] == math.inf

    def test_missing_field_is_schema_error(self, tmp_path):
        path = tmp_path / "report.json"
        path.write_text(json.dumps({"kind": "mauve", "config": {}}))
        with pytest.raises(DataFormatError, match="missing"):
            read_report(path)

    def test_keys_are_sorted_deterministically(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_report(
            ReportDocument(kind="x", config={"b": 1, "a": 2}, results={}, timing={}), a
        )
        write_report(
            ReportDocument(kind="x", config={"a": 2, "b": 1}, results={}, timing={}), b
        )
        assert a.read_bytes() == b.read_bytes()


class TestAtomicWrites:
    def test_no_temp_files_left_behind(self, tmp_path):
        write_report(
            ReportDocument(kind="x", config={}, results={}, timing={}),
            tmp_path / "out.json",
        )
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out.json"]

    def test_failed_replace_leaves_no_partial(self, tmp_path):
        target = tmp_path / "occupied"
        target.mkdir()
        (target / "keep.txt").write_text("data")
        with pytest.raises(OSError):
            write_report(
                ReportDocument(kind="x", config={}, results={}, timing={}), target
            )
        assert (target / "keep.txt").read_text() == "data"
        leftovers = [p for p in tmp_path.iterdir() if p.name != "occupied"]
        assert leftovers == []
