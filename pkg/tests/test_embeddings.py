import numpy as np
import pytest

from mvan.embeddings import EmbeddingFormatError, load_embeddings
from mvan.rng import RngTree
from mvan.text import PAD_INDEX, build_vocab


@pytest.fixture
def vocab():
    return build_vocab([["hello", "hello", "world"]], cap=10)


def _rng():
    return RngTree(3).stream("init/embeddings")


def test_file_vector_passes_through(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("hello 0.1 0.2 0.3\n")
    table = load_embeddings(path, vocab, dim=3, rng=_rng())
    np.testing.assert_allclose(table.matrix[vocab.index("hello")], [0.1, 0.2, 0.3])


def test_header_line_accepted(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("2 3\nhello 0.1 0.2 0.3\nworld 1 2 3\n")
    table = load_embeddings(path, vocab, dim=3, rng=_rng())
    np.testing.assert_allclose(table.matrix[vocab.index("world")], [1.0, 2.0, 3.0])


def test_padding_row_forced_to_zero(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("hello 0.5 0.5 0.5\n")
    table = load_embeddings(path, vocab, dim=3, rng=_rng())
    np.testing.assert_array_equal(table.matrix[PAD_INDEX], [0.0, 0.0, 0.0])


def test_absent_file_gives_uniform_rows(vocab):
    table = load_embeddings(None, vocab, dim=5, rng=_rng())
    assert table.matrix.shape == (len(vocab), 5)
    np.testing.assert_array_equal(table.matrix[PAD_INDEX], np.zeros(5))
    others = np.delete(table.matrix, PAD_INDEX, axis=0)
    assert (np.abs(others) <= 0.05).all()
    assert (others != 0).any()


def test_tokens_missing_from_file_get_random_rows(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("hello 1 1 1\n")
    table = load_embeddings(path, vocab, dim=3, rng=_rng())
    row = table.matrix[vocab.index("world")]
    assert (np.abs(row) <= 0.05).all()


def test_same_stream_same_table(vocab):
    a = load_embeddings(None, vocab, dim=4, rng=_rng())
    b = load_embeddings(None, vocab, dim=4, rng=_rng())
    np.testing.assert_array_equal(a.matrix, b.matrix)


def test_wrong_value_count_reports_line_number(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("hello 0.1 0.2 0.3\nworld 0.1\n")
    with pytest.raises(EmbeddingFormatError, match=":2"):
        load_embeddings(path, vocab, dim=3, rng=_rng())


def test_unparseable_number_reports_line_number(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("hello 0.1 oops 0.3\n")
    with pytest.raises(EmbeddingFormatError, match=":1"):
        load_embeddings(path, vocab, dim=3, rng=_rng())


def test_header_dim_mismatch_rejected(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("2 300\nhello 0.1 0.2 0.3\n")
    with pytest.raises(EmbeddingFormatError, match="dimension"):
        load_embeddings(path, vocab, dim=3, rng=_rng())


def test_later_duplicate_wins(tmp_path, vocab):
    path = tmp_path / "emb.txt"
    path.write_text("hello 1 1 1\nhello 2 2 2\n")
    table = load_embeddings(path, vocab, dim=3, rng=_rng())
    np.testing.assert_allclose(table.matrix[vocab.index("hello")], [2.0, 2.0, 2.0])
