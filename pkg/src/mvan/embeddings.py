"""Word-embedding table construction from word2vec-style text files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .text import PAD_INDEX, Vocabulary


class EmbeddingFormatError(Exception):
    """Unparseable embedding file content."""


@dataclass
class EmbeddingTable:
    matrix: np.ndarray  # (|V|, dim) float64
    trainable: bool = True

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def load_embeddings(
    path: Optional[str],
    vocab: Vocabulary,
    dim: int,
    rng: np.random.Generator,
) -> EmbeddingTable:
    """Build the |V| x dim table: file vectors where available, uniform
    [-0.05, 0.05] draws elsewhere, and an all-zero padding row.

    ``path`` may be None (no pretrained file). The file is word2vec text
    format: optionally a "count dim" header, then one "token v1 ... v_dim"
    line per word. Later duplicate lines win.
    """
    size = len(vocab)
    matrix = rng.uniform(-0.05, 0.05, size=(size, dim))
    if path is not None:
        _fill_from_file(Path(path), vocab, dim, matrix)
    matrix[PAD_INDEX] = 0.0
    return EmbeddingTable(matrix=matrix, trainable=True)


def _fill_from_file(path: Path, vocab: Vocabulary, dim: int, matrix: np.ndarray) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split(" ")
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    if int(parts[1]) != dim:
                        raise EmbeddingFormatError(
                            f"{path}:{lineno}: header declares dimension "
                            f"{parts[1]}, expected {dim}"
                        )
                    continue
                except ValueError:
                    pass  # not a header; fall through to vector parsing
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} values for {token!r}, "
                    f"got {len(values)}"
                )
            if token not in vocab:
                continue
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from None
            matrix[vocab.index(token)] = vec
