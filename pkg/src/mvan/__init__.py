"""Multi-view attention fake-news detection.

Two encoders, one classifier: a bidirectional GRU with word-level attention
reads the source tweet text, a masked multi-head graph attention network reads
the retweet propagation graph, and a small feed-forward head fuses the two
views into a true/fake decision. Everything numeric runs on a from-scratch
reverse-mode tape over float64 numpy arrays.
"""

__version__ = "0.1.0"
