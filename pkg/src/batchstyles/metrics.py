"""Embedding-space diagnostics of domain invariance.

Neighbor search is brute force on cosine similarity; ties go to the lower
index so every metric is deterministic.
"""

from dataclasses import dataclass

import numpy as np

from .objectives import sinkhorn_knopp
from .validation import check_embeddings, l2_normalize


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())


def _check_labels(labels, n, name):
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {labels.shape}")
    if labels.size and labels.min() < 0:
        raise ValueError(f"{name} must be >= 0")
    return labels.astype(np.int64)


def _check_k(k, n):
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}], got {k}")


def _neighbor_order(vectors):
    """Rows of indices sorted by decreasing cosine similarity, self last."""
    x = l2_normalize(check_embeddings(vectors))
    sims = x @ x.T
    np.fill_diagonal(sims, -np.inf)
    return np.argsort(-sims, axis=1, kind="stable")


def knn(vectors, query_index, k):
    """Indices of the ``k`` rows most cosine-similar to row ``query_index``."""
    x = l2_normalize(check_embeddings(vectors))
    n = x.shape[0]
    _check_k(k, n)
    sims = x @ x[query_index]
    sims[query_index] = -np.inf
    return np.argsort(-sims, kind="stable")[:k].tolist()


def domain_purity(vectors, domain_labels, k=10):
    """Mean fraction of each example's ``k`` nearest neighbors sharing its domain."""
    vectors = check_embeddings(vectors)
    n = vectors.shape[0]
    _check_k(k, n)
    labels = _check_labels(domain_labels, n, "domain_labels")
    neighbors = _neighbor_order(vectors)[:, :k]
    return float(np.mean(labels[neighbors] == labels[:, None]))


def anchor_negative_similarities(z, bins=50):
    """Histogram over [-1, 1] of cosine similarities of all (anchor, negative) pairs.

    ``z`` has shape (N, V, D); a negative of anchor ``(c, s)`` is any view of
    a different content ``c''``. Pairs are ordered, so the total count is
    ``N * V * (N - 1) * V``.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 3:
        raise ValueError(f"z must have shape (N, V, D), got {z.shape}")
    n, v, d = z.shape
    flat = l2_normalize(check_embeddings(z.reshape(n * v, d)))
    sims = np.clip(flat @ flat.T, -1.0, 1.0)
    content = np.repeat(np.arange(n), v)
    negative = content[:, None] != content[None, :]
    counts, edges = np.histogram(sims[negative], bins=bins, range=(-1.0, 1.0))
    return Histogram(edges, counts)


def hard_assignments(vectors, prototypes, sk_epsilon=0.05, sk_iters=3):
    codes = sinkhorn_knopp(np.asarray(vectors) @ np.asarray(prototypes).T, sk_epsilon, sk_iters)
    return np.argmax(codes, axis=1)


def prototype_homogeneity(vectors, labels, prototypes, sk_epsilon=0.05, sk_iters=3):
    """Size-weighted label purity of the Sinkhorn hard-assignment clusters.

    Pass domain labels to measure domain homogeneity or class labels for
    class homogeneity. Empty prototypes are skipped.
    """
    vectors = check_embeddings(vectors, normalized=True)
    prototypes = check_embeddings(prototypes, normalized=True, name="prototypes")
    labels = _check_labels(labels, vectors.shape[0], "labels")
    assigned = hard_assignments(vectors, prototypes, sk_epsilon, sk_iters)
    majority = 0
    for proto in np.unique(assigned):
        majority += np.bincount(labels[assigned == proto]).max()
    return float(majority / len(labels))
