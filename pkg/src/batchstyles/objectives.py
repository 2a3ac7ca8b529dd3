"""Forward-only evaluations of the NT-Xent, SWaV and MSN objectives.

Cross-entropy is ``H(target, approx) = -sum(target * log(approx))``: the first
argument is the true distribution (codes or teacher targets), the second the
prediction. Probabilities are clamped at ``1e-12`` inside logarithms.
"""

import numpy as np

from .validation import check_embeddings

EPS = 1e-12


def _logsumexp(a, axis=-1):
    m = np.max(a, axis=axis, keepdims=True)
    return (m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))).squeeze(axis)


def softmax(logits, axis=-1):
    logits = np.asarray(logits, dtype=np.float64)
    e = np.exp(logits - np.max(logits, axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy(target, approx):
    """Row-wise ``H(target, approx)``; returns an array over the leading axes."""
    approx = np.maximum(np.asarray(approx, dtype=np.float64), EPS)
    return -np.sum(np.asarray(target, dtype=np.float64) * np.log(approx), axis=-1)


def entropy(p):
    return cross_entropy(p, p)


def nt_xent(z, temperature=0.5):
    """Mean NT-Xent loss over an ``(N, V, D)`` grid of unit embeddings.

    Row ``c`` holds the ``V`` views of content ``c``. Every other embedding in
    the grid is in the denominator; the ``V - 1`` same-content views are the
    positives.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 3:
        raise ValueError(f"z must have shape (N, V, D), got {z.shape}")
    n, v, d = z.shape
    if v < 2:
        raise ValueError(f"NT-Xent needs at least 2 views, got {v}")
    flat = check_embeddings(z.reshape(n * v, d), normalized=True)

    logits = flat @ flat.T / temperature
    np.fill_diagonal(logits, -np.inf)
    log_prob = logits - _logsumexp(logits, axis=1)[:, None]

    content = np.repeat(np.arange(n), v)
    positive = content[:, None] == content[None, :]
    np.fill_diagonal(positive, False)
    per_sample = -np.sum(np.where(positive, log_prob, 0.0), axis=1) / (v - 1)
    return float(per_sample.mean())


def prototype_probs(z, prototypes, temperature=0.1):
    """Row-wise softmax of ``z @ prototypes.T / temperature``."""
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = check_embeddings(z, normalized=True)
    prototypes = check_embeddings(prototypes, normalized=True, name="prototypes")
    if z.shape[1] != prototypes.shape[1]:
        raise ValueError(f"dimension mismatch: {z.shape[1]} vs {prototypes.shape[1]}")
    return softmax(z @ prototypes.T / temperature)


def _sinkhorn_iterations(Q, iters):
    n, k = Q.shape
    Q = Q / Q.sum()
    for _ in range(iters):
        Q = Q / Q.sum(axis=0, keepdims=True) / k
        Q = Q / Q.sum(axis=1, keepdims=True) / n
    return Q


def sinkhorn_knopp(scores, epsilon=0.05, iters=3):
    """Equipartitioned soft assignment of ``N`` rows to ``K`` prototypes.

    Starts from ``exp(scores / epsilon)`` normalized to unit mass and
    alternates column normalization (sums ``1/K``) and row normalization
    (sums ``1/N``), ending on rows.

    Returns
    -------
    Q : (N, K) array with rows summing to ``1/N``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or min(scores.shape) < 1:
        raise ValueError(f"scores must be a non-empty 2-D matrix, got {scores.shape}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    Q = np.exp((scores - scores.max()) / epsilon)
    return _sinkhorn_iterations(Q, iters)


def _as_code_rows(q):
    q = np.asarray(q, dtype=np.float64)
    return q / q.sum(axis=1, keepdims=True)


def swav_loss_pair(q_s, q_t, p_s, p_t):
    """Swapped prediction loss ``H(q_s, p_t) + H(q_t, p_s)`` averaged over rows.

    Codes may be raw Sinkhorn outputs (rows summing to ``1/N``); they are
    rescaled to unit row mass first.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in (q_s, q_t, p_s, p_t)]
    if len({a.shape for a in arrays}) != 1:
        raise ValueError(f"shape mismatch: {[a.shape for a in arrays]}")
    q_s, q_t, p_s, p_t = arrays
    q_s, q_t = _as_code_rows(q_s), _as_code_rows(q_t)
    return float(np.mean(cross_entropy(q_s, p_t) + cross_entropy(q_t, p_s)))


def swav_loss_multicrop(q_globals, p_all):
    """Multi-crop SWaV loss.

    Parameters
    ----------
    q_globals : sequence of 2 (N, K) code matrices, one per global view
    p_all : sequence of V + 2 (N, K) probability matrices; the first two
        belong to the global views

    Each global code predicts every other view; terms are averaged with
    weight ``1 / (2 (V + 1))``.
    """
    q_globals, p_all = list(q_globals), list(p_all)
    if len(q_globals) != 2:
        raise ValueError(f"expected 2 global code matrices, got {len(q_globals)}")
    if len(p_all) < 2:
        raise ValueError(f"expected at least 2 probability matrices, got {len(p_all)}")
    shapes = {np.shape(a) for a in q_globals + p_all}
    if len(shapes) != 1:
        raise ValueError(f"shape mismatch: {sorted(shapes)}")
    n_local = len(p_all) - 2
    total = 0.0
    for i, q in enumerate(q_globals):
        q = _as_code_rows(q)
        for v, p in enumerate(p_all):
            if v != i:
                total = total + cross_entropy(q, p)
    return float(np.mean(total / (2 * (n_local + 1))))


def msn_loss(p_masked, p_unmasked, lam=1.0):
    """Cross-entropy to the unmasked targets minus ``lam`` times the mean-entropy.

    Parameters
    ----------
    p_masked : (N, M, K) predictions for the masked views
    p_unmasked : (N, K) targets
    lam : float
        Weight of the entropy bonus on the average masked prediction.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    p_masked = np.asarray(p_masked, dtype=np.float64)
    p_unmasked = np.asarray(p_unmasked, dtype=np.float64)
    if p_masked.ndim != 3 or p_unmasked.shape != (p_masked.shape[0], p_masked.shape[2]):
        raise ValueError(
            f"expected p_masked (N, M, K) and p_unmasked (N, K), got "
            f"{p_masked.shape} and {p_unmasked.shape}"
        )
    ce = cross_entropy(p_unmasked[:, None, :], p_masked).mean()
    p_bar = p_masked.reshape(-1, p_masked.shape[2]).mean(axis=0)
    return float(ce - lam * entropy(p_bar))


def msn_probs(z_masked, z_unmasked, prototypes, tau=0.1, tau_plus=0.025, sk_iters=3):
    """Masked predictions and sharpened unmasked targets.

    The targets use the lower temperature ``tau_plus`` and are then balanced
    across the batch with Sinkhorn iterations started from the probability
    rows (skipped when ``sk_iters == 0``).

    Returns
    -------
    p_masked : (N, M, K)
    p_unmasked : (N, K), rows summing to 1
    """
    if not tau > tau_plus > 0:
        raise ValueError(f"temperatures must satisfy tau > tau_plus > 0, got {tau}, {tau_plus}")
    z_masked = np.asarray(z_masked, dtype=np.float64)
    if z_masked.ndim != 3:
        raise ValueError(f"z_masked must have shape (N, M, D), got {z_masked.shape}")
    n, m, d = z_masked.shape
    p_masked = prototype_probs(z_masked.reshape(n * m, d), prototypes, tau).reshape(n, m, -1)
    p_unmasked = prototype_probs(z_unmasked, prototypes, tau_plus)
    if sk_iters:
        p_unmasked = _as_code_rows(_sinkhorn_iterations(p_unmasked, sk_iters))
    return p_masked, p_unmasked
