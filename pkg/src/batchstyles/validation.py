"""Input validation helpers shared by the public functions and estimators."""

import numpy as np


def check_image_batch(X, name="X", bounded=True):
    """Validate an ``(N, C, H, W)`` image batch and return it as float64.

    Raises
    ------
    ValueError
        If the shape is invalid, values are not finite, or (when
        ``bounded``) values fall outside [0, 1].
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 4:
        raise ValueError(f"{name} must have shape (N, C, H, W), got {X.shape}")
    n, c, h, w = X.shape
    if n < 1 or c not in (1, 3) or h < 2 or w < 2:
        raise ValueError(
            f"{name} has invalid dimensions {X.shape}: need N>=1, C in (1, 3), H>=2, W>=2"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf")
    if bounded and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError(f"{name} values must lie in [0, 1]")
    return X


def check_view_batch(views, name="views", bounded=True):
    """Validate an ``(N, V, C, H, W)`` view batch and return it as float64."""
    views = np.asarray(views, dtype=np.float64)
    if views.ndim != 5:
        raise ValueError(f"{name} must have shape (N, V, C, H, W), got {views.shape}")
    n, v = views.shape[:2]
    if v < 1:
        raise ValueError(f"{name} needs at least one view")
    check_image_batch(views.reshape(n * v, *views.shape[2:]), name=name, bounded=bounded)
    return views


def check_ratio_range(r_min, r_max):
    r_min, r_max = float(r_min), float(r_max)
    if not (0.0 <= r_min <= r_max <= 1.0):
        raise ValueError(
            f"ratio range must satisfy 0 <= r_min <= r_max <= 1, got ({r_min}, {r_max})"
        )
    return r_min, r_max


def check_ratio(r):
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"ratio must lie in [0, 1], got {r}")
    return r


def check_embeddings(z, normalized=False, name="z", atol=1e-6):
    """Validate a 2-D embedding matrix; optionally require unit-norm rows."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name} contains NaN or Inf")
    if normalized:
        norms = np.linalg.norm(z, axis=1)
        if not np.allclose(norms, 1.0, rtol=0.0, atol=atol):
            raise ValueError(f"{name} rows must be L2-normalized")
    return z


def check_probabilities(p, name="p", atol=1e-6):
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError(f"{name} must be finite and nonnegative")
    if not np.allclose(p.sum(axis=-1), 1.0, rtol=0.0, atol=atol):
        raise ValueError(f"{name} rows must sum to 1")
    return p


def l2_normalize(z, axis=-1):
    z = np.asarray(z, dtype=np.float64)
    return z / np.linalg.norm(z, axis=axis, keepdims=True)
