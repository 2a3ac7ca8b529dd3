"""Batch layout conventions.

Images are float64 arrays indexed ``(n, c, h, w)``; multi-view batches add a
view axis, ``(n, v, c, h, w)``. Values live in [0, 1].
"""

import numpy as np

from .validation import check_image_batch


def alloc_batch(n, c, h, w, fill=0.0):
    """Return an ``(n, c, h, w)`` batch with every element equal to ``fill``."""
    if n < 1 or c not in (1, 3) or h < 2 or w < 2:
        raise ValueError(
            f"invalid dimensions ({n}, {c}, {h}, {w}): need n>=1, c in (1, 3), h>=2, w>=2"
        )
    if not 0.0 <= fill <= 1.0:
        raise ValueError(f"invalid fill {fill}: must lie in [0, 1]")
    return np.full((n, c, h, w), float(fill), dtype=np.float64)


def stack_views(images):
    """Stack a list of ``(N, C, H, W)`` batches into ``(N, V, C, H, W)``."""
    return np.stack([check_image_batch(x) for x in images], axis=1)


def flatten_views(views):
    """``(N, V, C, H, W)`` -> ``(N * V, C, H, W)``, content-major."""
    n, v = views.shape[:2]
    return views.reshape(n * v, *views.shape[2:])
