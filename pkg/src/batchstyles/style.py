"""Low-frequency amplitude substitution, Fourier augmentation and batch style
standardization.

All amplitude fields here are center-shifted: the substituted region is the
square block of half-length ``l`` around ``(H//2, W//2)``.
"""

import numpy as np

from .fourier import amp_phase, centered_amplitude_phase, dft2, fftshift, from_centered
from .rng import check_rng
from .validation import check_image_batch, check_ratio, check_ratio_range, check_view_batch

DEFAULT_RATIO_RANGE = (0.02, 1.0)


def low_freq_half_length(h, w, r):
    """Half side of the substituted block, truncated toward zero."""
    return min(int(r * h / 2), int(r * w / 2))


def low_freq_slices(h, w, r):
    l = low_freq_half_length(h, w, r)
    hc, wc = h // 2, w // 2
    return slice(hc - l, hc + l), slice(wc - l, wc + l)


def low_freq_mask(h, w, r):
    """Boolean ``(h, w)`` mask of the bins replaced at ratio ``r``."""
    mask = np.zeros((h, w), dtype=bool)
    mask[low_freq_slices(h, w, r)] = True
    return mask


def hermitian_block_mask(h, w, r):
    """Bins of the substituted block whose conjugate mirror is also in the block.

    The block ``[hc - l, hc + l)`` contains frequency ``-l`` but not ``+l``, so
    after taking the real part of the inverse transform only this
    conjugation-closed core keeps the transplanted amplitudes exactly.
    """
    mask = low_freq_mask(h, w, r)
    rows = (2 * (h // 2) - np.arange(h)) % h
    cols = (2 * (w // 2) - np.arange(w)) % w
    return mask & mask[np.ix_(rows, cols)]


def substitute_low_freq(src_amp, tgt_amp, r):
    """Copy of ``src_amp`` whose centered low-frequency block comes from ``tgt_amp``.

    Works on any leading shape; the block is taken over the last two axes.
    """
    src_amp = np.asarray(src_amp, dtype=np.float64)
    tgt_amp = np.asarray(tgt_amp, dtype=np.float64)
    if src_amp.shape[-2:] != tgt_amp.shape[-2:]:
        raise ValueError(f"shape mismatch: {src_amp.shape} vs {tgt_amp.shape}")
    r = check_ratio(r)
    h, w = src_amp.shape[-2:]
    rows, cols = low_freq_slices(h, w, r)
    out = np.array(np.broadcast_to(src_amp, np.broadcast_shapes(src_amp.shape, tgt_amp.shape)))
    out[..., rows, cols] = np.broadcast_to(tgt_amp, out.shape)[..., rows, cols]
    return out


def sample_fa_params(rng, n, ratio_range):
    """Per-image style index and ratio, drawn as (k_0, r_0, k_1, r_1, ...)."""
    r_min, r_max = check_ratio_range(*ratio_range)
    indices, ratios = [], []
    for _ in range(n):
        indices.append(rng.randbelow(n))
        ratios.append(rng.uniform(r_min, r_max))
    return indices, ratios


def sample_bss_params(rng, n, n_views, ratio_range):
    """Distinct per-view style indices (permutation prefix) and one shared ratio."""
    r_min, r_max = check_ratio_range(*ratio_range)
    if not 1 <= n_views <= n:
        raise ValueError(f"n_views must lie in [1, {n}], got {n_views}")
    indices = rng.permutation(n)[:n_views]
    return indices, rng.uniform(r_min, r_max)


def fourier_augment(X, ratio_range=DEFAULT_RATIO_RANGE, rng=None, *,
                    style_indices=None, ratios=None, clamp=True):
    """Per-sample Fourier augmentation.

    Each image takes the low-frequency amplitude of an independently drawn
    batch member while keeping its own phase.

    Parameters
    ----------
    X : array of shape (N, C, H, W)
    ratio_range : (r_min, r_max)
    rng : SplitMix64 or int, optional
    style_indices, ratios : sequences of length N, optional
        Override the random draws (the generator is then not advanced).
    clamp : bool
        Clip the reconstruction to [0, 1].

    Returns
    -------
    array of shape (N, C, H, W)
    """
    X = check_image_batch(X)
    n = X.shape[0]
    if style_indices is None or ratios is None:
        drawn_k, drawn_r = sample_fa_params(check_rng(rng), n, ratio_range)
        style_indices = drawn_k if style_indices is None else style_indices
        ratios = drawn_r if ratios is None else ratios
    if len(style_indices) != n or len(ratios) != n:
        raise ValueError("style_indices and ratios need one entry per image")

    amplitude, phase = centered_amplitude_phase(X)
    new_amp = np.empty_like(amplitude)
    for i, (k, r) in enumerate(zip(style_indices, ratios)):
        new_amp[i] = substitute_low_freq(amplitude[i], amplitude[k], r)
    return from_centered(new_amp, phase, clamp=clamp)


def standardize_amplitudes(amplitude, style_indices, ratio):
    """``(N, C, H, W)`` centered amplitudes -> ``(N, V, C, H, W)``, one style per view."""
    amplitude = np.asarray(amplitude, dtype=np.float64)
    src = amplitude[:, None]
    tgt = amplitude[np.asarray(style_indices, dtype=np.intp)][None]
    return substitute_low_freq(src, tgt, ratio)


def batch_styles_standardize(X, n_views=1, ratio_range=DEFAULT_RATIO_RANGE, rng=None, *,
                             style_indices=None, ratio=None, clamp=True):
    """Batch styles standardization.

    For every view one batch member's low-frequency amplitude block is
    transplanted into all images, so a single style prevails per view. Style
    indices are distinct across views; the ratio is shared by all views.

    Returns
    -------
    array of shape (N, n_views, C, H, W)
    """
    X = check_image_batch(X)
    n = X.shape[0]
    if not 1 <= n_views <= n:
        raise ValueError(f"n_views must lie in [1, {n}], got {n_views}")
    if style_indices is None or ratio is None:
        drawn_k, drawn_r = sample_bss_params(check_rng(rng), n, n_views, ratio_range)
        style_indices = drawn_k if style_indices is None else style_indices
        ratio = drawn_r if ratio is None else ratio
    if len(style_indices) != n_views:
        raise ValueError(f"expected {n_views} style indices, got {len(style_indices)}")

    amplitude, phase = centered_amplitude_phase(X)
    new_amp = standardize_amplitudes(amplitude, style_indices, ratio)
    phase = np.broadcast_to(phase[:, None], new_amp.shape)
    return from_centered(new_amp, phase, clamp=clamp)


def r_sweep_views(X, ratios, style_index):
    """One BSS column per ratio, all with the same style image."""
    X = check_image_batch(X)
    columns = [
        batch_styles_standardize(X, 1, style_indices=[style_index], ratio=r)[:, 0]
        for r in ratios
    ]
    return np.stack(columns, axis=1)


def standardized_low_freq_check(views, r, rtol=1e-5, atol=0.0):
    """True iff within every view all images share the low-frequency amplitudes.

    Only the conjugation-closed core of the block is compared (see
    :func:`hermitian_block_mask`); the rest of the block cannot survive the
    projection onto real images. Bins are compared against the first image
    of the view with ``|a - ref| <= rtol * max(|ref|, floor) + atol``, where
    ``floor`` is ``1e-3`` times the view's peak block amplitude so that
    numerically empty bins do not make the relative test ill-posed.
    Unclamped views with values outside [0, 1] are accepted.
    """
    views = check_view_batch(views, bounded=False)
    n, v, c, h, w = views.shape
    if n == 1:
        return True
    core = hermitian_block_mask(h, w, r)
    if not core.any():
        return True
    amplitude, _ = amp_phase(fftshift(dft2(views)))
    block = amplitude[..., core]
    ref = block[:1]
    floor = 1e-3 * ref.max(axis=(0, 2, 3), keepdims=True)
    bound = rtol * np.maximum(ref, floor) + atol
    return bool(np.all(np.abs(block - ref) <= bound))
