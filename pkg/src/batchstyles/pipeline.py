"""View generation for SimCLR, SWaV and MSN style pretraining.

Style augmentation runs first on the full-resolution batch, then per-image
geometric ops, then one batch-wise color jitter per view. Geometric ops act
on single ``(C, H, W)`` images; color ops on whole ``(N, C, H, W)`` batches
so a view keeps a single style.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import check_rng
from .style import DEFAULT_RATIO_RANGE, batch_styles_standardize, fourier_augment
from .validation import check_image_batch

STYLE_MODES = ("bss", "fa", "none")
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class ViewSpec:
    count: int
    crop_size: int
    scale_range: tuple = (0.08, 1.0)
    style_mode: str = "bss"
    ratio_range: tuple = (3 / 4, 4 / 3)

    def __post_init__(self):
        lo, hi = self.scale_range
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.crop_size < 2:
            raise ValueError(f"crop_size must be >= 2, got {self.crop_size}")
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"invalid scale_range {self.scale_range}")
        if not 0 < self.ratio_range[0] <= self.ratio_range[1]:
            raise ValueError(f"invalid ratio_range {self.ratio_range}")
        if self.style_mode not in STYLE_MODES:
            raise ValueError(f"style_mode must be one of {STYLE_MODES}, got {self.style_mode!r}")


@dataclass(frozen=True)
class ColorJitterParams:
    brightness: float = 0.4
    contrast: float = 0.4
    saturation: float = 0.4
    grayscale_prob: float = 0.2

    def __post_init__(self):
        for name in ("brightness", "contrast", "saturation"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not 0 <= self.grayscale_prob <= 1:
            raise ValueError(f"grayscale_prob must lie in [0, 1], got {self.grayscale_prob}")


@dataclass(frozen=True)
class JitterFactors:
    brightness: float = 1.0
    contrast: float = 1.0
    saturation: float = 1.0
    grayscale: bool = False


@dataclass(frozen=True)
class GeometryParams:
    """Per-image geometric ops applied after cropping.

    ``max_deg=15`` is a guess: the recipe only says "small rotations".
    ``cutout_size=None`` means a quarter of the crop side.
    """

    hflip_prob: float = 0.5
    max_deg: float = 15.0
    cutout_prob: float = 0.5
    cutout_size: int = None


# -- interpolation ---------------------------------------------------------

def _lerp(a, b, t):
    return a + (b - a) * t


def _bilinear(img, ys, xs, zero_pad):
    """Sample ``img`` (C, H, W) at float coordinates ``ys``/``xs`` (same shape)."""
    h, w = img.shape[-2:]
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    ty, tx = ys - y0, xs - x0

    def tap(yy, xx):
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        vals = img[:, np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)]
        return np.where(inside, vals, 0.0) if zero_pad else vals

    top = _lerp(tap(y0, x0), tap(y0, x0 + 1), tx)
    bottom = _lerp(tap(y0 + 1, x0), tap(y0 + 1, x0 + 1), tx)
    return _lerp(top, bottom, ty)


def resize_bilinear(img, out_h, out_w):
    """Half-pixel-centered bilinear resize with edge clamping."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[-2:]
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return _bilinear(img, yy, xx, zero_pad=False)


# -- geometric ops ---------------------------------------------------------

def sample_crop_box(h, w, scale_range, ratio_range, rng, attempts=10):
    """Return ``(top, left, crop_h, crop_w)`` following the usual resized-crop sampler.

    Falls back to the largest centered crop with a clamped aspect ratio.
    """
    area = h * w
    log_lo, log_hi = math.log(ratio_range[0]), math.log(ratio_range[1])
    for _ in range(attempts):
        target_area = area * rng.uniform(*scale_range)
        aspect = math.exp(rng.uniform(log_lo, log_hi))
        cw = int(round(math.sqrt(target_area * aspect)))
        ch = int(round(math.sqrt(target_area / aspect)))
        if 0 < cw <= w and 0 < ch <= h:
            top = rng.randbelow(h - ch + 1)
            left = rng.randbelow(w - cw + 1)
            return top, left, ch, cw
    in_ratio = w / h
    if in_ratio < ratio_range[0]:
        cw, ch = w, int(round(w / ratio_range[0]))
    elif in_ratio > ratio_range[1]:
        ch, cw = h, int(round(h * ratio_range[1]))
    else:
        cw, ch = w, h
    return (h - ch) // 2, (w - cw) // 2, ch, cw


def random_resized_crop(img, spec, rng):
    """Crop a random region of ``img`` (C, H, W) and resize it to ``spec.crop_size``."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[-2:]
    top, left, ch, cw = sample_crop_box(h, w, spec.scale_range, spec.ratio_range, rng)
    patch = img[:, top:top + ch, left:left + cw]
    return np.clip(resize_bilinear(patch, spec.crop_size, spec.crop_size), 0.0, 1.0)


def hflip(img):
    return np.asarray(img)[..., ::-1].copy()


def rotate(img, degrees):
    """Rotate counter-clockwise about the center; bilinear, zero padded."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[-2:]
    theta = math.radians(degrees)
    cos, sin = math.cos(theta), math.sin(theta)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    yy, xx = np.meshgrid(np.arange(h) - cy, np.arange(w) - cx, indexing="ij")
    # inverse map: output pixel -> source coordinate
    src_y = cy + cos * yy + sin * xx
    src_x = cx - sin * yy + cos * xx
    return np.clip(_bilinear(img, src_y, src_x, zero_pad=True), 0.0, 1.0)


def rotate_small(img, max_deg, rng):
    if not 0 <= max_deg <= 30:
        raise ValueError(f"max_deg must lie in [0, 30], got {max_deg}")
    return rotate(img, rng.uniform(-max_deg, max_deg))


def cutout(img, hole, rng):
    """Zero a ``hole`` x ``hole`` square at a uniformly drawn position."""
    img = np.array(img, dtype=np.float64)
    h, w = img.shape[-2:]
    if not 0 <= hole < min(h, w):
        raise ValueError(f"hole must lie in [0, {min(h, w)}), got {hole}")
    top = rng.randbelow(h - hole + 1)
    left = rng.randbelow(w - hole + 1)
    img[..., top:top + hole, left:left + hole] = 0.0
    return img


def apply_geometry(img, spec, geometry, rng):
    """Crop, then (when ``geometry`` is given) flip, rotate and cut out one image."""
    out = random_resized_crop(img, spec, rng)
    if geometry is None:
        return out
    if rng.random() < geometry.hflip_prob:
        out = hflip(out)
    if geometry.max_deg > 0:
        out = rotate_small(out, geometry.max_deg, rng)
    if rng.random() < geometry.cutout_prob:
        hole = geometry.cutout_size or spec.crop_size // 4
        out = cutout(out, hole, rng)
    return out


# -- color ops -------------------------------------------------------------

def _gray(batch):
    """Per-pixel luminance, shape (N, 1, H, W)."""
    if batch.shape[1] == 1:
        return batch
    return np.einsum("c,nchw->nhw", _LUMA, batch)[:, None]


def sample_jitter_factors(params, rng):
    """Draw brightness, contrast, saturation and grayscale, always in that order."""
    def factor(magnitude):
        return rng.uniform(max(0.0, 1.0 - magnitude), 1.0 + magnitude)

    brightness = factor(params.brightness)
    contrast = factor(params.contrast)
    saturation = factor(params.saturation)
    grayscale = rng.random() < params.grayscale_prob
    return JitterFactors(brightness, contrast, saturation, grayscale)


def apply_color_jitter(batch, factors):
    """Apply one set of factors identically to every image of ``batch``."""
    x = check_image_batch(batch)
    x = np.clip(x * factors.brightness, 0.0, 1.0)
    mean = _gray(x).mean(axis=(1, 2, 3), keepdims=True)
    x = np.clip(factors.contrast * x + (1.0 - factors.contrast) * mean, 0.0, 1.0)
    x = np.clip(factors.saturation * x + (1.0 - factors.saturation) * _gray(x), 0.0, 1.0)
    if factors.grayscale:
        x = np.broadcast_to(_gray(x), x.shape).copy()
    return x


def batch_color_jitter(batch, params, rng):
    """Batch-wise color jitter: one factor draw shared by all images."""
    return apply_color_jitter(batch, sample_jitter_factors(params, check_rng(rng)))


# -- view recipes ----------------------------------------------------------

def _styled_views(X, spec, ratio_range, rng):
    """(N, V, C, H, W) full-resolution views for ``spec.style_mode``."""
    if spec.style_mode == "bss":
        return batch_styles_standardize(X, spec.count, ratio_range, rng)
    if spec.style_mode == "fa":
        return np.stack([fourier_augment(X, ratio_range, rng) for _ in range(spec.count)], axis=1)
    return np.repeat(X[:, None], spec.count, axis=1)


def _finish_views(styled, spec, geometry, color, rng):
    """Geometric ops per image, then one color jitter per view."""
    n, v, c = styled.shape[:3]
    out = np.empty((n, v, c, spec.crop_size, spec.crop_size))
    for j in range(v):
        for i in range(n):
            out[i, j] = apply_geometry(styled[i, j], spec, geometry, rng)
        if color is not None:
            out[:, j] = batch_color_jitter(out[:, j], color, rng)
    return out


def make_views(X, spec, ratio_range=DEFAULT_RATIO_RANGE, rng=None, *,
               geometry=GeometryParams(), color=ColorJitterParams()):
    """Generate ``spec.count`` views of ``X`` with shape (N, V, C, crop, crop)."""
    X = check_image_batch(X)
    rng = check_rng(rng)
    styled = _styled_views(X, spec, ratio_range, rng)
    return _finish_views(styled, spec, geometry, color, rng)


def make_simclr_views(X, specs, ratio_range=DEFAULT_RATIO_RANGE, rng=None, *,
                      geometry=GeometryParams(), color=ColorJitterParams()):
    """SimCLR views: BSS applied once per view across all specs.

    ``specs`` is a single :class:`ViewSpec` (returns one array) or a sequence
    of them for multi-crop (returns a list, one array per spec). All views
    share one BSS call so every view gets a distinct style image.
    """
    X = check_image_batch(X)
    rng = check_rng(rng)
    single = isinstance(specs, ViewSpec)
    specs = [specs] if single else list(specs)
    total = sum(s.count for s in specs)
    styled = batch_styles_standardize(X, total, ratio_range, rng)
    outputs, start = [], 0
    for s in specs:
        chunk = styled[:, start:start + s.count]
        outputs.append(_finish_views(chunk, s, geometry, color, rng))
        start += s.count
    return outputs[0] if single else outputs


def make_swav_views(X, global_spec=None, local_spec=None, ratio_range=DEFAULT_RATIO_RANGE,
                    rng=None, *, geometry=GeometryParams(), color=ColorJitterParams()):
    """SWaV multi-crop: 2 BSS global views and ``local_spec.count`` FA local views.

    Defaults follow the 2 x 224^2 + 6 x 128^2 recipe.
    """
    global_spec = global_spec or ViewSpec(2, 224, (0.14, 1.0), "bss")
    local_spec = local_spec or ViewSpec(6, 128, (0.05, 0.14), "fa")
    if global_spec.count != 2:
        raise ValueError(f"SWaV uses exactly 2 global views, got {global_spec.count}")
    rng = check_rng(rng)
    globals_ = make_views(X, global_spec, ratio_range, rng, geometry=geometry, color=color)
    locals_ = make_views(X, local_spec, ratio_range, rng, geometry=geometry, color=color)
    return globals_, locals_


def patch_mask(n_h, n_w, mask_ratio, rng):
    """Boolean (n_h, n_w) grid with ``floor(mask_ratio * n_h * n_w)`` True cells."""
    if not 0 <= mask_ratio < 1:
        raise ValueError(f"mask_ratio must lie in [0, 1), got {mask_ratio}")
    total = n_h * n_w
    dropped = rng.permutation(total)[:int(mask_ratio * total)]
    mask = np.zeros(total, dtype=bool)
    mask[dropped] = True
    return mask.reshape(n_h, n_w)


def make_msn_views(X, unmasked_spec=None, masked_spec=None, mask_ratio=0.3, patch=8,
                   ratio_range=(0.02, 0.1), rng=None, *, geometry=GeometryParams(),
                   color=ColorJitterParams()):
    """MSN views: BSS unmasked views, FA masked views with dropped patches.

    Returns ``(unmasked, masked, mask)`` where ``mask`` has shape
    (N, M, crop // patch, crop // patch) and True marks a dropped patch.
    Dropped patches are zeroed in ``masked``.
    """
    unmasked_spec = unmasked_spec or ViewSpec(2, 96, (0.3, 1.0), "bss")
    masked_spec = masked_spec or ViewSpec(10, 64, (0.05, 0.3), "fa")
    for s in (unmasked_spec, masked_spec):
        if s.crop_size % patch:
            raise ValueError(f"crop_size {s.crop_size} is not divisible by patch {patch}")
    if not 0 <= mask_ratio < 1:
        raise ValueError(f"mask_ratio must lie in [0, 1), got {mask_ratio}")
    rng = check_rng(rng)
    unmasked = make_views(X, unmasked_spec, ratio_range, rng, geometry=geometry, color=color)
    masked = make_views(X, masked_spec, ratio_range, rng, geometry=geometry, color=color)

    n, m = masked.shape[:2]
    g = masked_spec.crop_size // patch
    mask = np.zeros((n, m, g, g), dtype=bool)
    for i in range(n):
        for j in range(m):
            mask[i, j] = patch_mask(g, g, mask_ratio, rng)
    pixel_mask = np.repeat(np.repeat(mask, patch, axis=2), patch, axis=3)
    masked = np.where(pixel_mask[:, :, None], 0.0, masked)
    return unmasked, masked, mask
