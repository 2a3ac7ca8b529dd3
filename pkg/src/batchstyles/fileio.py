"""PNG, embedding and label file I/O.

EMB1 layout (little-endian): ``b"EMB1"``, uint32 n, uint32 d, uint32 flags
(bit 0: rows pre-normalized), then ``n * d`` float32 values row-major.
Label files are CSV with header ``index,domain_label,class_label``.
"""

import csv
import io
import os
import struct
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from PIL import Image

from .validation import check_image_batch

EMB_MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sIII")
FLAG_NORMALIZED = 1
LABEL_HEADER = ["index", "domain_label", "class_label"]
GRID_SEPARATOR = 2


class FileFormatError(ValueError):
    """Raised when an input file does not match its declared format."""


@contextmanager
def atomic_write(path, mode="wb"):
    """Write to a sibling temp file and rename it over ``path`` on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# -- images ----------------------------------------------------------------

def quantize(x):
    """[0, 1] floats -> uint8 with round-half-away-from-zero."""
    return np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _to_pil(image):
    """(C, H, W) float image -> PIL image."""
    data = quantize(image)
    if data.shape[0] == 1:
        return Image.fromarray(data[0], mode="L")
    return Image.fromarray(np.ascontiguousarray(data.transpose(1, 2, 0)), mode="RGB")


def _png_bytes(image):
    buf = io.BytesIO()
    _to_pil(image).save(buf, format="PNG")
    return buf.getvalue()


def read_png(path):
    """Read an 8-bit grayscale or RGB PNG as a (C, H, W) float array."""
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise FileFormatError(f"{path}: not a PNG file")
            if im.mode not in ("L", "RGB"):
                raise FileFormatError(f"{path}: unsupported mode {im.mode}, need 8-bit L or RGB")
            data = np.asarray(im, dtype=np.uint8)
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot decode PNG ({exc})") from exc
    if data.ndim == 2:
        data = data[None]
    else:
        data = data.transpose(2, 0, 1)
    return data.astype(np.float64) / 255.0


def load_images(directory):
    """Load every ``*.png`` in ``directory`` (sorted by name) as an (N, C, H, W) batch."""
    paths = sorted(Path(directory).glob("*.png"))
    if not paths:
        raise FileNotFoundError(f"no PNG files in {directory}")
    images = []
    for path in paths:
        img = read_png(path)
        if images and img.shape != images[0].shape:
            raise FileFormatError(
                f"{path}: shape {img.shape} does not match {paths[0].name} {images[0].shape}"
            )
        images.append(img)
    return np.stack(images)


def save_png(image, path):
    with atomic_write(path) as fh:
        fh.write(_png_bytes(image))


def save_images(X, directory, prefix="img"):
    """Write each image of an (N, C, H, W) batch as ``{prefix}_{i:04d}.png``."""
    X = check_image_batch(X)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, image in enumerate(X):
        path = directory / f"{prefix}_{i:04d}.png"
        save_png(image, path)
        paths.append(path)
    return paths


def tile_grid(views, separator=GRID_SEPARATOR):
    """Tile an (N, V, C, H, W) batch into a (C, N*H + gaps, V*W + gaps) image.

    Rows are contents, columns views; gaps are black.
    """
    views = np.asarray(views, dtype=np.float64)
    n, v, c, h, w = views.shape
    grid = np.zeros((c, n * h + (n - 1) * separator, v * w + (v - 1) * separator))
    for i in range(n):
        for j in range(v):
            top, left = i * (h + separator), j * (w + separator)
            grid[:, top:top + h, left:left + w] = views[i, j]
    return grid


def split_grid(grid, n, v, separator=GRID_SEPARATOR):
    """Inverse of :func:`tile_grid`: (C, Hg, Wg) -> (N, V, C, H, W)."""
    c, hg, wg = grid.shape
    h = (hg - (n - 1) * separator) // n
    w = (wg - (v - 1) * separator) // v
    out = np.empty((n, v, c, h, w))
    for i in range(n):
        for j in range(v):
            top, left = i * (h + separator), j * (w + separator)
            out[i, j] = grid[:, top:top + h, left:left + w]
    return out


def save_grid(views, path):
    save_png(tile_grid(views), path)


# -- embeddings ------------------------------------------------------------

def write_embeddings(path, vectors, normalized=False):
    vectors = np.asarray(vectors, dtype="<f4")
    if vectors.ndim != 2:
        raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
    if not np.all(np.isfinite(vectors)):
        raise ValueError("vectors contain NaN or Inf")
    n, d = vectors.shape
    with atomic_write(path) as fh:
        fh.write(_HEADER.pack(EMB_MAGIC, n, d, FLAG_NORMALIZED if normalized else 0))
        fh.write(np.ascontiguousarray(vectors).tobytes())


def read_embeddings(path):
    """Return ``(vectors, normalized)``; vectors are float64 of shape (n, d)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FileFormatError(f"{path}: truncated header")
    magic, n, d, flags = _HEADER.unpack_from(raw)
    if magic != EMB_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 4 * n * d
    if len(raw) != expected:
        raise FileFormatError(f"{path}: size {len(raw)} does not match header ({expected} bytes)")
    vectors = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    if not np.all(np.isfinite(vectors)):
        raise FileFormatError(f"{path}: payload contains NaN or Inf")
    return vectors.astype(np.float64), bool(flags & FLAG_NORMALIZED)


# -- labels ----------------------------------------------------------------

def write_labels(path, domain_labels, class_labels):
    if len(domain_labels) != len(class_labels):
        raise ValueError("domain_labels and class_labels differ in length")
    with atomic_write(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABEL_HEADER)
        for i, (dom, cls) in enumerate(zip(domain_labels, class_labels)):
            writer.writerow([i, int(dom), int(cls)])


def read_labels(path, n=None):
    """Return ``(domain_labels, class_labels)`` as int arrays ordered by index."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != LABEL_HEADER:
        raise FileFormatError(f"{path}: expected header {','.join(LABEL_HEADER)}")
    try:
        body = np.array([[int(c) for c in row] for row in rows[1:] if row], dtype=np.int64)
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-integer field ({exc})") from exc
    body = body.reshape(-1, 3)
    count = len(body)
    if n is not None and count != n:
        raise FileFormatError(f"{path}: {count} label rows, expected {n}")
    if sorted(body[:, 0].tolist()) != list(range(count)):
        raise FileFormatError(f"{path}: indices must be 0..{count - 1}, each once")
    if count and body[:, 1:].min() < 0:
        raise FileFormatError(f"{path}: labels must be >= 0")
    body = body[np.argsort(body[:, 0])]
    return body[:, 1], body[:, 2]
