import struct

import numpy as np
import pytest
from PIL import Image

from batchstyles.fileio import (
    FileFormatError,
    atomic_write,
    load_images,
    quantize,
    read_embeddings,
    read_labels,
    read_png,
    save_grid,
    save_images,
    split_grid,
    tile_grid,
    write_embeddings,
    write_labels,
)


def _write_pil(path, array, mode):
    Image.fromarray(array, mode=mode).save(path)


class TestPng:
    def test_black_rgb(self, tmp_path):
        _write_pil(tmp_path / "a.png", np.zeros((8, 8, 3), np.uint8), "RGB")
        X = load_images(tmp_path)
        assert X.shape == (1, 3, 8, 8) and X.dtype == np.float64
        assert np.all(X == 0)

    def test_white_is_one(self, tmp_path):
        _write_pil(tmp_path / "a.png", np.full((4, 5), 255, np.uint8), "L")
        X = read_png(tmp_path / "a.png")
        assert X.shape == (1, 4, 5) and np.all(X == 1.0)

    def test_byte_exact_round_trip(self, tmp_path):
        data = np.random.default_rng(0).integers(0, 256, size=(2, 3, 6, 7), dtype=np.uint8)
        save_images(data / 255.0, tmp_path)
        back = load_images(tmp_path)
        np.testing.assert_array_equal(quantize(back), data)

    def test_sorted_order(self, tmp_path):
        for name, value in [("b.png", 20), ("a.png", 10), ("c.png", 30)]:
            _write_pil(tmp_path / name, np.full((2, 2), value, np.uint8), "L")
        X = load_images(tmp_path)
        np.testing.assert_array_equal(quantize(X[:, 0, 0, 0]), [10, 20, 30])

    def test_mixed_modes_rejected(self, tmp_path):
        _write_pil(tmp_path / "a.png", np.zeros((4, 4), np.uint8), "L")
        _write_pil(tmp_path / "b.png", np.zeros((4, 4, 3), np.uint8), "RGB")
        with pytest.raises(FileFormatError, match="does not match"):
            load_images(tmp_path)

    def test_size_mismatch_rejected(self, tmp_path):
        _write_pil(tmp_path / "a.png", np.zeros((4, 4), np.uint8), "L")
        _write_pil(tmp_path / "b.png", np.zeros((4, 5), np.uint8), "L")
        with pytest.raises(FileFormatError):
            load_images(tmp_path)

    def test_unsupported_mode(self, tmp_path):
        _write_pil(tmp_path / "a.png", np.zeros((4, 4, 4), np.uint8), "RGBA")
        with pytest.raises(FileFormatError, match="mode"):
            read_png(tmp_path / "a.png")

    def test_not_a_png(self, tmp_path):
        (tmp_path / "x.png").write_bytes(b"not an image")
        with pytest.raises(FileFormatError):
            read_png(tmp_path / "x.png")

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_images(tmp_path)

    def test_quantize_rounds_half_up(self):
        np.testing.assert_array_equal(quantize(np.array([0.5 / 255, 1.49 / 255, 2.0, -1.0])),
                                      [1, 1, 255, 0])


class TestGrid:
    def test_grid_size(self):
        grid = tile_grid(np.ones((2, 3, 3, 8, 8)))
        assert grid.shape == (3, 18, 28)
        assert np.all(grid[:, 8:10] == 0) and np.all(grid[:, :, 8:10] == 0)

    def test_split_round_trip(self):
        views = np.random.default_rng(1).uniform(size=(3, 4, 1, 5, 6))
        np.testing.assert_array_equal(split_grid(tile_grid(views), 3, 4), views)

    def test_saved_grid_reloads(self, tmp_path):
        views = np.random.default_rng(2).integers(0, 256, size=(2, 2, 3, 4, 4)) / 255.0
        save_grid(views, tmp_path / "g.png")
        back = split_grid(read_png(tmp_path / "g.png"), 2, 2)
        np.testing.assert_array_equal(quantize(back), quantize(views))


class TestEmbeddings:
    def test_round_trip(self, tmp_path):
        x = np.random.default_rng(3).normal(size=(5, 7)).astype(np.float32)
        write_embeddings(tmp_path / "e.bin", x, normalized=True)
        back, normalized = read_embeddings(tmp_path / "e.bin")
        assert normalized and back.dtype == np.float64
        np.testing.assert_array_equal(back, x)

    def test_layout(self, tmp_path):
        write_embeddings(tmp_path / "e.bin", [[1.0, 2.0]])
        raw = (tmp_path / "e.bin").read_bytes()
        assert raw == b"EMB1" + struct.pack("<III", 1, 2, 0) + struct.pack("<ff", 1.0, 2.0)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "e.bin").write_bytes(b"EMB2" + struct.pack("<III", 1, 1, 0) + bytes(4))
        with pytest.raises(FileFormatError, match="bad magic"):
            read_embeddings(tmp_path / "e.bin")

    @pytest.mark.parametrize("delta", [-1, 1])
    def test_size_mismatch(self, tmp_path, delta):
        write_embeddings(tmp_path / "e.bin", np.ones((2, 3)))
        raw = (tmp_path / "e.bin").read_bytes()
        raw = raw[:-1] if delta < 0 else raw + b"\0"
        (tmp_path / "e.bin").write_bytes(raw)
        with pytest.raises(FileFormatError, match="does not match"):
            read_embeddings(tmp_path / "e.bin")

    def test_nan_payload(self, tmp_path):
        payload = struct.pack("<ff", 1.0, float("nan"))
        (tmp_path / "e.bin").write_bytes(b"EMB1" + struct.pack("<III", 1, 2, 0) + payload)
        with pytest.raises(FileFormatError, match="NaN"):
            read_embeddings(tmp_path / "e.bin")

    def test_refuses_to_write_nan(self, tmp_path):
        with pytest.raises(ValueError):
            write_embeddings(tmp_path / "e.bin", [[np.nan]])
        assert not (tmp_path / "e.bin").exists()


class TestLabels:
    def test_round_trip(self, tmp_path):
        write_labels(tmp_path / "l.csv", [0, 1, 1], [2, 0, 1])
        assert (tmp_path / "l.csv").read_text().splitlines()[0] == "index,domain_label,class_label"
        dom, cls = read_labels(tmp_path / "l.csv", 3)
        np.testing.assert_array_equal(dom, [0, 1, 1])
        np.testing.assert_array_equal(cls, [2, 0, 1])

    def test_unordered_rows(self, tmp_path):
        (tmp_path / "l.csv").write_text("index,domain_label,class_label\n1,5,6\n0,3,4\n")
        dom, cls = read_labels(tmp_path / "l.csv")
        np.testing.assert_array_equal(dom, [3, 5])
        np.testing.assert_array_equal(cls, [4, 6])

    @pytest.mark.parametrize("text,match", [
        ("idx,domain_label,class_label\n0,0,0\n", "header"),
        ("index,domain_label,class_label\n0,a,0\n", "non-integer"),
        ("index,domain_label,class_label\n0,0,0\n0,1,1\n", "indices"),
        ("index,domain_label,class_label\n0,-1,0\n", ">= 0"),
    ])
    def test_malformed(self, tmp_path, text, match):
        (tmp_path / "l.csv").write_text(text)
        with pytest.raises(FileFormatError, match=match):
            read_labels(tmp_path / "l.csv")

    def test_count_mismatch(self, tmp_path):
        write_labels(tmp_path / "l.csv", [0, 1], [0, 1])
        with pytest.raises(FileFormatError, match="expected 3"):
            read_labels(tmp_path / "l.csv", 3)


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "out.bin"
    target.write_bytes(b"old")
    with pytest.raises(RuntimeError):
        with atomic_write(target) as fh:
            fh.write(b"partial")
            raise RuntimeError("boom")
    assert target.read_bytes() == b"old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.bin"]
