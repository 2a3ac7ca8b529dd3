import math
import subprocess
import sys

import numpy as np
import pytest

from batchstyles.cli import main
from batchstyles.fileio import read_png, save_images, split_grid, write_embeddings, write_labels
from oracles import random_unit


@pytest.fixture
def image_dir(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.integers(0, 256, size=(4, 3, 8, 8)) / 255.0
    save_images(X, tmp_path / "in")
    return tmp_path / "in", X


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestAugment:
    def test_mode_none_reproduces_input(self, image_dir, tmp_path, capsys):
        src, X = image_dir
        out = tmp_path / "g.png"
        code, _, _ = run(["augment", "--input", str(src), "--output", str(out),
                          "--mode", "none", "--views", "1"], capsys)
        assert code == 0
        np.testing.assert_array_equal(split_grid(read_png(out), 4, 1)[:, 0], X)

    @pytest.mark.parametrize("extra", [["--mode", "bss"], ["--mode", "fa", "--views", "3"],
                                       ["--r-sweep", "0.1,0.5,1.0"]])
    def test_same_seed_same_bytes(self, image_dir, tmp_path, capsys, extra):
        src, _ = image_dir
        paths = [tmp_path / "a.png", tmp_path / "b.png"]
        for p in paths:
            assert run(["augment", "--input", str(src), "--output", str(p), "--seed", "42"]
                       + extra, capsys)[0] == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_grid_shape(self, image_dir, tmp_path, capsys):
        src, _ = image_dir
        out = tmp_path / "g.png"
        run(["augment", "--input", str(src), "--output", str(out), "--views", "3"], capsys)
        assert read_png(out).shape == (3, 4 * 8 + 3 * 2, 3 * 8 + 2 * 2)

    def test_inverted_ratio_range(self, image_dir, tmp_path, capsys):
        src, _ = image_dir
        with pytest.raises(SystemExit) as exc:
            main(["augment", "--input", str(src), "--output", str(tmp_path / "g.png"),
                  "--r-min", "0.6", "--r-max", "0.2"])
        assert exc.value.code == 2
        assert "invalid ratio range" in capsys.readouterr().err
        assert not (tmp_path / "g.png").exists()

    def test_too_many_bss_views(self, image_dir, tmp_path):
        src, _ = image_dir
        with pytest.raises(SystemExit) as exc:
            main(["augment", "--input", str(src), "--output", str(tmp_path / "g.png"),
                  "--views", "5"])
        assert exc.value.code == 2

    def test_missing_input(self, tmp_path, capsys):
        code, _, err = run(["augment", "--input", str(tmp_path / "nope"),
                            "--output", str(tmp_path / "g.png")], capsys)
        assert code == 1 and "no PNG" in err


@pytest.fixture
def clusters(tmp_path):
    rng = np.random.default_rng(1)
    x = np.concatenate([np.eye(4)[0] + 0.05 * rng.normal(size=(10, 4)),
                        np.eye(4)[1] + 0.05 * rng.normal(size=(10, 4))])
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    write_embeddings(tmp_path / "e.bin", x, normalized=True)
    write_labels(tmp_path / "l.csv", np.repeat([0, 1], 10), np.zeros(20, int))
    write_embeddings(tmp_path / "p.bin", np.eye(4)[:2], normalized=True)
    return tmp_path


class TestMetrics:
    def test_purity(self, clusters, capsys):
        code, out, _ = run(["metrics", "purity", "--emb", str(clusters / "e.bin"),
                            "--labels", str(clusters / "l.csv"), "--k", "5,9"], capsys)
        assert code == 0
        assert out.splitlines() == ["5,1.000000", "9,1.000000"]

    def test_purity_k_out_of_range(self, clusters):
        with pytest.raises(SystemExit) as exc:
            main(["metrics", "purity", "--emb", str(clusters / "e.bin"),
                  "--labels", str(clusters / "l.csv"), "--k", "20"])
        assert exc.value.code == 2

    @pytest.mark.parametrize("label,expected", [("class", "1.000000"), ("domain", "1.000000")])
    def test_homogeneity(self, clusters, capsys, label, expected):
        code, out, _ = run(["metrics", "homogeneity", "--emb", str(clusters / "e.bin"),
                            "--labels", str(clusters / "l.csv"), "--protos",
                            str(clusters / "p.bin"), "--label", label], capsys)
        assert code == 0 and out.strip() == expected

    def test_negsim(self, clusters, capsys):
        code, out, _ = run(["metrics", "negsim", "--emb", str(clusters / "e.bin"),
                            "--views", "2", "--bins", "10"], capsys)
        lines = out.splitlines()
        assert code == 0 and len(lines) == 10
        assert lines[0].startswith("-1.000000,-0.800000,")
        assert sum(int(line.split(",")[2]) for line in lines) == 10 * 2 * 9 * 2

    def test_bad_magic(self, tmp_path, capsys):
        (tmp_path / "e.bin").write_bytes(b"XXXX" + bytes(12))
        write_labels(tmp_path / "l.csv", [0], [0])
        code, _, err = run(["metrics", "purity", "--emb", str(tmp_path / "e.bin"),
                            "--labels", str(tmp_path / "l.csv")], capsys)
        assert code == 1 and "bad magic" in err


class TestLoss:
    def test_ntxent_identical(self, tmp_path, capsys):
        write_embeddings(tmp_path / "e.bin", np.tile([[0.6, 0.8]], (8, 1)))
        code, out, _ = run(["loss", "ntxent", "--emb", str(tmp_path / "e.bin"),
                            "--contents", "4", "--views", "2"], capsys)
        assert code == 0
        assert abs(float(out) - math.log(7)) <= 1e-9

    def test_ntxent_default_temperature(self, tmp_path, capsys):
        z = random_unit(np.random.default_rng(2), (6, 5)).astype(np.float32)
        write_embeddings(tmp_path / "e.bin", z)
        argv = ["loss", "ntxent", "--emb", str(tmp_path / "e.bin"), "--contents", "3",
                "--views", "2"]
        default = run(argv, capsys)[1]
        explicit = run(argv + ["--temp", "0.5"], capsys)[1]
        other = run(argv + ["--temp", "0.1"], capsys)[1]
        assert default == explicit != other

    def test_row_count_mismatch(self, tmp_path):
        write_embeddings(tmp_path / "e.bin", np.ones((5, 2)))
        with pytest.raises(SystemExit) as exc:
            main(["loss", "ntxent", "--emb", str(tmp_path / "e.bin"),
                  "--contents", "3", "--views", "2"])
        assert exc.value.code == 2

    def test_swav(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        write_embeddings(tmp_path / "e.bin", random_unit(rng, (4 * 4, 6)))
        write_embeddings(tmp_path / "p.bin", random_unit(rng, (5, 6)))
        code, out, _ = run(["loss", "swav", "--emb", str(tmp_path / "e.bin"),
                            "--contents", "4", "--views", "4",
                            "--protos", str(tmp_path / "p.bin")], capsys)
        assert code == 0 and math.isfinite(float(out)) and float(out) >= 0

    def test_msn(self, tmp_path, capsys):
        rng = np.random.default_rng(4)
        write_embeddings(tmp_path / "m.bin", random_unit(rng, (3 * 2, 6)))
        write_embeddings(tmp_path / "t.bin", random_unit(rng, (3, 6)))
        write_embeddings(tmp_path / "p.bin", random_unit(rng, (4, 6)))
        code, out, _ = run(["loss", "msn", "--emb", str(tmp_path / "m.bin"),
                            "--contents", "3", "--views", "2",
                            "--targets", str(tmp_path / "t.bin"),
                            "--protos", str(tmp_path / "p.bin")], capsys)
        assert code == 0 and math.isfinite(float(out))

    def test_msn_temperature_order(self, tmp_path):
        write_embeddings(tmp_path / "e.bin", np.eye(2))
        with pytest.raises(SystemExit) as exc:
            main(["loss", "msn", "--emb", str(tmp_path / "e.bin"), "--contents", "2",
                  "--views", "1", "--targets", str(tmp_path / "e.bin"),
                  "--protos", str(tmp_path / "e.bin"), "--tau", "0.01"])
        assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    write_embeddings(tmp_path / "e.bin", np.tile([[1.0, 0.0]], (4, 1)))
    proc = subprocess.run(
        [sys.executable, "-m", "batchstyles", "loss", "ntxent", "--emb", str(tmp_path / "e.bin"),
         "--contents", "2", "--views", "2"],
        capture_output=True, text=True, check=True,
    )
    assert abs(float(proc.stdout) - math.log(3)) <= 1e-9


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
