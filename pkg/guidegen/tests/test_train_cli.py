"""Training loop, checkpointing, and the command-line front end."""

import csv
import math

import pytest
import torch

from guidegen.cli import main
from guidegen.formats import decode_guidance_weights, decode_obstacles
from guidegen.train import CURVE_COLUMNS, build_models

from rasterutil import make_entry, png_bytes


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def write_corpus(root, split: str, side: int):
    """One-entry corpus at the given side length; returns the manifest path."""
    for sub in ("maps", "tasks", "guidance"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    q = side // 4
    base, task, guide = make_entry(
        bar_cols=(2 * q - 1, 2 * q), door_rows=range(q, 3 * q),
        start=(4, 2 * q), goal=(side - 5, 2 * q),
        band_rows=range(2 * q - 2, 2 * q + 3), side=side)
    (root / "maps" / "m.png").write_bytes(png_bytes(base))
    (root / "tasks" / "m.png").write_bytes(png_bytes(task))
    (root / "guidance" / "m.png").write_bytes(png_bytes(guide))
    manifest = root / "manifest"
    manifest.write_text(
        f"m,corridor,1,{split},maps/m.png,tasks/m.png,guidance/m.png\n")
    return manifest


@pytest.fixture(scope="module")
def small_run(tiny_corpus, tmp_path_factory):
    """A short train run on the tiny corpus, shared by the CLI tests."""
    out = tmp_path_factory.mktemp("small-run")
    rc = main(["train", "--manifest", str(tiny_corpus), "--out", str(out),
               "--epochs", "2", "--batch-size", "2", "--seed", "3",
               "--units-per-stage", "1"])
    assert rc == 0
    return out


def test_train_writes_checkpoint_and_curves(small_run):
    assert (small_run / "checkpoint.pt").is_file()
    with (small_run / "curves.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CURVE_COLUMNS
    assert len(rows) == 3
    assert [r[0] for r in rows[1:]] == ["1", "2"]
    for row in rows[1:]:
        # tiny_corpus has a test split, so every column is populated
        assert all(math.isfinite(float(cell)) for cell in row[1:])


def test_zero_epochs_saves_the_seeded_init(tiny_corpus, tmp_path, capsys):
    rc, out, _ = run(capsys, "train", "--manifest", str(tiny_corpus),
                     "--out", str(tmp_path), "--epochs", "0", "--seed", "5",
                     "--units-per-stage", "1")
    assert rc == 0
    assert "generator parameters:" in out
    with (tmp_path / "curves.csv").open(newline="") as fh:
        assert list(csv.reader(fh)) == [CURVE_COLUMNS]

    ckpt = torch.load(tmp_path / "checkpoint.pt", weights_only=True)
    assert tuple(ckpt["resolution"]) == (32, 32)
    assert ckpt["epochs"] == 0 and ckpt["seed"] == 5
    # an untrained checkpoint is exactly the seeded initialisation
    torch.manual_seed(5)
    generator, discriminator = build_models(ckpt["generator_config"])
    for fresh, saved in ((generator.state_dict(), ckpt["generator"]),
                         (discriminator.state_dict(), ckpt["discriminator"])):
        assert fresh.keys() == saved.keys()
        assert all(torch.equal(fresh[k], saved[k]) for k in fresh)


def test_same_seed_reproduces_the_run(tiny_corpus, tmp_path):
    argv = ["train", "--manifest", str(tiny_corpus), "--epochs", "2",
            "--batch-size", "2", "--seed", "9", "--units-per-stage", "1"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "curves.csv").read_bytes() == \
        (tmp_path / "b" / "curves.csv").read_bytes()
    first = torch.load(tmp_path / "a" / "checkpoint.pt", weights_only=True)
    second = torch.load(tmp_path / "b" / "checkpoint.pt", weights_only=True)
    assert all(torch.equal(first["generator"][k], second["generator"][k])
               for k in first["generator"])


def test_missing_train_split_is_an_error(tmp_path, capsys):
    manifest = write_corpus(tmp_path, split="test", side=32)
    rc, _, err = run(capsys, "train", "--manifest", str(manifest),
                     "--out", str(tmp_path / "out"), "--epochs", "1")
    assert rc == 1
    assert "no train entries" in err


def test_resolution_must_fit_the_downsampling(tmp_path, capsys):
    manifest = write_corpus(tmp_path, split="train", side=24)
    rc, _, err = run(capsys, "train", "--manifest", str(manifest),
                     "--out", str(tmp_path / "out"), "--epochs", "1")
    assert rc == 1
    assert "multiple of 16" in err


def test_infer_writes_valid_guidance(small_run, tiny_corpus, tmp_path, capsys):
    maps = tiny_corpus.parent
    argv = ("infer", "--checkpoint", str(small_run / "checkpoint.pt"),
            "--map", str(maps / "maps" / "e0.png"),
            "--task", str(maps / "tasks" / "e0.png"))
    rc, _, _ = run(capsys, *argv, "--out", str(tmp_path / "pred.png"),
                   "--seed", "1")
    assert rc == 0
    data = (tmp_path / "pred.png").read_bytes()
    weight = decode_guidance_weights(data)
    assert weight.shape == (32, 32)
    assert weight.min() >= 0.0 and weight.max() <= 1.0
    obstacle = decode_obstacles((maps / "maps" / "e0.png").read_bytes())
    assert (weight[obstacle] == 0.0).all()
    assert (decode_obstacles(data) == obstacle).all()

    # the seed picks the noise sample: same seed, same image
    assert run(capsys, *argv, "--out", str(tmp_path / "again.png"),
               "--seed", "1")[0] == 0
    assert (tmp_path / "again.png").read_bytes() == data
    assert run(capsys, *argv, "--out", str(tmp_path / "other.png"),
               "--seed", "2")[0] == 0
    assert (tmp_path / "other.png").read_bytes() != data


def test_infer_resolution_mismatch(small_run, tmp_path, capsys):
    manifest = write_corpus(tmp_path, split="train", side=48)
    rc, _, err = run(capsys, "infer",
                     "--checkpoint", str(small_run / "checkpoint.pt"),
                     "--map", str(manifest.parent / "maps" / "m.png"),
                     "--task", str(manifest.parent / "tasks" / "m.png"),
                     "--out", str(tmp_path / "pred.png"))
    assert rc == 1
    assert "trained at" in err


def test_report_size_counts_blocks(capsys):
    rc, out, _ = run(capsys, "report-size", "--resolution", "32",
                     "--units-per-stage", "1")
    assert rc == 0
    assert "generator:" in out and "discriminator:" in out
    assert "closed-form mismatches: 0" in out


def test_usage_errors_exit_2(tmp_path, capsys):
    for argv in (["train"],
                 ["train", "--manifest", "m", "--out", "o", "--epochs", "-1"],
                 ["infer", "--checkpoint", "c"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    capsys.readouterr()
