"""File-contract codecs: PNG rasters and the corpus manifest."""

import numpy as np
import pytest

from guidegen.formats import (decode_guidance_weights, decode_obstacles,
                              decode_task_masks, encode_guidance_png,
                              read_manifest)

from rasterutil import make_entry, png_bytes


def test_obstacle_decoding_uses_the_luma_rule():
    arr = np.full((8, 8, 3), 255, dtype=np.uint8)
    arr[0, 0] = (0, 0, 0)
    arr[0, 1] = (127, 127, 127)  # just below mid-grey: obstacle
    arr[0, 2] = (128, 128, 128)  # at mid-grey: free
    arr[1, 0] = (0, 0, 255)      # pure markers stay free despite low luma
    arr[1, 1] = (255, 0, 0)
    arr[1, 2] = (0, 255, 0)
    obstacle = decode_obstacles(png_bytes(arr))
    assert obstacle[0, 0] and obstacle[0, 1]
    assert not obstacle[0, 2]
    assert not obstacle[1, 0] and not obstacle[1, 1] and not obstacle[1, 2]
    assert obstacle.sum() == 2


def test_task_masks_round_trip():
    base, task, _ = make_entry(bar_cols=(14, 15), door_rows=range(12, 20),
                               start=(6, 16), goal=(26, 16),
                               band_rows=range(14, 19))
    start, goal = decode_task_masks(png_bytes(task))
    ys, xs = np.nonzero(start)
    assert (round(xs.mean()), round(ys.mean())) == (6, 16)
    ys, xs = np.nonzero(goal)
    assert (round(xs.mean()), round(ys.mean())) == (26, 16)
    # markers do not disturb the occupancy decoding
    assert np.array_equal(decode_obstacles(png_bytes(task)),
                          decode_obstacles(png_bytes(base)))
    with pytest.raises(ValueError, match="start"):
        decode_task_masks(png_bytes(base))


def test_guidance_encode_decode_round_trip():
    rng = np.random.default_rng(2)
    weight = rng.uniform(0.0, 1.0, size=(24, 20))
    obstacle = rng.uniform(size=(24, 20)) < 0.2
    weight[obstacle] = 0.0
    data = encode_guidance_png(weight, obstacle)
    decoded = decode_guidance_weights(data)
    # quantised to 1/255 steps on free cells, zero on obstacles
    assert np.allclose(decoded[~obstacle],
                       np.round(weight[~obstacle] * 255.0) / 255.0)
    assert (decoded[obstacle] == 0.0).all()
    assert np.array_equal(decode_obstacles(data), obstacle)


def test_guidance_encoder_validation():
    ok = np.zeros((8, 8))
    with pytest.raises(ValueError, match="matching"):
        encode_guidance_png(ok, np.zeros((8, 9), dtype=bool))
    with pytest.raises(ValueError, match="within"):
        encode_guidance_png(ok + 1.5, np.zeros((8, 8), dtype=bool))
    with pytest.raises(ValueError, match="decode"):
        decode_guidance_weights(b"not a png")


def test_read_manifest(tiny_corpus):
    entries = read_manifest(tiny_corpus)
    assert [e.entry_id for e in entries] == ["e0", "e1", "e2"]
    assert [e.split for e in entries] == ["train", "train", "test"]
    assert all(e.map_path.is_file() for e in entries)
    assert entries[0].family == "corridor" and entries[0].seed == 1


def test_read_manifest_validation(tmp_path):
    bad = tmp_path / "manifest"
    bad.write_text("a,b,c\n")
    with pytest.raises(ValueError, match="7 fields"):
        read_manifest(bad)
    bad.write_text("e0,corridor,1,dev,m.png,t.png,g.png\n")
    with pytest.raises(ValueError, match="split"):
        read_manifest(bad)
    bad.write_text("e0,corridor,1,train,m.png,t.png,g.png\n")
    with pytest.raises(ValueError, match="missing file"):
        read_manifest(bad)
    for name in ("m", "t", "g"):
        (tmp_path / f"{name}.png").write_bytes(b"x")
    bad.write_text("e0,corridor,1,train,m.png,t.png,g.png\n"
                   "e0,corridor,2,test,m.png,t.png,g.png\n")
    with pytest.raises(ValueError, match="duplicate"):
        read_manifest(bad)
