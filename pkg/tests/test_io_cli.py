import json
import os
import struct

import numpy as np
import pytest

from bettimatch import (
    MalformedFile,
    NotTwoDimensional,
    UnsupportedFormat,
    betti_matching_loss,
    build_grid,
    compute_barcode,
)
from bettimatch.cli import main
from bettimatch.io import (
    barcode_record,
    dumps_canonical,
    interval_record,
    load_image,
)
from conftest import FIG4_I, FIG4_J1, random_binary


# -- loaders -----------------------------------------------------------------


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "i.csv"
    np.savetxt(path, FIG4_I, delimiter=",")
    assert np.array_equal(load_image(str(path)), FIG4_I)


def test_csv_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,not_a_number\n")
    with pytest.raises(MalformedFile):
        load_image(str(path))


def test_pgm_ascii(tmp_path):
    path = tmp_path / "img.pgm"
    path.write_text("P2\n# a comment\n3 2\n255\n0 128 255\n255 128 0\n")
    img = load_image(str(path))
    assert img.shape == (2, 3)
    assert img[0, 2] == 1.0
    assert img[0, 1] == pytest.approx(128 / 255)


def test_pgm_binary_8_and_16_bit(tmp_path):
    p8 = tmp_path / "img8.pgm"
    p8.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255]))
    img = load_image(str(p8))
    assert img[1, 1] == 1.0 and img[0, 0] == 0.0

    p16 = tmp_path / "img16.pgm"
    raster = struct.pack(">4H", 0, 1000, 30000, 65535)
    p16.write_bytes(b"P5\n2 2\n65535\n" + raster)
    img = load_image(str(p16))
    assert img[1, 1] == 1.0
    assert img[0, 1] == pytest.approx(1000 / 65535)


def test_pgm_malformed(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P5\n2 2\n255\n\x00\x01")  # truncated raster
    with pytest.raises(MalformedFile):
        load_image(str(path))
    path.write_bytes(b"P7\n2 2\n255\n\x00\x01\x02\x03")
    with pytest.raises(MalformedFile):
        load_image(str(path), fmt="pgm")


def test_npy_roundtrip_and_errors(tmp_path):
    path = tmp_path / "a.npy"
    np.save(path, FIG4_I)
    assert np.array_equal(load_image(str(path)), FIG4_I)

    np.save(path, np.zeros((2, 2, 2)))
    with pytest.raises(NotTwoDimensional):
        load_image(str(path))

    np.save(path, np.zeros((2, 2), dtype=np.int32))
    with pytest.raises(UnsupportedFormat):
        load_image(str(path))

    np.save(path, (FIG4_I % 7).astype(np.uint8))
    img = load_image(str(path))
    assert img.dtype == np.float64 and img.max() > 1.0  # raw values, no scaling


def test_format_sniffing(tmp_path):
    path = tmp_path / "mystery"
    np.save(path, FIG4_I)
    os.rename(str(path) + ".npy", str(path))
    assert np.array_equal(load_image(str(path)), FIG4_I)
    bad = tmp_path / "noidea"
    bad.write_bytes(b"\x00\x01\x02")
    with pytest.raises(UnsupportedFormat):
        load_image(str(bad))


# -- canonical JSON ------------------------------------------------------------


def test_dumps_canonical_deterministic_and_exact():
    a = {"b": 1.0 / 3.0, "a": [1, 2.5, None, True], "c": "x"}
    b = {"c": "x", "a": [1, 2.5, None, True], "b": 1.0 / 3.0}
    assert dumps_canonical(a) == dumps_canonical(b)
    rng = np.random.default_rng(50)
    for _ in range(200):
        x = float(rng.standard_normal() * 10.0 ** float(rng.integers(-8, 8)))
        assert json.loads(dumps_canonical(x)) == x


def test_barcode_json_roundtrip_bit_exact():
    rng = np.random.default_rng(51)
    img = rng.random((6, 6))
    bc = compute_barcode(build_grid(img, "v", "superlevel"))
    rec = barcode_record(bc)
    back = json.loads(dumps_canonical(rec))
    fresh = json.loads(dumps_canonical(barcode_record(bc)))
    assert back == fresh
    for dim in ("0", "1"):
        originals = [interval_record(iv) for iv in bc.finite(int(dim))]
        assert back["dims"][dim] == json.loads(dumps_canonical(originals))


# -- CLI -----------------------------------------------------------------------


def _write_fig4(tmp_path):
    i = tmp_path / "i.csv"
    j = tmp_path / "j1.csv"
    np.savetxt(i, FIG4_I, delimiter=",")
    np.savetxt(j, FIG4_J1, delimiter=",")
    return str(i), str(j)


def test_cli_usage_errors(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["match", "only_one_arg"]) == 1
    capsys.readouterr()


def test_cli_missing_file_is_data_error(tmp_path, capsys):
    assert main(["barcode", str(tmp_path / "nope.csv")]) == 2
    capsys.readouterr()


def test_cli_match_fig4(tmp_path, capsys):
    i, j = _write_fig4(tmp_path)
    assert main(["match", i, j, "--filtration", "sublevel"]) == 0
    out = json.loads(capsys.readouterr().out)
    m = out["levels"][0]["dims"]["1"]["matched"]
    assert len(m) == 1
    assert (m[0]["pred"]["birth"], m[0]["pred"]["death"]) == (27.0, 49.0)
    assert (m[0]["gt"]["birth"], m[0]["gt"]["death"]) == (7.0, 39.0)


def test_cli_deterministic_output(tmp_path, capsys):
    i, j = _write_fig4(tmp_path)
    assert main(["match", i, j, "--filtration", "sublevel"]) == 0
    first = capsys.readouterr().out
    assert main(["match", i, j, "--filtration", "sublevel"]) == 0
    assert capsys.readouterr().out == first


def test_cli_loss_identity_and_gradient(tmp_path, capsys):
    rng = np.random.default_rng(52)
    img = rng.random((8, 8))
    g = tmp_path / "g.npy"
    np.save(g, img)
    assert main(["loss", str(g), str(g)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["loss"] == 0.0

    other = tmp_path / "p.npy"
    np.save(other, rng.random((8, 8)))
    grad_path = tmp_path / "grad.npy"
    assert main(["loss", str(other), str(g), "--grad", str(grad_path)]) == 0
    capsys.readouterr()
    grad = np.load(grad_path)
    want = betti_matching_loss(np.load(other), img, with_gradient=True).gradient
    assert np.array_equal(grad, want)


def test_cli_barcode_csv(tmp_path, capsys):
    i, _ = _write_fig4(tmp_path)
    assert main(["barcode", i, "--filtration", "sublevel", "--format", "csv"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0].startswith("filtration,dim,birth,death")
    assert any(r.startswith("sublevel,1,27.0,49.0") for r in rows)


def test_cli_eval(tmp_path, capsys):
    rng = np.random.default_rng(53)
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    for k in range(3):
        p = random_binary(rng, (9, 9))
        g = random_binary(rng, (9, 9))
        np.save(pred_dir / f"s{k}.npy", p)
        np.save(gt_dir / f"s{k}.npy", g)
    np.save(pred_dir / "unpaired.npy", np.zeros((4, 4)))

    assert main(["eval", "--pred-dir", str(pred_dir), "--gt-dir", str(gt_dir)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["pairs"]) == 3
    for metric in ("dice", "tau_err", "beta_err", "wasserstein_loss"):
        vals = [p[metric] for p in out["pairs"]]
        assert out["aggregate"][metric] == pytest.approx(float(np.mean(vals)))
        # loss/metric identity on binarized inputs
    for p in out["pairs"]:
        assert p["betti_matching_loss"] == p["tau_err"]
        assert p["beta_err"] == pytest.approx(2 * p["wasserstein_loss"])

    assert main(["eval", "--pred-dir", str(pred_dir), "--gt-dir", str(gt_dir),
                 "--format", "csv"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0].startswith("name,dice,accuracy")
    assert rows[-1].startswith("mean,")
    assert len(rows) == 5  # header + 3 pairs + mean


def test_cli_eval_respects_thread_env(tmp_path, capsys, monkeypatch):
    rng = np.random.default_rng(54)
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    for k in range(2):
        np.save(pred_dir / f"s{k}.npy", random_binary(rng, (6, 6)))
        np.save(gt_dir / f"s{k}.npy", random_binary(rng, (6, 6)))
    monkeypatch.setenv("BETTI_MATCH_THREADS", "1")
    assert main(["eval", "--pred-dir", str(pred_dir), "--gt-dir", str(gt_dir)]) == 0
    capsys.readouterr()


def test_cli_verify_and_exit_codes(tmp_path, capsys):
    assert main(["verify", "--random", "5", "--size", "4", "--seed", "9"]) == 0
    capsys.readouterr()
    i, j = _write_fig4(tmp_path)
    assert main(["verify", i, j, "--filtration", "sublevel"]) == 0
    capsys.readouterr()


def test_cli_figures(tmp_path, capsys):
    i, j = _write_fig4(tmp_path)
    figdir = tmp_path / "figs"
    assert main(["match", i, j, "--filtration", "sublevel",
                 "--figures", str(figdir), "-o", str(tmp_path / "out.json")]) == 0
    pngs = list(figdir.glob("*.png"))
    assert len(pngs) == 1
    assert (tmp_path / "out.json").exists()
    capsys.readouterr()


def test_cli_bench_custom(capsys):
    assert main(["bench", "--size", "12", "--trials", "3", "--seed", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["runs"][0]["size"] == 12
    assert out["runs"][0]["trials"] == 3
