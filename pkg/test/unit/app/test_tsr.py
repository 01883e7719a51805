"""
Test the command-line script
"""

import struct
import zlib

import numpy as np
import pytest

from tensor_sr.helper.exception import ConfigError
from tensor_sr.image import GrayImage, downsample
from tensor_sr.app.config import CliConfig, parse_config, config_help
from tensor_sr.app.tsr import main

CONFIG = """
# small model
a = 4
r = 7
c = 2
m = 16
n = 4
lambda = 0.01   # sparsity
T = 2
S = 10
N = 300
seed = 3
"""


def stripes(p: int, q: int, angle: float, period: float) -> GrayImage:
    i, j = np.indices((p, q))
    phase = 2 * np.pi * (j * np.cos(angle) + i * np.sin(angle)) / period
    return GrayImage(0.5 + 0.4 * np.sin(phase))


def run(args, code: int = None):
    """Run the script; check the exit code if one is expected"""
    if code is None:
        main([str(a) for a in args])
        return
    with pytest.raises(SystemExit) as e:
        main([str(a) for a in args])
    assert e.value.code == code


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A directory with training images, a configuration and a trained model"""
    base = tmp_path_factory.mktemp("tsr")
    images = base / "images"
    images.mkdir()
    stripes(16, 16, 0.3, 5.0).save(images / "a.png")
    stripes(16, 16, 1.2, 7.0).save(images / "b.pgm")
    (base / "tsr.cfg").write_text(CONFIG, encoding="utf-8")
    run(["train", "--config", base / "tsr.cfg", "--images", images,
         "--out", base / "model.tsr", "-v", "0"])
    return base


# -----------------------------------------------------------------------


def test10_parse_config():
    """
    Test reading configuration values
    """
    cfg = parse_config(CONFIG)
    assert (cfg.a, cfg.m, cfg.lam, cfg.T, cfg.S, cfg.N, cfg.seed) == \
        (4, 16, 0.01, 2, 10, 300, 3)
    assert cfg.tol == CliConfig().tol
    spec = cfg.train_spec(["x.png"])
    assert (spec.atoms, spec.outer_iter, spec.fold.sample_budget) == (16, 2, 300)
    assert spec.sparse.lam == 0.01 and spec.fold.seed == 3
    assert parse_config("monotone = restart").sparse_config().monotone == "restart"


@pytest.mark.parametrize("text, msg", [
    ("foo = 1", "unknown configuration key"),
    ("a = x", "invalid value"),
    ("a = 4\na = 4", "duplicate configuration key"),
    ("a 4", "expected 'key = value'"),
    ("n = 3", "n == a"),
    ("a = 1\nn = 1", "a >= 2"),
    ("m = 0", "m >= 1"),
    ("monotone = other", "monotone must be one of"),
])
def test11_config_errors(text, msg):
    """
    Test invalid configurations
    """
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert msg in str(e.value)


def test12_config_help():
    """
    Test the list of keys shown in the help
    """
    text = config_help()
    assert "lambda" in text and "(default: 0.05)" in text
    assert "(default: 128)" in text
    assert "TSR_THREADS" in text and "BLAS" in text


# -----------------------------------------------------------------------


def test20_train(workdir, tmp_path, capsys):
    """
    Test the train command output
    """
    run(["train", "--config", workdir / "tsr.cfg", "--images", workdir / "images",
         "--out", tmp_path / "m.tsr"])
    out, err = capsys.readouterr()
    lines = [ln for ln in out.splitlines() if ln.startswith("iteration")]
    assert len(lines) == 2
    assert lines[0].startswith("iteration 1: objective ")
    assert err == ""
    assert (tmp_path / "m.tsr").read_bytes() == (workdir / "model.tsr").read_bytes()


def test21_train_usage(workdir, tmp_path, capsys):
    """
    Test usage errors of the train command
    """
    run(["train", "--out", tmp_path / "m.tsr"], code=2)
    _, err = capsys.readouterr()
    assert "--images" in err
    bad = tmp_path / "bad.cfg"
    bad.write_text("a = 1\nn = 1\n", encoding="utf-8")
    run(["train", "--config", bad, "--images", workdir / "images",
         "--out", tmp_path / "m.tsr"], code=2)
    _, err = capsys.readouterr()
    assert err.startswith("Error: ") and "a >= 2" in err
    run(["train", "--images", tmp_path / "none", "--out", tmp_path / "m.tsr"], code=2)


def test22_train_progress(workdir, tmp_path, capsys):
    """
    Test that the progress messages of the most verbose level go to the
    standard output
    """
    run(["train", "--config", workdir / "tsr.cfg", "--images", workdir / "images",
         "--out", tmp_path / "m.tsr", "--verbose", "2"])
    out, err = capsys.readouterr()
    assert err == ""
    assert ". Loading 2 training images" in out
    assert ". Building tensors (a=4, r=7, c=2)" in out


# -----------------------------------------------------------------------


def test30_superres(workdir, tmp_path, capsys):
    """
    Test super-resolving a single image
    """
    downsample(stripes(16, 16, 0.6, 5.0), 2).save(tmp_path / "low.png")
    run(["superres", "--model", workdir / "model.tsr", "--input", tmp_path / "low.png",
         "--out", tmp_path / "high.png"])
    out, _ = capsys.readouterr()
    assert "output: 16x16" in out
    assert GrayImage.load(tmp_path / "high.png").shape == (16, 16)


def test31_superres_formats(workdir, tmp_path):
    """
    Test that PGM and PNG inputs with the same pixels give the same output
    """
    low = downsample(stripes(16, 16, 0.8, 6.0), 2)
    low.save(tmp_path / "low.png")
    low.save(tmp_path / "low.pgm")
    for ext in ("png", "pgm"):
        run(["superres", "--model", workdir / "model.tsr", "--input",
             tmp_path / ("low." + ext), "--out", tmp_path / ("out-" + ext + ".png")])
    assert GrayImage.load(tmp_path / "out-png.png") == \
        GrayImage.load(tmp_path / "out-pgm.png")


def test32_superres_directory(workdir, tmp_path):
    """
    Test super-resolving a directory of images
    """
    indir = tmp_path / "low"
    indir.mkdir()
    downsample(stripes(16, 16, 0.6, 5.0), 2).save(indir / "x.png")
    run(["superres", "--model", workdir / "model.tsr", "--input", indir,
         "--out", tmp_path / "out", "--lambda", "0.05"])
    assert GrayImage.load(tmp_path / "out" / "x.png").shape == (16, 16)


def test33_missing_model(tmp_path, capsys):
    """
    Test a model file that does not exist
    """
    run(["superres", "--model", tmp_path / "none.tsr", "--input", tmp_path / "low.png",
         "--out", tmp_path / "high.png"], code=2)
    _, err = capsys.readouterr()
    assert err.startswith("Error: ")


def test34_corrupted_model(workdir, tmp_path, capsys):
    """
    Test a model file with a flipped byte
    """
    data = bytearray((workdir / "model.tsr").read_bytes())
    data[200] ^= 0x01
    (tmp_path / "bad.tsr").write_bytes(bytes(data))
    run(["inspect", "--model", tmp_path / "bad.tsr"], code=1)
    _, err = capsys.readouterr()
    assert err.strip() == "Error: model checksum mismatch"


def test35_invalid_model_header(workdir, tmp_path, capsys):
    """
    Test a model whose header gives an invalid configuration, with a valid
    checksum
    """
    data = bytearray((workdir / "model.tsr").read_bytes())
    struct.pack_into("<2b", data, 50, 0, 0)
    struct.pack_into("<I", data, len(data) - 4, zlib.crc32(bytes(data[:-4])))
    (tmp_path / "bad.tsr").write_bytes(bytes(data))
    run(["inspect", "--model", tmp_path / "bad.tsr"], code=1)
    _, err = capsys.readouterr()
    assert err.startswith("Error: invalid model header")


# -----------------------------------------------------------------------


def test40_inspect(workdir, capsys):
    """
    Test printing the model contents
    """
    run(["inspect", "--model", workdir / "model.tsr"])
    out, _ = capsys.readouterr()
    assert "format: TSR1 version 1" in out
    assert "a=4 r=7 c=2 m=16 n=4 d_h=16 d_l=96" in out
    line = next(ln for ln in out.splitlines() if ln.startswith("atom norm^2:"))
    assert float(line.split("max=")[1]) <= 1 + 1e-9
    assert "training: T=2 S=10" in out


def test41_eval(workdir, tmp_path, capsys):
    """
    Test evaluating a model and saving the report
    """
    report = tmp_path / "report.csv"
    run(["eval", "--model", workdir / "model.tsr", "--truth-dir", workdir / "images",
         "--save-report", report])
    out, _ = capsys.readouterr()
    lines = out.splitlines()
    assert lines[0].split() == ["image", "PSNR", "bicubic", "baseline"]
    assert [ln.split()[0] for ln in lines[1:]] == ["a.png", "b.pgm", "mean"]
    assert report.read_text(encoding="utf-8").startswith("image,psnr,")
