import csv
import json
from pathlib import Path

import numpy as np
import pytest

from scriptorium import cli
from scriptorium.evaluation import evaluate_page
from scriptorium.ingest import decode_label_image, text_mask
from scriptorium.pageio import read_document
from scriptorium.pipeline import PipelineConfig, segment_page
from scriptorium.seams import SeamParams


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    spec = root / "corpus.spec"
    spec.write_text("count = 5\nseed = 3\nn = 700\nm = 500\nlines_min = 3\nlines_max = 5\nmargin = 40\n")
    assert cli.main(["synth", "-o", str(root / "pages"), "--spec", str(spec), "--jobs", "1"]) == 0
    return root / "pages"


def test_synth_writes_pages(corpus):
    assert len(list(corpus.glob("*.png"))) == 5
    assert len(list(corpus.glob("*.gt.xml"))) == 5
    assert len(list(corpus.glob("*.gt.json"))) == 5


def test_segment_then_eval(corpus, tmp_path):
    out = tmp_path / "pred"
    assert cli.main(["segment", str(corpus), "-o", str(out), "--json", "--overlay", "--jobs", "1"]) == 0
    assert len(list(out.glob("*.xml"))) == 5
    assert len(list(out.glob("*.json"))) == 5
    assert len(list(out.glob("*.overlay.png"))) == 5
    report = tmp_path / "report.json"
    assert cli.main(["eval", "--pred", str(out), "--gt", str(corpus), "--labels", str(corpus),
                     "--report", str(report), "--jobs", "1"]) == 0
    data = json.loads(report.read_text())
    assert data["corpus"]["pages"] == 5
    assert data["corpus"]["line_iu"] == 1.0


def test_segment_is_bit_identical_across_runs(corpus, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["segment", str(corpus), "-o", str(a), "--jobs", "1"]) == 0
    assert cli.main(["segment", str(corpus), "-o", str(b), "--jobs", "2"]) == 0
    for f in sorted(a.glob("*.xml")):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_sweep_grid_and_cell_equivalence(corpus, tmp_path):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--labels", str(corpus), "--gt", str(corpus), "--alphas", "60,120,180",
                     "--betas", "1,3,10", "-o", str(out), "--jobs", "1"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 9
    assert {(int(r["alpha"]), float(r["beta"])) for r in rows} == {(a, b) for a in (60, 120, 180) for b in (1, 3, 10)}
    cell = next(r for r in rows if int(r["alpha"]) == 180 and float(r["beta"]) == 10)

    # the same cell, computed page by page without the sweep machinery
    cfg = PipelineConfig(seams=SeamParams(180, 10.0))
    scores = []
    for png in sorted(corpus.glob("*.png")):
        labels = decode_label_image(png)
        pred = segment_page(labels, cfg).polygons
        gt = read_document(corpus / (png.stem + ".gt.xml"))
        rep = evaluate_page(pred, gt.polygons(), text_mask(labels))
        scores.append((rep.line_iu, rep.pixel_iu))
    li, pi = np.mean(scores, axis=0)
    assert float(cell["line_iu"]) == pytest.approx(li, abs=1e-6)
    assert float(cell["pixel_iu"]) == pytest.approx(pi, abs=1e-6)


def test_viz(corpus, tmp_path):
    png = sorted(corpus.glob("*.png"))[0]
    assert cli.main(["viz", str(png), "-o", str(tmp_path), "--gt", str(corpus / (png.stem + ".gt.xml"))]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    for suffix in (".B.png", ".T.png", ".S.png", ".E.png"):
        assert png.stem + suffix in names
    assert any("seams" in n for n in names) and any("eval" in n for n in names)


def _ns(**kw):
    import argparse
    return argparse.Namespace(command="segment", **kw)


def test_config_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("alpha = 90\nbeta = 1.5\nlocal-kernel = 16  # comment\n")
    cfg = cli.build_config(_ns(config=str(conf), alpha=60, beta=None, local_kernel=None))
    assert (cfg.alpha, cfg.beta, cfg.local_kernel, cfg.bin_threshold) == (60, 1.5, 16, 2)
    cfg = cli.build_config(_ns(config=None, alpha=None))
    assert (cfg.alpha, cfg.beta) == (120, 3.0)


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("gamma = 1\n")
    with pytest.raises(cli.InputError):
        cli.build_config(_ns(config=str(bad)))
    with pytest.raises(cli.InputError):
        cli.build_config(_ns(config=None, alpha=0))
    with pytest.raises(cli.InputError):
        cli.build_config(_ns(config=str(tmp_path / "missing.conf")))


def test_exit_codes(tmp_path, corpus):
    assert cli.main(["segment", str(tmp_path / "nothing-here"), "-o", str(tmp_path / "o")]) == 1
    assert cli.main(["segment", str(corpus), "-o", str(tmp_path / "o"), "--bogus-flag"]) == 1
    assert cli.main(["segment", str(corpus), "-o", str(tmp_path / "o"), "--alpha", "0"]) == 1
    junk = tmp_path / "junk"
    junk.mkdir()
    (junk / "broken.png").write_bytes(b"not a png")
    assert cli.main(["segment", str(junk), "-o", str(tmp_path / "o")]) == 1
    assert cli.main(["synth", "-o", str(tmp_path / "s"), "--spec", str(tmp_path / "none.spec")]) == 1


def test_internal_failure_exit_code(corpus, tmp_path, monkeypatch):
    from scriptorium import pipeline
    from scriptorium.polygons import FragmentationError

    def explode(*a, **k):
        raise FragmentationError("line fragmentation in bin 0")

    monkeypatch.setattr(pipeline, "bin_polygon", explode)
    png = sorted(corpus.glob("*.png"))[0]
    assert cli.main(["segment", str(png), "-o", str(tmp_path / "o"), "--jobs", "1"]) == 2


def test_empty_page_gives_empty_document(tmp_path):
    from PIL import Image

    rgb = np.zeros((40, 50, 3), np.uint8)
    rgb[..., 2] = 0x01
    Image.fromarray(rgb).save(tmp_path / "blank.png")
    assert cli.main(["segment", str(tmp_path / "blank.png"), "-o", str(tmp_path / "o")]) == 0
    assert read_document(tmp_path / "o" / "blank.xml").lines == []
