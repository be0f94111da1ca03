"""Command-line entry point: segment, eval, viz, sweep, synth.

Exit status: 0 on success, 1 on input errors (including pages that could
not be read), 2 when an internal invariant failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import pageio, viz
from .energy import SmoothingConfig
from .evaluation import DEFAULT_THETA, CorpusReport, PageReport, evaluate_page
from .ingest import DecodeError, LabelEncoding, decode_label_image, text_mask
from .pipeline import PageAnalysis, PipelineConfig
from .polygons import FragmentationError
from .raster import ContourError
from .seams import SeamParams
from .synth import InfeasibleSpec, corpus_specs, generate_page

log = logging.getLogger("scriptorium")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"}

# config file keys -> (argparse dest, type)
CONFIG_KEYS = {
    "alpha": int, "beta": float, "min_area": int, "bin_threshold": int, "theta": float,
    "global_kernel": int, "local_kernel": int, "encoding": str, "jobs": int, "seed": int,
}
DEFAULTS = {
    "alpha": 120, "beta": 3.0, "min_area": None, "bin_threshold": 2, "theta": DEFAULT_THETA,
    "global_kernel": None, "local_kernel": 32, "encoding": None, "jobs": None, "seed": 0,
}


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    alpha: int = 120
    beta: float = 3.0
    min_area: int | None = None
    bin_threshold: int = 2
    theta: float = DEFAULT_THETA
    global_kernel: int | None = None
    local_kernel: int = 32
    encoding: str | None = None
    jobs: int | None = None
    seed: int = 0
    args: dict = field(default_factory=dict)

    def validate(self):
        if self.alpha < 1:
            raise InputError("--alpha must be >= 1")
        if self.beta < 0:
            raise InputError("--beta must be >= 0")
        if self.min_area is not None and self.min_area < 0:
            raise InputError("--min-area must be >= 0")
        if self.bin_threshold < 0:
            raise InputError("--bin-threshold must be >= 0")
        if not 0 < self.theta <= 1:
            raise InputError("--theta must lie in (0, 1]")
        if self.global_kernel is not None and self.global_kernel < 1:
            raise InputError("--global-kernel must be >= 1")
        if self.local_kernel < 1:
            raise InputError("--local-kernel must be >= 1")

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            seams=SeamParams(self.alpha, self.beta),
            smoothing=SmoothingConfig(self.global_kernel, self.local_kernel),
            min_area=self.min_area,
            small_bin_threshold=self.bin_threshold,
        )

    def label_encoding(self) -> LabelEncoding:
        if self.encoding is None:
            return LabelEncoding()
        path = Path(self.encoding)
        if not path.exists():
            raise InputError(f"encoding file not found: {path}")
        return LabelEncoding.read(path)

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1


def read_kv(path) -> dict:
    """Flat ``key = value`` file; ``#`` comments, dashes and underscores interchangeable."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_").lower()] = value
    return out


def _none_or(tp):
    return lambda v: None if str(v).lower() in ("", "none", "auto") else tp(v)


def build_config(ns: argparse.Namespace) -> RunConfig:
    """CLI flags override the config file, which overrides built-in defaults."""
    values = dict(DEFAULTS)
    if getattr(ns, "config", None):
        path = Path(ns.config)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        for key, raw in read_kv(path).items():
            if key not in CONFIG_KEYS:
                raise InputError(f"unknown config key {key!r}")
            values[key] = _none_or(CONFIG_KEYS[key])(raw)
    for key in CONFIG_KEYS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    extra = {k: v for k, v in vars(ns).items() if k not in CONFIG_KEYS and k not in ("config", "func")}
    cfg = RunConfig(ns.command, **values, args=extra)
    cfg.validate()
    return cfg


def list_images(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in IMAGE_SUFFIXES))
        elif p.exists():
            out.append(p)
        else:
            raise InputError(f"input not found: {p}")
    if not out:
        raise InputError("no input images")
    return sorted(out, key=lambda q: q.name)


def _stem(path: Path) -> str:
    name = path.name
    for suffix in (".gt.xml", ".gt.json"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def find_document(directory: Path, stem: str) -> Path:
    for name in (f"{stem}.xml", f"{stem}.gt.xml", f"{stem}.json", f"{stem}.gt.json"):
        p = directory / name
        if p.exists():
            return p
    raise InputError(f"no PAGE XML or JSON for {stem!r} in {directory}")


def load_text(path: Path, encoding: LabelEncoding) -> np.ndarray:
    try:
        return text_mask(decode_label_image(path.read_bytes(), encoding)).astype(bool)
    except (OSError, DecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _run_pages(fn, items, workers):
    """Map ``fn`` over items, in parallel when asked; order follows ``items``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _guard(fn, *args):
    """Run one work unit, turning failures into (status, message)."""
    try:
        return EXIT_OK, fn(*args)
    except (InputError, OSError, DecodeError, pageio.PageXMLError) as exc:
        return EXIT_INPUT, str(exc)
    except (AssertionError, FragmentationError, ContourError) as exc:
        return EXIT_INTERNAL, f"internal invariant failure: {exc}"


# --- segment ---------------------------------------------------------------

def _segment_one(job):
    path, cfg = job
    return _guard(_segment_page, Path(path), cfg)


def _segment_page(path: Path, cfg: RunConfig):
    out = Path(cfg.args["output"])
    li = decode_label_image(path.read_bytes(), cfg.label_encoding())
    res = PageAnalysis(li, cfg.pipeline()).segment()
    doc = pageio.PageDocument.from_polygons(path.name, li.shape, res.polygons)
    stem = path.stem
    pageio.write_page_xml(doc, out / f"{stem}.xml")
    if cfg.args.get("json"):
        pageio.write_json(doc, out / f"{stem}.json")
    if cfg.args.get("overlay"):
        bg = None
        rgb_dir = cfg.args.get("rgb")
        if rgb_dir:
            cand = [p for p in Path(rgb_dir).glob(f"{stem}.*") if p.suffix.lower() in IMAGE_SUFFIXES]
            if cand:
                bg = np.asarray(Image.open(cand[0]).convert("RGB"))
        viz.save(viz.polygon_overlay(res.mask, res.polygons, bg), out / f"{stem}.overlay.png")
    return len(res.polygons)


def cmd_segment(cfg: RunConfig) -> int:
    images = list_images(cfg.args["inputs"])
    out = Path(cfg.args["output"])
    out.mkdir(parents=True, exist_ok=True)
    results = _run_pages(_segment_one, [(str(p), cfg) for p in images], cfg.workers)
    status = EXIT_OK
    for path, (code, value) in zip(images, results):
        if code:
            log.error("%s: %s", path.name, value)
            status = max(status, code)
        else:
            print(f"{path.name}: {value} lines")
    failed = sum(1 for c, _ in results if c)
    if failed:
        print(f"{failed} of {len(images)} pages failed", file=sys.stderr)
    return status


# --- eval ------------------------------------------------------------------

def _eval_page(stem, pred_dir, gt_dir, label_path, cfg) -> PageReport:
    pred = pageio.read_document(find_document(pred_dir, stem))
    gt = pageio.read_document(find_document(gt_dir, stem))
    text = load_text(label_path, cfg.label_encoding())
    if (gt.height, gt.width) != text.shape:
        raise InputError(f"{stem}: GT page {gt.height}x{gt.width} differs from label image {text.shape}")
    return evaluate_page(pred.polygons(), gt.polygons(), text, cfg.theta, name=stem)


def _eval_one(job):
    stem, pred_dir, gt_dir, label_path, cfg = job
    return _guard(_eval_page, stem, Path(pred_dir), Path(gt_dir), Path(label_path), cfg)


def _write_report(report: CorpusReport, cfg: RunConfig):
    print(report.table())
    if cfg.args.get("report"):
        Path(cfg.args["report"]).write_text(json.dumps(report.as_dict(), indent=1) + "\n")


def cmd_eval(cfg: RunConfig) -> int:
    labels = list_images([cfg.args["labels"]])
    pred_dir, gt_dir = Path(cfg.args["pred"]), Path(cfg.args["gt"])
    for d in (pred_dir, gt_dir):
        if not d.is_dir():
            raise InputError(f"not a directory: {d}")
    jobs = [(p.stem, str(pred_dir), str(gt_dir), str(p), cfg) for p in labels]
    results = _run_pages(_eval_one, jobs, cfg.workers)
    status = EXIT_OK
    pages = []
    for path, (code, value) in zip(labels, results):
        if code:
            log.error("%s: %s", path.name, value)
            status = max(status, code)
        else:
            pages.append(value)
    _write_report(CorpusReport(pages), cfg)
    return status


# --- viz -------------------------------------------------------------------

def cmd_viz(cfg: RunConfig) -> int:
    path = Path(cfg.args["input"])
    if not path.exists():
        raise InputError(f"input not found: {path}")
    out = Path(cfg.args["output"])
    out.mkdir(parents=True, exist_ok=True)
    li = decode_label_image(path.read_bytes(), cfg.label_encoding())
    pa = PageAnalysis(li, cfg.pipeline())
    res = pa.segment()
    stem = path.stem
    if res.energy is not None:
        viz.dump_energy(res.energy, out, stem)
    viz.save(viz.seam_overlay(res.mask, res.seams), out / f"{stem}.seams.png")
    viz.save(viz.polygon_overlay(res.mask, res.polygons), out / f"{stem}.polygons.png")
    if cfg.args.get("gt"):
        gt = pageio.read_document(cfg.args["gt"]).polygons()
        text = text_mask(li).astype(bool)
        rep = evaluate_page(res.polygons, gt, text, cfg.theta, name=stem)
        viz.save(viz.eval_overlay(text, res.polygons, gt, rep), out / f"{stem}.eval.png")
        print(f"line IU {rep.line_iu:.4f}  pixel IU {rep.pixel_iu:.4f}")
    print(f"wrote debug images for {stem} to {out}")
    return EXIT_OK


# --- sweep -----------------------------------------------------------------

def _sweep_page(job):
    path, gt_dir, grid, cfg = job

    def work():
        li = decode_label_image(Path(path).read_bytes(), cfg.label_encoding())
        gt = pageio.read_document(find_document(Path(gt_dir), Path(path).stem)).polygons()
        text = text_mask(li).astype(bool)
        pa = PageAnalysis(li, cfg.pipeline())
        scores = []
        for alpha, beta in grid:
            res = pa.segment(SeamParams(alpha, beta))
            rep = evaluate_page(res.polygons, gt, text, cfg.theta)
            scores.append((rep.line_iu, rep.pixel_iu))
        return scores

    return _guard(work)


def _floats(text, tp):
    try:
        return [tp(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad list {text!r}") from exc


def sweep_grid(labels, gt_dir, alphas, betas, cfg: RunConfig):
    """Per-cell corpus means over an alpha x beta grid.

    Returns ``(rows, status)`` with rows ``(alpha, beta, line_iu, pixel_iu, pages)``.
    """
    grid = [(a, b) for a in alphas for b in betas]
    results = _run_pages(_sweep_page, [(str(p), str(gt_dir), grid, cfg) for p in labels], cfg.workers)
    status = EXIT_OK
    good = []
    for path, (code, value) in zip(labels, results):
        if code:
            log.error("%s: %s", path.name, value)
            status = max(status, code)
        else:
            good.append(value)
    rows = []
    for k, (a, b) in enumerate(grid):
        cell = np.array([page[k] for page in good]) if good else np.zeros((0, 2))
        li, pi = (cell.mean(axis=0) if len(cell) else (0.0, 0.0))
        rows.append((a, b, float(li), float(pi), len(good)))
    return rows, status


def cmd_sweep(cfg: RunConfig) -> int:
    labels = list_images([cfg.args["labels"]])
    alphas = _floats(cfg.args["alphas"], int)
    betas = _floats(cfg.args["betas"], float)
    rows, status = sweep_grid(labels, Path(cfg.args["gt"]), alphas, betas, cfg)
    out = Path(cfg.args["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "beta", "line_iu", "pixel_iu", "pages"])
        for a, b, li, pi, n in rows:
            w.writerow([a, b, f"{li:.6f}", f"{pi:.6f}", n])
    print(f"wrote {len(rows)} cells to {out}")
    return status


# --- synth -----------------------------------------------------------------

SYNTH_KEYS = {
    "count": int, "seed": int, "n": int, "m": int, "lines_min": int, "lines_max": int,
    "gloss_prob": float, "decoration_prob": float, "spur_prob": float, "skew": int, "margin": int,
}


def read_synth_spec(path) -> dict:
    """Corpus description for ``synth``; same flat format as the config file."""
    raw = read_kv(path)
    unknown = set(raw) - set(SYNTH_KEYS)
    if unknown:
        raise InputError(f"unknown synth keys: {sorted(unknown)}")
    return {k: SYNTH_KEYS[k](v) for k, v in raw.items()}


def write_corpus(outdir, count=50, seed=0, **kw) -> list[Path]:
    """Generate a corpus: ``<name>.png`` label image plus ``<name>.gt.xml``
    and ``<name>.gt.json`` ground truth per page."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = (kw.pop("lines_min", 3), kw.pop("lines_max", 12))
    written = []
    for i, spec in enumerate(corpus_specs(count, seed, lines=lines, **kw)):
        page = generate_page(spec)
        name = f"page_{i:03d}"
        Image.fromarray(page.encode()).save(outdir / f"{name}.png")
        doc = pageio.PageDocument.from_polygons(f"{name}.png", (spec.n, spec.m), page.gt_polygons)
        pageio.write_page_xml(doc, outdir / f"{name}.gt.xml")
        pageio.write_json(doc, outdir / f"{name}.gt.json")
        written.append(outdir / f"{name}.png")
    return written


def cmd_synth(cfg: RunConfig) -> int:
    params = {}
    if cfg.args.get("spec"):
        path = Path(cfg.args["spec"])
        if not path.exists():
            raise InputError(f"spec file not found: {path}")
        params = read_synth_spec(path)
    if cfg.args.get("count") is not None:
        params["count"] = cfg.args["count"]
    params.setdefault("seed", cfg.seed)
    try:
        pages = write_corpus(cfg.args["output"], **params)
    except InfeasibleSpec as exc:
        raise InputError(str(exc)) from exc
    print(f"wrote {len(pages)} pages to {cfg.args['output']}")
    return EXIT_OK


# --- argument parsing ------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags take precedence")
    p.add_argument("--alpha", type=int, help="rows between seam start positions (default 120)")
    p.add_argument("--beta", type=float, help="seam penalty per row of deviation (default 3.0)")
    p.add_argument("--min-area", dest="min_area", type=int, help="drop text components smaller than this")
    p.add_argument("--bin-threshold", dest="bin_threshold", type=int, help="dissolve bins with at most this many members")
    p.add_argument("--theta", type=float, help="IU needed for a line match (default 0.75)")
    p.add_argument("--global-kernel", dest="global_kernel", type=int, help="'+' kernel side (default: page rows)")
    p.add_argument("--local-kernel", dest="local_kernel", type=int, help="box kernel side (default 32)")
    p.add_argument("--encoding", help="label encoding descriptor file")
    p.add_argument("--jobs", type=int, help="worker processes (default: all CPUs)")
    p.add_argument("--seed", type=int, help="random seed for synth")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scriptorium", description="Text-line segmentation of labelled page images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="label images -> PAGE XML line polygons")
    p.add_argument("inputs", nargs="+", help="label images or directories of them")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--overlay", action="store_true", help="also write <page>.overlay.png")
    p.add_argument("--rgb", help="directory of page images to draw overlays on")
    p.add_argument("--json", action="store_true", help="also write the JSON sidecar")
    _common(p)

    p = sub.add_parser("eval", help="score predicted against ground-truth polygons")
    p.add_argument("--pred", required=True, help="directory of predicted PAGE XML / JSON")
    p.add_argument("--gt", required=True, help="directory of ground-truth PAGE XML / JSON")
    p.add_argument("--labels", required=True, help="directory of label images (main-text pixels)")
    p.add_argument("--report", help="write the JSON report here")
    _common(p)

    p = sub.add_parser("viz", help="debug images for one page")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--gt", help="ground truth for an evaluation overlay")
    _common(p)

    p = sub.add_parser("sweep", help="alpha x beta grid -> CSV of corpus scores")
    p.add_argument("--labels", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--alphas", default="60,90,120,180")
    p.add_argument("--betas", default="1,3,10")
    p.add_argument("-o", "--output", required=True)
    _common(p)

    p = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--spec", help="corpus description file")
    p.add_argument("--count", type=int)
    _common(p)
    return parser


COMMANDS = {"segment": cmd_segment, "eval": cmd_eval, "viz": cmd_viz, "sweep": cmd_sweep, "synth": cmd_synth}


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (DecodeError, pageio.PageXMLError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (AssertionError, FragmentationError, ContourError) as exc:
        log.error("internal invariant failure: %s", exc)
        return EXIT_INTERNAL


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SCRIPTORIUM_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = make_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on unknown flags
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = build_config(ns)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
