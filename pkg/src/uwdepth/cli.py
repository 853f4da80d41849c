"""Command line front end for batch runs.

Subcommands mirror the pipeline stages: ``enhance`` (batch image
enhancement), ``rmi-dump`` (channel decomposition to grayscale files),
``fit-prior`` (linear depth prior over a dataset), ``evaluate`` (metric
reports for prediction/ground-truth directories) and ``demo`` (seeded
synthetic end-to-end comparison of raw vs enhanced inputs).

Every seeded command is bit-deterministic for a fixed seed; ``--threads``
only changes wall time because per-image work is pure and reductions
happen in manifest order on the main thread. Exit status is 0 only when
no per-item failure occurred. The log level comes from the
``UWDEPTH_LOG_LEVEL`` environment variable (default INFO).
"""

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .dataset import load_pair, make_synthetic_set, scan
from .depth import DepthMap
from .enhance import EnhanceConfig, enhance_pipeline
from .fileio import (
    RGB_EXTENSIONS,
    ImageReadError,
    load_gray,
    load_image,
    save_gray,
    save_image,
)
from .metrics import METRIC_NAMES, evaluate_set, write_report_csv, write_report_json
from .prior import fit_prior, pool_samples, predict_prior
from .rmi import rmi_decompose

log = logging.getLogger(__name__)

ENHANCE_CONFIG_KEYS = ("alpha1", "alpha2", "blur_sigma", "blur_radius")


def configure_logging() -> None:
    name = os.environ.get("UWDEPTH_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def build_enhance_config(args) -> EnhanceConfig:
    """Merge defaults, an optional JSON config file, and explicit flags."""
    values = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
        unknown = sorted(set(doc) - set(ENHANCE_CONFIG_KEYS))
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        values.update(doc)
    flag_map = {
        "alpha1": getattr(args, "alpha1", None),
        "alpha2": getattr(args, "alpha2", None),
        "blur_sigma": getattr(args, "sigma", None),
        "blur_radius": getattr(args, "radius", None),
    }
    values.update({k: v for k, v in flag_map.items() if v is not None})
    return EnhanceConfig(**values).validate()


def list_images(path: Path) -> list:
    if path.is_file():
        return [path]
    if path.is_dir():
        return [p for p in sorted(path.iterdir())
                if p.is_file() and p.suffix.lower() in RGB_EXTENSIONS]
    raise FileNotFoundError(f"no such input: {path}")


def prepare_output_dir(raw: str) -> Path:
    out = Path(raw)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory not writable: {out}")
    return out


def run_pool(worker, items, threads: int) -> list:
    """Map worker over items, preserving order; threads <= 1 stays inline."""
    if threads <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, items))


def guarded(worker):
    """Wrap a per-item worker so failures become (None, exception) results."""
    def run(item):
        try:
            return worker(item), None
        except Exception as exc:
            return None, exc
    return run


def format_row(label: str, metrics: dict) -> str:
    cells = "  ".join(f"{name} {metrics[name]:.6g}" for name in METRIC_NAMES)
    return f"{label:<9} {cells}"


def cmd_enhance(args) -> int:
    cfg = build_enhance_config(args)
    inputs = list_images(Path(args.input))
    if not inputs:
        log.error("no input images under %s", args.input)
        return 1
    out_dir = prepare_output_dir(args.output)
    started = time.perf_counter()

    def work(path):
        return enhance_pipeline(load_image(path), cfg)

    results = run_pool(guarded(work), inputs, args.threads)
    written = failures = 0
    for path, (img, exc) in zip(inputs, results):
        if exc is not None:
            log.error("failed on %s: %s", path, exc)
            failures += 1
            continue
        save_image(out_dir / (path.stem + ".png"), img)
        written += 1
    elapsed = time.perf_counter() - started
    print(f"enhanced {written} image(s) in {elapsed:.2f}s, {failures} failure(s)")
    return 0 if failures == 0 else 1


def cmd_rmi_dump(args) -> int:
    inputs = list_images(Path(args.input))
    if not inputs:
        log.error("no input images under %s", args.input)
        return 1
    out_dir = prepare_output_dir(args.output)

    def work(path):
        return rmi_decompose(load_image(path), gray=args.gray)

    results = run_pool(guarded(work), inputs, args.threads)
    written = failures = 0
    for path, (rmi, exc) in zip(inputs, results):
        if exc is not None:
            log.error("failed on %s: %s", path, exc)
            failures += 1
            continue
        for suffix, plane in (("r", rmi.r), ("m", rmi.m), ("i", rmi.i)):
            save_gray(out_dir / f"{path.stem}_{suffix}.png", plane, bit_depth=16)
        written += 1
    print(f"decomposed {written} image(s), {failures} failure(s)")
    return 0 if failures == 0 else 1


def cmd_fit_prior(args) -> int:
    manifest = scan(args.input, args.rgb_subdir, args.depth_subdir)
    cfg = build_enhance_config(args)

    def work(entry):
        img, depth = load_pair(entry)
        if args.enhance:
            img = enhance_pipeline(img, cfg)
        return pool_samples(rmi_decompose(img), depth, stride=args.stride)

    results = run_pool(guarded(work), manifest.entries, args.threads)
    blocks = []
    failures = 0
    for entry, (block, exc) in zip(manifest.entries, results):
        if exc is not None:
            log.error("failed on %s: %s", entry.image_id, exc)
            failures += 1
            continue
        blocks.append(block)
    if not blocks:
        log.error("no usable samples; every pair failed")
        return 1
    report = fit_prior(np.concatenate(blocks))
    report.save(args.output)
    c = report.coefficients
    print(f"tau0 {c.tau0:.6g}  tau1 {c.tau1:.6g}  tau2 {c.tau2:.6g}  "
          f"residual_rms {report.residual_rms:.6g}  n_pixels {report.n_pixels}")
    return 0 if failures == 0 else 1


def _depth_files(directory: Path) -> dict:
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return {p.stem: p for p in sorted(directory.iterdir())
            if p.is_file() and p.suffix.lower() == ".png"}


def cmd_evaluate(args) -> int:
    preds = _depth_files(Path(args.pred))
    gts = _depth_files(Path(args.gt))
    stems = sorted(set(preds) & set(gts))
    for stem in sorted(set(preds) ^ set(gts)):
        log.warning("unpaired depth file %r; skipping", stem)
    if not stems:
        log.error("no prediction/ground-truth pairs shared a stem")
        return 1
    triples = []
    for stem in stems:
        pred_vals = load_gray(preds[stem])
        gt_vals = load_gray(gts[stem])
        triples.append((DepthMap(pred_vals),
                        DepthMap(gt_vals, gt_vals > 0.0), stem))
    aggregate, per_image = evaluate_set(triples)
    if args.format == "json":
        write_report_json(args.output, aggregate, per_image)
    else:
        write_report_csv(args.output, aggregate, per_image)
    print(format_row("aggregate", aggregate.metrics()))
    return 0


def _demo_report_text(rows: dict, n: int, seed: int, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"n": n, "seed": seed, "rows": rows}, indent=2) + "\n"
    lines = ["route," + ",".join(METRIC_NAMES)]
    for label in ("raw", "enhanced"):
        lines.append(label + "," + ",".join(repr(rows[label][m]) for m in METRIC_NAMES))
    return "\n".join(lines) + "\n"


def cmd_demo(args) -> int:
    workdir = prepare_output_dir(args.workdir)
    cfg = build_enhance_config(args)
    started = time.perf_counter()
    pairs = make_synthetic_set(args.n, args.seed)
    rows = {}
    for label in ("raw", "enhanced"):

        def work(pair):
            img, depth = pair
            if label == "enhanced":
                img = enhance_pipeline(img, cfg)
            rmi = rmi_decompose(img)
            return pool_samples(rmi, depth, stride=args.stride), rmi

        results = run_pool(work, pairs, args.threads)
        report = fit_prior(np.concatenate([block for block, _ in results]))
        report.save(workdir / f"{label}_prior.json")
        scored = [
            (predict_prior(rmi, report.coefficients), depth)
            for (_, rmi), (_, depth) in zip(results, pairs)
        ]
        aggregate, _ = evaluate_set(scored)
        rows[label] = aggregate.metrics()
    ext = "json" if args.format == "json" else "csv"
    report_path = workdir / f"report.{ext}"
    report_path.write_text(_demo_report_text(rows, args.n, args.seed, args.format))
    for label in ("raw", "enhanced"):
        print(format_row(label, rows[label]))
    print(f"report written to {report_path} in {time.perf_counter() - started:.2f}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwdepth",
        description="Underwater image enhancement and depth-prior toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_enhance_flags(p):
        p.add_argument("--config", help="JSON file with enhancement settings")
        p.add_argument("--alpha1", type=float, help="low clamp quantile level")
        p.add_argument("--alpha2", type=float, help="high clamp quantile level")
        p.add_argument("--sigma", type=float, help="unsharp blur sigma")
        p.add_argument("--radius", type=int, help="unsharp blur radius")

    def add_threads(p):
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (numeric output is unaffected)")

    p = sub.add_parser("enhance", help="enhance images into an output directory")
    p.add_argument("--input", required=True, help="image file or directory")
    p.add_argument("--output", required=True, help="output directory")
    add_enhance_flags(p)
    add_threads(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("rmi-dump",
                       help="write red / max(g,b) / intensity planes as 16-bit PNGs")
    p.add_argument("--input", required=True, help="image file or directory")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--gray", choices=("luma", "mean"), default="luma",
                   help="intensity definition")
    add_threads(p)
    p.set_defaults(func=cmd_rmi_dump)

    p = sub.add_parser("fit-prior", help="fit the linear depth prior over a dataset")
    p.add_argument("--input", required=True, help="dataset root directory")
    p.add_argument("--rgb-subdir", default="RGB")
    p.add_argument("--depth-subdir", default="depth")
    p.add_argument("--output", required=True, help="coefficient JSON path")
    p.add_argument("--stride", type=int, default=4,
                   help="pixel subsampling stride when pooling samples")
    p.add_argument("--enhance", action="store_true",
                   help="run the enhancement pipeline before decomposing")
    add_enhance_flags(p)
    add_threads(p)
    p.set_defaults(func=cmd_fit_prior)

    p = sub.add_parser("evaluate",
                       help="compare predicted depth PNGs against ground truth")
    p.add_argument("--pred", required=True, help="directory of predicted depth PNGs")
    p.add_argument("--gt", required=True, help="directory of ground-truth depth PNGs")
    p.add_argument("--output", required=True, help="report path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("demo",
                       help="synthetic raw-vs-enhanced prior comparison")
    p.add_argument("--workdir", required=True, help="directory for reports")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=50, help="number of synthetic scenes")
    p.add_argument("--stride", type=int, default=4)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    add_enhance_flags(p)
    add_threads(p)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (OSError, ValueError, ImageReadError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
