"""Standard monocular depth evaluation metrics.

Over the jointly valid pixels p with ground truth d_p > 0:

    abs_rel = mean(|d_p - pred_p| / d_p)
    sq_rel  = mean((d_p - pred_p)^2 / d_p)
    rmse    = sqrt(mean((d_p - pred_p)^2))
    log10   = mean(|log10 d_p - log10 pred_p|)

Predictions are floored at 1e-6 inside the log10 term; pixels whose
ground truth is zero or invalid are excluded everywhere (relative error
against zero depth is meaningless).
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .depth import DepthMap, joint_mask

PRED_LOG_FLOOR = 1e-6

METRIC_NAMES = ("abs_rel", "sq_rel", "rmse", "log10")


@dataclass
class MetricReport:
    abs_rel: float
    sq_rel: float
    rmse: float
    log10: float
    n_valid: int
    image_id: str = ""

    def metrics(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def row(self) -> dict:
        return {"image_id": self.image_id, **self.metrics(), "n_valid": self.n_valid}


def evaluate_pair(pred: DepthMap, gt: DepthMap, image_id: str = "") -> MetricReport:
    """Compute the four metrics for one prediction / ground-truth pair."""
    m = joint_mask(pred, gt) & (gt.values > 0.0)
    if not m.any():
        raise ValueError("no valid pixels with positive ground truth")
    d = gt.values[m]
    p = pred.values[m]
    diff = d - p
    abs_rel = float(np.mean(np.abs(diff) / d))
    sq_rel = float(np.mean(diff * diff / d))
    rmse = float(np.sqrt(np.mean(diff * diff)))
    log10 = float(np.mean(np.abs(np.log10(d) - np.log10(np.maximum(p, PRED_LOG_FLOOR)))))
    return MetricReport(abs_rel, sq_rel, rmse, log10, int(m.sum()), image_id)


def evaluate_set(pairs) -> tuple[MetricReport, list[MetricReport]]:
    """Evaluate a list of (pred, gt[, image_id]) pairs.

    Returns the aggregate report (unweighted mean of each metric across
    images, total pixel count) plus the per-image reports.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cannot evaluate an empty set")
    reports = []
    for entry in pairs:
        pred, gt = entry[0], entry[1]
        image_id = entry[2] if len(entry) > 2 else f"image_{len(reports):04d}"
        reports.append(evaluate_pair(pred, gt, image_id))
    agg = MetricReport(
        abs_rel=float(np.mean([r.abs_rel for r in reports])),
        sq_rel=float(np.mean([r.sq_rel for r in reports])),
        rmse=float(np.mean([r.rmse for r in reports])),
        log10=float(np.mean([r.log10 for r in reports])),
        n_valid=int(sum(r.n_valid for r in reports)),
        image_id="aggregate",
    )
    return agg, reports


def write_report_json(path, aggregate: MetricReport, reports) -> None:
    doc = {
        "aggregate": aggregate.row(),
        "per_image": [r.row() for r in reports],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_report_csv(path, aggregate: MetricReport, reports) -> None:
    fields = ["image_id", *METRIC_NAMES, "n_valid"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for r in reports:
            writer.writerow(r.row())
        writer.writerow(aggregate.row())
