"""Depth maps, bin-center depth reconstruction, and training losses.

The reconstruction turns a per-pixel score vector over K depth bins into a
depth value: d = sum_k center_k * softmax(scores)_k, a convex combination
of the bin centers.

Three losses operate on masked depth maps:

- mean squared error over jointly valid pixels,
- a scale-dampened log loss
  alpha * sqrt(mean(t^2) - lam * mean(t)^2), t = ln(pred) - ln(gt),
- (in `prior`) a domain loss tying predictions to the linear channel prior.

Every loss ships with its analytic gradient with respect to the prediction
so the implementation can be validated against finite differences.
"""

from dataclasses import dataclass

import numpy as np

# Floor applied before taking logs; ground-truth maps may legally contain
# zero-depth pixels.
LOG_EPS = 1e-6


@dataclass
class DepthMap:
    """Single-channel nonnegative depth raster with a validity mask."""

    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"depth map must be 2-D, got shape {self.values.shape}")
        if self.mask is None:
            self.mask = np.ones(self.values.shape, dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.values.shape:
            raise ValueError("mask shape must match value shape")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def n_valid(self) -> int:
        return int(self.mask.sum())

    def validate(self) -> "DepthMap":
        v = self.values[self.mask]
        if v.size and (not np.all(np.isfinite(v)) or v.min() < 0.0):
            raise ValueError("valid depth samples must be finite and >= 0")
        return self


def joint_mask(a: DepthMap, b: DepthMap) -> np.ndarray:
    """Pixels valid in both maps; raises on shape mismatch."""
    if a.values.shape != b.values.shape:
        raise ValueError(
            f"depth map shapes differ: {a.values.shape} vs {b.values.shape}"
        )
    return a.mask & b.mask


@dataclass
class BinSpec:
    """Strictly increasing depth values at the center of each bin."""

    centers: np.ndarray

    def __post_init__(self):
        self.centers = np.atleast_1d(np.asarray(self.centers, dtype=np.float64))
        if self.centers.size < 1:
            raise ValueError("need at least one bin")
        if np.any(np.diff(self.centers) <= 0.0):
            raise ValueError("bin centers must be strictly increasing")

    @property
    def k(self) -> int:
        return self.centers.size


@dataclass
class LossWeights:
    """Weights of the combined training objective.

    delta_* weight the three terms; lam dampens the scale component of the
    log loss and alpha scales it.
    """

    delta_chi2: float = 0.3
    delta_data: float = 0.6
    delta_domain: float = 0.1
    lam: float = 0.85
    alpha: float = 10.0

    def validate(self) -> "LossWeights":
        for name in ("delta_chi2", "delta_data", "delta_domain", "lam", "alpha"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        return self


def bin_centers(widths, d_min: float, d_max: float) -> BinSpec:
    """Turn relative bin widths into bin-center depths over [d_min, d_max].

    Widths are normalized to sum 1; each center sits in the middle of its
    bin: center_k = d_min + (cum_k - width_k / 2) * (d_max - d_min).
    """
    w = np.atleast_1d(np.asarray(widths, dtype=np.float64))
    if w.size < 1:
        raise ValueError("need at least one bin width")
    if np.any(w <= 0.0):
        raise ValueError("bin widths must be positive")
    if not d_min < d_max:
        raise ValueError(f"require d_min < d_max, got {d_min}, {d_max}")
    w = w / w.sum()
    cum = np.cumsum(w)
    centers = d_min + (cum - 0.5 * w) * (d_max - d_min)
    return BinSpec(centers)


def _check_scores(bins: BinSpec, scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 3:
        raise ValueError(f"score volume must be (H, W, K), got shape {s.shape}")
    if s.shape[2] != bins.k:
        raise ValueError(f"score volume has K={s.shape[2]}, bins have K={bins.k}")
    if not np.all(np.isfinite(s)):
        raise ValueError("score volume contains non-finite values")
    return s


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def reconstruct_depth(bins: BinSpec, scores) -> DepthMap:
    """Per-pixel depth as the softmax-weighted mean of the bin centers.

    scores has shape (H, W, K). Every output lies in
    [centers[0], centers[-1]] because the weights are a convex combination.
    """
    s = _check_scores(bins, scores)
    d = _softmax(s) @ bins.centers
    # FP dot products can overshoot the convex hull by one ulp.
    d = np.clip(d, bins.centers[0], bins.centers[-1])
    return DepthMap(d)


def reconstruct_depth_jvp(bins: BinSpec, scores, direction) -> np.ndarray:
    """Directional derivative of the reconstruction along a score tangent.

    For one pixel with weights sigma: d(depth) = cov_sigma(centers, dz)
    = E[c * dz] - E[c] * E[dz] under the softmax distribution.
    """
    s = _check_scores(bins, scores)
    dz = np.asarray(direction, dtype=np.float64)
    if dz.shape != s.shape:
        raise ValueError("direction shape must match score shape")
    sig = _softmax(s)
    e_c = sig @ bins.centers
    e_dz = np.sum(sig * dz, axis=-1)
    e_cdz = np.sum(sig * dz * bins.centers, axis=-1)
    return e_cdz - e_c * e_dz


def _valid_or_raise(pred: DepthMap, gt: DepthMap) -> np.ndarray:
    m = joint_mask(pred, gt)
    if not m.any():
        raise ValueError("no jointly valid pixels")
    return m


def loss_chi2(pred: DepthMap, gt: DepthMap) -> float:
    """Mean squared depth error over jointly valid pixels."""
    m = _valid_or_raise(pred, gt)
    diff = gt.values[m] - pred.values[m]
    return float(np.mean(diff * diff))


def loss_chi2_grad(pred: DepthMap, gt: DepthMap) -> np.ndarray:
    """d loss_chi2 / d pred; zero at invalid pixels."""
    m = _valid_or_raise(pred, gt)
    grad = np.zeros_like(pred.values)
    grad[m] = 2.0 * (pred.values[m] - gt.values[m]) / m.sum()
    return grad


def _log_residuals(pred: DepthMap, gt: DepthMap, m: np.ndarray) -> np.ndarray:
    p = np.maximum(pred.values[m], LOG_EPS)
    g = np.maximum(gt.values[m], LOG_EPS)
    return np.log(p) - np.log(g)


def loss_data(pred: DepthMap, gt: DepthMap, w: LossWeights = LossWeights()) -> float:
    """Scale-dampened log-depth loss.

    t_i = ln(max(pred_i, eps)) - ln(max(gt_i, eps));
    loss = alpha * sqrt(mean(t^2) - lam * mean(t)^2). The expression under
    the root is floored at zero: it is analytically >= (1 - lam) * mean(t)^2
    when lam <= 1, but rounding can leave a tiny negative residue.
    """
    w.validate()
    m = _valid_or_raise(pred, gt)
    t = _log_residuals(pred, gt, m)
    inner = np.mean(t * t) - w.lam * np.mean(t) ** 2
    return float(w.alpha * np.sqrt(max(inner, 0.0)))


def loss_data_grad(pred: DepthMap, gt: DepthMap, w: LossWeights = LossWeights()) -> np.ndarray:
    """d loss_data / d pred; zero at invalid pixels.

    Undefined where the loss is exactly zero (sqrt kink); callers doing
    gradient checks must stay away from that point.
    """
    w.validate()
    m = _valid_or_raise(pred, gt)
    t = _log_residuals(pred, gt, m)
    n = t.size
    inner = max(np.mean(t * t) - w.lam * np.mean(t) ** 2, 0.0)
    root = np.sqrt(inner)
    if root == 0.0:
        raise ValueError("loss_data gradient undefined at zero loss")
    dt = w.alpha * (t - w.lam * t.mean()) / (n * root)
    grad = np.zeros_like(pred.values)
    # Chain rule through the log; the eps floor zeroes the gradient below it.
    p = pred.values[m]
    grad_vals = np.where(p > LOG_EPS, dt / np.maximum(p, LOG_EPS), 0.0)
    grad[m] = grad_vals
    return grad


def loss_total(
    pred: DepthMap,
    gt: DepthMap,
    prior: DepthMap,
    w: LossWeights = LossWeights(),
) -> tuple[float, dict]:
    """Weighted sum of the three losses plus a per-term breakdown."""
    from .prior import domain_loss  # local import: prior builds on this module

    w.validate()
    terms = {
        "chi2": loss_chi2(pred, gt),
        "data": loss_data(pred, gt, w),
        "domain": domain_loss(prior, pred),
    }
    total = (
        w.delta_chi2 * terms["chi2"]
        + w.delta_data * terms["data"]
        + w.delta_domain * terms["domain"]
    )
    return float(total), terms


def grad_check_loss(
    name: str,
    pred: DepthMap,
    gt: DepthMap,
    w: LossWeights = LossWeights(),
    step: float = 1e-5,
) -> float:
    """Compare a loss's analytic gradient against central finite differences.

    name is one of "chi2", "data", "domain" (for "domain", gt is the prior
    map). Returns the maximum relative deviation over valid pixels. Raises
    if the point is non-differentiable (pixels on the log floor, or zero
    loss for the sqrt-based losses).
    """
    from .prior import domain_loss, domain_loss_grad

    if name == "chi2":
        f = lambda p: loss_chi2(p, gt)
        analytic = loss_chi2_grad(pred, gt)
    elif name == "data":
        m = joint_mask(pred, gt)
        if np.any(pred.values[m] <= LOG_EPS + 2.0 * step) or np.any(
            gt.values[m] <= LOG_EPS
        ):
            raise ValueError("point too close to the log floor for a gradient check")
        f = lambda p: loss_data(p, gt, w)
        analytic = loss_data_grad(pred, gt, w)
    elif name == "domain":
        f = lambda p: domain_loss(gt, p)
        analytic = domain_loss_grad(gt, pred)
    else:
        raise ValueError(f"unknown loss name: {name}")

    m = joint_mask(pred, gt)
    numeric = np.zeros_like(pred.values)
    base = pred.values
    for idx in np.argwhere(m):
        i, j = idx
        bumped = base.copy()
        bumped[i, j] = base[i, j] + step
        hi = f(DepthMap(bumped, pred.mask))
        bumped[i, j] = base[i, j] - step
        lo = f(DepthMap(bumped, pred.mask))
        numeric[i, j] = (hi - lo) / (2.0 * step)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric)[m] / denom[m]))


def grad_check_reconstruct(bins: BinSpec, scores, direction, step: float = 1e-5) -> float:
    """Compare the reconstruction JVP against central finite differences."""
    s = _check_scores(bins, scores)
    dz = np.asarray(direction, dtype=np.float64)
    analytic = reconstruct_depth_jvp(bins, s, dz)
    hi = reconstruct_depth(bins, s + step * dz).values
    lo = reconstruct_depth(bins, s - step * dz).values
    numeric = (hi - lo) / (2.0 * step)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
