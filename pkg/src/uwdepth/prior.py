"""Linear channel-to-depth prior.

A coarse depth estimate from the R and M channels alone:

    depth(x) ~= tau0 + tau1 * R(x) + tau2 * M(x)

fitted by least squares over pooled (r, m, depth) samples. The fit solves
the 3x3 normal equations with a small unconditional ridge term so that
rank-deficient sample sets (constant channels) still produce finite
coefficients. The prior doubles as the reference signal of the domain
loss: the mean squared difference between the projected prior map and a
prediction.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .depth import DepthMap, joint_mask
from .rmi import RmiPlanes

RIDGE_DEFAULT = 1e-6

# Condition number above which the unridged normal matrix is considered
# rank-deficient and the ridge term is what keeps the solution finite.
_COND_LIMIT = 1e12


@dataclass
class PriorCoefficients:
    tau0: float
    tau1: float
    tau2: float

    def as_tuple(self):
        return (self.tau0, self.tau1, self.tau2)


@dataclass
class FitReport:
    coefficients: PriorCoefficients
    residual_rms: float
    n_pixels: int
    ridge_used: bool

    def to_json(self) -> str:
        c = self.coefficients
        return json.dumps(
            {
                "tau0": c.tau0,
                "tau1": c.tau1,
                "tau2": c.tau2,
                "residual_rms": self.residual_rms,
                "n_pixels": self.n_pixels,
            },
            indent=2,
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def fit_prior(samples, ridge: float = RIDGE_DEFAULT) -> FitReport:
    """Least-squares fit of the linear channel-to-depth model.

    samples is an (N, 3) array-like of (r, m, depth) rows, N >= 3. Solves
    (A^T A + ridge * I) tau = A^T d with design rows (1, r, m). The ridge
    is always added; ridge_used reports whether it was load-bearing
    (unridged system rank-deficient or near-singular).
    """
    a = np.asarray(samples, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"samples must be (N, 3) of (r, m, depth), got {a.shape}")
    n = a.shape[0]
    if n < 3:
        raise ValueError(f"need at least 3 samples to fit, got {n}")
    d = a[:, 2]
    if not np.all(np.isfinite(a)) or d.min() < 0.0:
        raise ValueError("samples must be finite with nonnegative depths")

    design = np.column_stack([np.ones(n), a[:, 0], a[:, 1]])
    ata = design.T @ design
    atd = design.T @ d
    tau = np.linalg.solve(ata + ridge * np.eye(3), atd)

    cond = np.linalg.cond(ata)
    ridge_used = bool(not np.isfinite(cond) or cond > _COND_LIMIT)

    residuals = d - design @ tau
    rms = float(np.sqrt(np.mean(residuals * residuals)))
    return FitReport(
        coefficients=PriorCoefficients(*(float(t) for t in tau)),
        residual_rms=rms,
        n_pixels=n,
        ridge_used=ridge_used,
    )


def predict_prior(rmi: RmiPlanes, tau: PriorCoefficients) -> DepthMap:
    """Apply the linear model per pixel, floored at zero depth."""
    d = tau.tau0 + tau.tau1 * rmi.r + tau.tau2 * rmi.m
    return DepthMap(np.maximum(d, 0.0))


def pool_samples(rmi: RmiPlanes, depth: DepthMap, stride: int = 1) -> np.ndarray:
    """Collect (r, m, depth) rows from valid pixels at the given stride."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if rmi.r.shape != depth.values.shape:
        raise ValueError("channel planes and depth map differ in shape")
    sel = (slice(None, None, stride), slice(None, None, stride))
    m = depth.mask[sel]
    return np.column_stack([
        rmi.r[sel][m],
        rmi.m[sel][m],
        depth.values[sel][m],
    ])


def domain_loss(prior: DepthMap, pred: DepthMap) -> float:
    """Mean squared difference between the prior map and a prediction."""
    m = joint_mask(prior, pred)
    if not m.any():
        raise ValueError("no jointly valid pixels")
    diff = prior.values[m] - pred.values[m]
    return float(np.mean(diff * diff))


def domain_loss_grad(prior: DepthMap, pred: DepthMap) -> np.ndarray:
    """d domain_loss / d pred; zero at invalid pixels."""
    m = joint_mask(prior, pred)
    if not m.any():
        raise ValueError("no jointly valid pixels")
    grad = np.zeros_like(pred.values)
    grad[m] = 2.0 * (pred.values[m] - prior.values[m]) / m.sum()
    return grad
