"""Underwater image enhancement pipeline.

Stages, in order:

1. Green-channel compensation of the attenuated red and blue channels:
   r'(x) = r(x) + (mean_g - mean_r) * (1 - r(x)) * g(x), likewise for blue.
2. Gray World white balance: per-channel gains max(means) / mean_c, turned
   into quantile clamp thresholds and an affine stretch to [0, 1].
3. Two parallel branches on the white-balanced image:
   - global histogram equalization of the HSV value channel (contrast),
   - unsharp masking 2*I - blur(I) (sharpness).
4. Fusion: the per-pixel mean of the two branches.

All stages are pure functions; the pipeline is deterministic.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .image import (
    Image,
    channel_mean,
    equalize_histogram,
    gaussian_blur,
    hsv_to_rgb,
    quantile,
    rgb_to_hsv,
)

log = logging.getLogger(__name__)


@dataclass
class EnhanceConfig:
    """Tunable parameters of the enhancement pipeline.

    alpha1/alpha2 are the low and high quantile levels of the white-balance
    clamp (defaults 0.005 and 0.995); blur_sigma/blur_radius parameterize
    the Gaussian used by the unsharp branch.
    """

    alpha1: float = 0.005
    alpha2: float = 0.995
    blur_sigma: float = 1.0
    blur_radius: int = 2

    def validate(self) -> "EnhanceConfig":
        if not (0.0 <= self.alpha1 < self.alpha2 <= 1.0):
            raise ValueError(
                f"require 0 <= alpha1 < alpha2 <= 1, got {self.alpha1}, {self.alpha2}"
            )
        if self.blur_sigma <= 0.0:
            raise ValueError(f"blur_sigma must be positive, got {self.blur_sigma}")
        if self.blur_radius < 1:
            raise ValueError(f"blur_radius must be >= 1, got {self.blur_radius}")
        return self


@dataclass
class GrayWorldRatios:
    """Per-channel Gray World gains; the brightest-mean channel has gain 1."""

    red: float
    green: float
    blue: float


def compensate(img: Image) -> Image:
    """Compensate the red and blue channels from the green channel.

    Adds (mean_g - mean_c) * (1 - c(x)) * g(x) to channel c for c in
    {red, blue}; green passes through untouched. The result is clamped
    to [0, 1] because bright pixels can overshoot.
    """
    mean_r = channel_mean(img.r)
    mean_g = channel_mean(img.g)
    mean_b = channel_mean(img.b)
    r = np.clip(img.r + (mean_g - mean_r) * (1.0 - img.r) * img.g, 0.0, 1.0)
    b = np.clip(img.b + (mean_g - mean_b) * (1.0 - img.b) * img.g, 0.0, 1.0)
    return Image(r, img.g.copy(), b)


def gray_world_ratios(img: Image) -> GrayWorldRatios:
    """Gray World gains: the max channel mean divided by each channel mean."""
    means = {
        "red": channel_mean(img.r),
        "green": channel_mean(img.g),
        "blue": channel_mean(img.b),
    }
    for name, m in means.items():
        if m <= 0.0:
            raise ValueError(f"{name} channel mean is zero; cannot white-balance")
    top = max(means.values())
    return GrayWorldRatios(
        red=top / means["red"],
        green=top / means["green"],
        blue=top / means["blue"],
    )


def clamp_normalize_channel(plane, ratio: float, cfg: EnhanceConfig) -> np.ndarray:
    """Quantile-clamp a channel and stretch it affinely to [0, 1].

    The clamp thresholds are the lower quantiles at levels alpha1 * ratio
    and alpha2 * ratio (levels clipped into [0, 1] first, since a gain
    above 1 can push them out of the quantile domain). Samples are clamped
    to [s1, s2] and mapped so s1 -> 0 and s2 -> 1. A degenerate channel
    (s1 == s2) is returned unchanged with a warning.
    """
    cfg.validate()
    level_lo = float(np.clip(cfg.alpha1 * ratio, 0.0, 1.0))
    level_hi = float(np.clip(cfg.alpha2 * ratio, 0.0, 1.0))
    s1 = quantile(plane, level_lo)
    s2 = quantile(plane, level_hi)
    if s1 >= s2:
        log.warning(
            "degenerate channel: clamp thresholds coincide (s1=%g, s2=%g); "
            "returning channel unchanged", s1, s2,
        )
        return np.asarray(plane, dtype=np.float64).copy()
    clamped = np.clip(plane, s1, s2)
    return (clamped - s1) / (s2 - s1)


def ghe(img: Image) -> Image:
    """Global histogram equalization of the HSV value channel.

    Hue and saturation are carried through unchanged; only value is
    remapped through its cumulative histogram.
    """
    hsv = rgb_to_hsv(img)
    hsv.v = equalize_histogram(hsv.v)
    return hsv_to_rgb(hsv)


def unsharp(img: Image, cfg: EnhanceConfig = EnhanceConfig()) -> Image:
    """Unsharp masking: per channel 2*p - blur(p), clamped to [0, 1]."""
    cfg.validate()
    planes = []
    for p in img.planes:
        sharp = 2.0 * p
        sharp -= gaussian_blur(p, cfg.blur_sigma, cfg.blur_radius)
        planes.append(np.clip(sharp, 0.0, 1.0, out=sharp))
    return Image(*planes)


def fuse(a: Image, b: Image) -> Image:
    """Per-sample arithmetic mean of two equally sized images."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"cannot fuse {a.width}x{a.height} with {b.width}x{b.height}"
        )
    return Image(*(0.5 * (pa + pb) for pa, pb in zip(a.planes, b.planes)))


def enhance_pipeline(img: Image, cfg: EnhanceConfig | None = None) -> Image:
    """Run the full enhancement chain on one image."""
    cfg = (cfg or EnhanceConfig()).validate()
    comp = compensate(img)
    gains = gray_world_ratios(comp)
    balanced = Image(
        clamp_normalize_channel(comp.r, gains.red, cfg),
        clamp_normalize_channel(comp.g, gains.green, cfg),
        clamp_normalize_channel(comp.b, gains.blue, cfg),
    )
    return fuse(ghe(balanced), unsharp(balanced, cfg))
