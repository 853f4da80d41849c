"""Decomposition of an RGB image into the R / M / I channel triple.

R is the raw red channel, M the per-pixel maximum of green and blue, and
I a gray intensity. Red light attenuates fastest under water, so the
spread between R and M carries coarse distance information; I preserves
overall structure.
"""

from dataclasses import dataclass

import numpy as np

from .image import Image

# BT.601 luma weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class RmiPlanes:
    r: np.ndarray
    m: np.ndarray
    i: np.ndarray

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def height(self) -> int:
        return self.r.shape[0]


def rmi_decompose(img: Image, gray: str = "luma") -> RmiPlanes:
    """Split an image into red, max(green, blue), and gray intensity.

    gray selects the intensity formula: "luma" (BT.601 weighted sum,
    default) or "mean" (plain channel average).
    """
    if gray == "luma":
        wr, wg, wb = LUMA_WEIGHTS
        intensity = wr * img.r + wg * img.g + wb * img.b
    elif gray == "mean":
        intensity = (img.r + img.g + img.b) / 3.0
    else:
        raise ValueError(f"unknown gray mode: {gray!r} (use 'luma' or 'mean')")
    return RmiPlanes(img.r.copy(), np.maximum(img.g, img.b), intensity)
