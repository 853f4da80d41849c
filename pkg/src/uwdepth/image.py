"""Core raster types and reusable pixel primitives.

Images are stored planar: three float64 arrays of shape (height, width)
holding red, green and blue intensities in [0, 1]. Single-channel rasters
("planes") are plain 2-D float64 arrays. All operations here are pure:
they never modify their inputs.
"""

from dataclasses import dataclass

import numpy as np

# A plane is a 2-D float64 ndarray; the alias exists for signatures only.
Plane = np.ndarray


def as_plane(samples) -> np.ndarray:
    """Coerce input to a 2-D float64 array without copying when possible."""
    p = np.asarray(samples, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError(f"plane must be 2-D, got shape {p.shape}")
    return p


@dataclass
class Image:
    """Planar RGB raster with intensities in [0, 1]."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.r = as_plane(self.r)
        self.g = as_plane(self.g)
        self.b = as_plane(self.b)
        if not (self.r.shape == self.g.shape == self.b.shape):
            raise ValueError(
                f"channel shapes differ: {self.r.shape}, {self.g.shape}, {self.b.shape}"
            )
        if self.r.size == 0:
            raise ValueError("image must contain at least one pixel")

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def planes(self):
        return self.r, self.g, self.b

    def validate(self) -> "Image":
        """Check the full invariant: every sample finite and in [0, 1]."""
        for name, p in zip("rgb", self.planes):
            if not np.all(np.isfinite(p)):
                raise ValueError(f"non-finite samples in {name} plane")
            if p.min() < 0.0 or p.max() > 1.0:
                raise ValueError(f"{name} plane has samples outside [0, 1]")
        return self

    @classmethod
    def from_array(cls, arr) -> "Image":
        """Build from an (H, W, 3) array."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 3 or a.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {a.shape}")
        return cls(a[:, :, 0].copy(), a[:, :, 1].copy(), a[:, :, 2].copy())

    def to_array(self) -> np.ndarray:
        """Interleave the planes into an (H, W, 3) array."""
        return np.stack(self.planes, axis=-1)


@dataclass
class HsvImage:
    """HSV raster: hue in degrees [0, 360), saturation and value in [0, 1]."""

    h: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.h = as_plane(self.h)
        self.s = as_plane(self.s)
        self.v = as_plane(self.v)
        if not (self.h.shape == self.s.shape == self.v.shape):
            raise ValueError("HSV plane shapes differ")

    @property
    def width(self) -> int:
        return self.h.shape[1]

    @property
    def height(self) -> int:
        return self.h.shape[0]


def channel_mean(plane) -> float:
    """Arithmetic mean of all samples in a plane."""
    p = as_plane(plane)
    if p.size == 0:
        raise ValueError("cannot take the mean of an empty plane")
    return float(p.mean())


def quantile(plane, level: float) -> float:
    """Lower empirical quantile of a plane.

    Sorts the samples ascending and returns the element at index
    floor(level * (n - 1)). level must lie in [0, 1]; level 0 is the
    minimum and level 1 the maximum.
    """
    p = as_plane(plane)
    if p.size == 0:
        raise ValueError("cannot take a quantile of an empty plane")
    if not (0.0 <= level <= 1.0):
        raise ValueError(f"quantile level must be in [0, 1], got {level}")
    flat = p.ravel()
    idx = int(np.floor(level * (flat.size - 1)))
    # Selection instead of a full sort; O(n) per lookup.
    return float(np.partition(flat, idx)[idx])


def rgb_to_hsv(img: Image) -> HsvImage:
    """Hexcone RGB -> HSV conversion, vectorized over the whole raster.

    Hue is measured in degrees and is 0 for achromatic pixels.
    """
    r, g, b = img.planes
    v = np.maximum(np.maximum(r, g), b)
    c = v - np.minimum(np.minimum(r, g), b)

    h = np.zeros_like(v)
    chromatic = c > 0.0
    cs = np.where(chromatic, c, 1.0)  # dummy divisor where c == 0
    r_max = chromatic & (v == r)
    g_max = chromatic & (v == g) & ~r_max
    b_max = chromatic & ~r_max & ~g_max
    h = np.where(r_max, ((g - b) / cs) % 6.0, h)
    h = np.where(g_max, (b - r) / cs + 2.0, h)
    h = np.where(b_max, (r - g) / cs + 4.0, h)
    h = (h * 60.0) % 360.0

    s = np.where(v > 0.0, c / np.where(v > 0.0, v, 1.0), 0.0)
    return HsvImage(h, s, v)


def hsv_to_rgb(hsv: HsvImage) -> Image:
    """Inverse hexcone HSV -> RGB conversion.

    Uses the branch-free form channel = v * (1 - s * t(k)) with
    k = (offset + h/60) mod 6 and t = clamp(min(k, 4 - k), 0, 1), which
    avoids building per-sector masks. Clipping guards last-bit rounding.
    """
    hp = (hsv.h % 360.0) / 60.0
    vs = hsv.v * hsv.s

    def channel(offset: float) -> np.ndarray:
        k = (offset + hp) % 6.0
        t = np.clip(np.minimum(k, 4.0 - k), 0.0, 1.0)
        t *= vs
        return np.clip(hsv.v - t, 0.0, 1.0)

    return Image(channel(5.0), channel(3.0), channel(1.0))


def gaussian_kernel_1d(sigma: float, radius: int) -> np.ndarray:
    """One-dimensional Gaussian kernel of size 2*radius + 1, normalized to sum 1."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return w / w.sum()


def _blur_axis(plane: np.ndarray, weights: np.ndarray, radius: int, axis: int) -> np.ndarray:
    """One separable blur pass with edge replication.

    Written as out = x + sum_{k != 0} w_k * (x_shifted_k - x), which keeps
    constant regions bit-exact regardless of how the kernel weights round.
    """
    if axis == 0:
        padded = np.pad(plane, ((radius, radius), (0, 0)), mode="edge")
    else:
        padded = np.pad(plane, ((0, 0), (radius, radius)), mode="edge")
    h, w = plane.shape
    out = plane.copy()
    scratch = np.empty_like(plane)
    for k in range(-radius, radius + 1):
        if k == 0:
            continue
        if axis == 0:
            shifted = padded[radius + k:radius + k + h, :]
        else:
            shifted = padded[:, radius + k:radius + k + w]
        np.subtract(shifted, plane, out=scratch)
        scratch *= weights[radius + k]
        out += scratch
    return out


def gaussian_blur(plane, sigma: float = 1.0, radius: int = 2) -> np.ndarray:
    """Separable Gaussian blur with edge replication at the borders."""
    p = as_plane(plane)
    w = gaussian_kernel_1d(sigma, radius)
    return _blur_axis(_blur_axis(p, w, radius, axis=1), w, radius, axis=0)


def equalize_histogram(plane) -> np.ndarray:
    """Global histogram equalization over 256 levels.

    Samples are quantized to levels 0..255, the cumulative histogram is
    built, and level l maps to (cdf(l) - cdf_min) / (n - cdf_min), which
    already lies in [0, 1]. A constant plane is returned unchanged.
    """
    p = as_plane(plane)
    levels = np.clip(np.rint(p * 255.0), 0, 255).astype(np.int64)
    hist = np.bincount(levels.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    n = p.size
    cdf_min = cdf[np.nonzero(hist)[0][0]]
    if n == cdf_min:
        # Single occupied level: the mapping is degenerate.
        return p.copy()
    lut = (cdf - cdf_min) / float(n - cdf_min)
    return lut[levels]
