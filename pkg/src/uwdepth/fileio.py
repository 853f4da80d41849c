"""Reading and writing rasters.

RGB images: 8-bit PNG or PPM, samples divided by 255 on load.
Single-channel planes: 8- or 16-bit grayscale PNG, divided by the
bit-depth maximum (255 or 65535) on load. Saving quantizes with
round-to-nearest, so a save/load round trip stays within half a
quantization step.
"""

from pathlib import Path

import numpy as np
from PIL import Image as PilImage
from PIL import UnidentifiedImageError

from .image import Image, as_plane

RGB_EXTENSIONS = (".png", ".ppm")


class ImageReadError(IOError):
    """Raised when a file cannot be decoded; message carries the path."""


def load_image(path) -> Image:
    """Load an RGB raster from an 8-bit PNG or PPM file."""
    path = Path(path)
    try:
        with PilImage.open(path) as pil:
            pil = pil.convert("RGB") if pil.mode != "RGB" else pil
            arr = np.asarray(pil, dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageReadError(f"cannot read RGB image {path}: {exc}") from exc
    return Image.from_array(arr / 255.0)


def save_image(path, img: Image) -> None:
    """Write an RGB raster as 8-bit PNG or PPM, chosen by extension."""
    path = Path(path)
    if path.suffix.lower() not in RGB_EXTENSIONS:
        raise ValueError(f"unsupported RGB image extension: {path.suffix}")
    data = np.clip(np.rint(img.to_array() * 255.0), 0, 255).astype(np.uint8)
    PilImage.fromarray(data).save(path)


def load_gray(path) -> np.ndarray:
    """Load a grayscale PNG as a float plane in [0, 1].

    8-bit files are divided by 255, 16-bit files by 65535.
    """
    path = Path(path)
    try:
        with PilImage.open(path) as pil:
            if pil.mode == "L":
                return np.asarray(pil, dtype=np.float64) / 255.0
            if pil.mode in ("I;16", "I;16B", "I"):
                return np.asarray(pil, dtype=np.float64) / 65535.0
            # Color input where a plane was expected: collapse to luma.
            arr = np.asarray(pil.convert("L"), dtype=np.float64)
            return arr / 255.0
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageReadError(f"cannot read grayscale image {path}: {exc}") from exc


def save_gray(path, plane, bit_depth: int = 8) -> None:
    """Write a [0, 1] plane as an 8- or 16-bit grayscale PNG."""
    p = as_plane(plane)
    if bit_depth == 8:
        data = np.clip(np.rint(p * 255.0), 0, 255).astype(np.uint8)
    elif bit_depth == 16:
        data = np.clip(np.rint(p * 65535.0), 0, 65535).astype(np.uint16)
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    PilImage.fromarray(data).save(Path(path))


def image_size(path) -> tuple[int, int]:
    """Return (width, height) from the file header without decoding pixels."""
    path = Path(path)
    try:
        with PilImage.open(path) as pil:
            return pil.size
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageReadError(f"cannot read image header {path}: {exc}") from exc
