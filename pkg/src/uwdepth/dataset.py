"""Dataset ingestion: paired RGB / depth directory trees and synthetic sets.

Real data follows the layout <root>/<rgb_subdir>/*.png (or .ppm) and
<root>/<depth_subdir>/*.png, pairing files by shared stem. Depth PNGs are
8- or 16-bit grayscale, normalized to [0, 1] by the bit-depth maximum;
zero depth means "no measurement" and is masked invalid.

The synthetic generator renders known-degradation underwater scenes from
random smooth depth fields so the enhancement and prior stages can be
exercised end to end without real captures.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .depth import DepthMap
from .fileio import RGB_EXTENSIONS, image_size, load_gray, load_image
from .image import Image

log = logging.getLogger(__name__)

DEPTH_EXTENSIONS = (".png",)

# Synthetic water column: per-channel attenuation rates and veiling light.
# Red dies fastest; the veil is blue-green. These numbers only need to
# produce plausibly degraded inputs, they do not model real water.
ATTENUATION = {"r": 3.2, "g": 1.8, "b": 2.4}
VEIL = {"r": 0.02, "g": 0.30, "b": 0.36}
ALBEDO_MEAN = {"r": 0.55, "g": 0.50, "b": 0.45}
ALBEDO_SPREAD = {"r": 0.15, "g": 0.12, "b": 0.12}

# Every scene's depth values span a window of this width; the window
# bottom slides over DEPTH_LOW_RANGE across the set so mean scene depth
# rises strictly while the windows stay heavily overlapped.
DEPTH_WINDOW = 0.80
DEPTH_LOW_RANGE = (0.05, 0.11)


@dataclass
class ManifestEntry:
    image_id: str
    rgb_path: str
    depth_path: str
    width: int
    height: int
    split: str = "train"


@dataclass
class Manifest:
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def to_json(self) -> str:
        return json.dumps([vars(e) for e in self.entries], indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path):
        entries = [ManifestEntry(**doc) for doc in json.loads(Path(path).read_text())]
        return cls(entries)


def _index_by_stem(directory: Path, extensions) -> dict:
    found = {}
    for p in sorted(directory.iterdir()):
        if p.suffix.lower() in extensions and p.is_file():
            if p.stem in found:
                log.warning("duplicate stem %r in %s; keeping %s",
                            p.stem, directory, found[p.stem].name)
                continue
            found[p.stem] = p
    return found


def scan(root_dir, rgb_subdir: str = "RGB", depth_subdir: str = "depth",
         split: str = "train") -> Manifest:
    """Pair RGB and depth files by stem and validate their dimensions.

    Unmatched files and dimension mismatches are logged and skipped; an
    empty pairing is an error.
    """
    root = Path(root_dir)
    rgb_dir = root / rgb_subdir
    depth_dir = root / depth_subdir
    for d in (rgb_dir, depth_dir):
        if not d.is_dir():
            raise FileNotFoundError(f"not a directory: {d}")

    rgb_files = _index_by_stem(rgb_dir, RGB_EXTENSIONS)
    depth_files = _index_by_stem(depth_dir, DEPTH_EXTENSIONS)

    for stem in sorted(set(rgb_files) - set(depth_files)):
        log.warning("no depth file for RGB image %r; skipping", stem)
    for stem in sorted(set(depth_files) - set(rgb_files)):
        log.warning("no RGB file for depth image %r; skipping", stem)

    entries = []
    for stem in sorted(set(rgb_files) & set(depth_files)):
        rgb_size = image_size(rgb_files[stem])
        depth_size = image_size(depth_files[stem])
        if rgb_size != depth_size:
            log.warning(
                "dimension mismatch for %r: RGB %s vs depth %s; rejecting",
                stem, rgb_size, depth_size,
            )
            continue
        entries.append(ManifestEntry(
            image_id=stem,
            rgb_path=str(rgb_files[stem]),
            depth_path=str(depth_files[stem]),
            width=rgb_size[0],
            height=rgb_size[1],
            split=split,
        ))
    if not entries:
        raise ValueError(f"no usable RGB/depth pairs under {root}")
    return Manifest(entries)


def load_pair(entry: ManifestEntry) -> tuple[Image, DepthMap]:
    """Load one manifest entry; zero depth samples are masked invalid."""
    img = load_image(entry.rgb_path)
    depth_vals = load_gray(entry.depth_path)
    depth = DepthMap(depth_vals, depth_vals > 0.0)
    if (img.width, img.height) != (depth.width, depth.height):
        raise ValueError(
            f"dimension mismatch between {entry.rgb_path} and {entry.depth_path}"
        )
    return img, depth


def smooth_field(rng, height: int, width: int, waves: int = 4) -> np.ndarray:
    """Random smooth scalar field in [0, 1] from low-frequency cosines."""
    y, x = np.mgrid[0:height, 0:width]
    f = np.zeros((height, width))
    for _ in range(waves):
        fx = rng.uniform(0.3, 2.0) / width
        fy = rng.uniform(0.3, 2.0) / height
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(0.5, 1.0)
        f += amp * np.cos(2.0 * np.pi * (fx * x + fy * y) + phase)
    lo, hi = f.min(), f.max()
    if hi - lo < 1e-12:
        return np.full((height, width), 0.5)
    return (f - lo) / (hi - lo)


def _rank_uniform(field_: np.ndarray) -> np.ndarray:
    """Remap a field's values onto the exact uniform grid {0, ..., 1}.

    The remap is monotone, so spatial structure survives, and every image
    of a given size ends up with the identical value multiset. That makes
    per-scene depth statistics a function of the depth window alone.
    """
    flat = field_.ravel()
    if flat.size == 1:
        return np.full_like(field_, 0.5)
    order = np.argsort(flat, kind="stable")
    ranks = np.empty(flat.size, dtype=np.int64)
    ranks[order] = np.arange(flat.size)
    return (ranks / (flat.size - 1)).reshape(field_.shape)


def _texture(rng, height: int, width: int, spread: float) -> np.ndarray:
    """Zero-mean smooth texture bounded by +/- spread."""
    f = smooth_field(rng, height, width)
    f = f - f.mean()
    peak = np.abs(f).max()
    if peak < 1e-12:
        return np.zeros((height, width))
    return spread * f / peak


def _decorrelate(texture: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Remove the component of `texture` aligned with `reference`.

    Used on the red albedo texture against the red transmission field so
    the rendered red-channel mean depends on scene depth alone rather
    than on a chance texture/depth correlation.
    """
    ref = reference - reference.mean()
    denom = float((ref * ref).sum())
    if denom < 1e-12:
        return texture
    out = texture - (float((texture * ref).sum()) / denom) * ref
    out = out - out.mean()
    peak = np.abs(out).max()
    bound = np.abs(texture).max()
    if peak > bound > 0.0:
        out = out * (bound / peak)
    return out


def render_underwater(albedos: dict, depth_vals: np.ndarray) -> Image:
    """Apply the attenuation + veiling-light model to albedo planes.

    Each channel c follows albedo_c * exp(-k_c d) + veil_c * (1 - exp(-k_c d)).
    """
    planes = {}
    for name in ("r", "g", "b"):
        transmission = np.exp(-ATTENUATION[name] * depth_vals)
        planes[name] = (albedos[name] * transmission
                        + VEIL[name] * (1.0 - transmission))
    return Image(np.clip(planes["r"], 0.0, 1.0),
                 np.clip(planes["g"], 0.0, 1.0),
                 np.clip(planes["b"], 0.0, 1.0))


def make_synthetic_set(n: int, seed: int, width: int = 96, height: int = 72):
    """Deterministic list of (Image, DepthMap) pairs with known degradation.

    Each scene's depth values are an exact uniform ladder over a window of
    fixed width; the window bottom rises across the set, so mean scene
    depth rises strictly and the rendered red-channel mean falls strictly
    with it (the red texture is decorrelated from transmission to keep
    that relation exact). Depth is strictly positive everywhere, so the
    companion masks are all-valid.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if n > 1:
        lows = np.linspace(DEPTH_LOW_RANGE[0], DEPTH_LOW_RANGE[1], n)
    else:
        lows = np.array([0.5 * (DEPTH_LOW_RANGE[0] + DEPTH_LOW_RANGE[1])])
    pairs = []
    for lo in lows:
        u = _rank_uniform(smooth_field(rng, height, width))
        depth_vals = lo + DEPTH_WINDOW * u
        transmission_r = np.exp(-ATTENUATION["r"] * depth_vals)
        albedos = {}
        for name in ("r", "g", "b"):
            tex = _texture(rng, height, width, ALBEDO_SPREAD[name])
            if name == "r":
                tex = _decorrelate(tex, transmission_r)
            albedos[name] = ALBEDO_MEAN[name] + tex
        img = render_underwater(albedos, depth_vals)
        pairs.append((img, DepthMap(depth_vals)))
    return pairs
