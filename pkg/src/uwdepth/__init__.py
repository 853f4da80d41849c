"""Underwater image enhancement and monocular depth estimation toolkit."""

from .dataset import make_synthetic_set, scan
from .depth import BinSpec, DepthMap, LossWeights, reconstruct_depth
from .enhance import EnhanceConfig, enhance_pipeline
from .image import Image
from .metrics import evaluate_pair, evaluate_set
from .prior import fit_prior, pool_samples, predict_prior
from .rmi import rmi_decompose

__version__ = "0.1.0"
