"""spdkit: per-pixel log-polar shape descriptors for instance layouts,
a descriptor-conditioned feature modulation block, and the matching
training losses — plus a small CLI (``spdkit compute|viz|bench|selftest``).
"""

from .errors import (
    BadBinIndex,
    ClassOutOfRange,
    DegenerateDistance,
    EmptyContour,
    FormatError,
    IoError,
    NonDivisibleDims,
    NonFinite,
    NonPositiveProbability,
    OutOfRange,
    ShapeMismatch,
    SpdKitError,
)
from .ingest import (
    FORMATS,
    InstanceMap,
    InstanceRegion,
    LabelMap,
    extract_instances,
    load_instance_map,
    load_label_map,
    one_hot,
    resolve_format,
)
from .losses import (
    FeatureStack,
    LossWeights,
    class_weights,
    feature_matching,
    hinge_d,
    hinge_g,
    perceptual,
    semantic_alignment,
    total_loss,
)
from .safm import (
    SafmParams,
    conv2d,
    dynamic_depthwise_conv,
    finite_diff_check,
    load_params_csv,
    safm_backward,
    safm_forward,
    save_params_csv,
    standardize,
    unfold3x3,
)
from .spd import BinSpec, PolarOffsets, bin_index, descriptor, polar_transform
from .spdmap import SpdMap, compute_map, deserialize, pool_map, serialize

__version__ = "0.1.0"

__all__ = [
    "BadBinIndex", "ClassOutOfRange", "DegenerateDistance", "EmptyContour",
    "FormatError", "IoError", "NonDivisibleDims", "NonFinite",
    "NonPositiveProbability", "OutOfRange", "ShapeMismatch", "SpdKitError",
    "FORMATS", "InstanceMap", "InstanceRegion", "LabelMap",
    "extract_instances", "load_instance_map", "load_label_map", "one_hot",
    "resolve_format",
    "FeatureStack", "LossWeights", "class_weights", "feature_matching",
    "hinge_d", "hinge_g", "perceptual", "semantic_alignment", "total_loss",
    "SafmParams", "conv2d", "dynamic_depthwise_conv", "finite_diff_check",
    "load_params_csv", "safm_backward", "safm_forward", "save_params_csv",
    "standardize", "unfold3x3",
    "BinSpec", "PolarOffsets", "bin_index", "descriptor", "polar_transform",
    "SpdMap", "compute_map", "deserialize", "pool_map", "serialize",
    "__version__",
]
