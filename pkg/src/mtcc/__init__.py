"""Minutia cylinder code fingerprint toolkit.

Local descriptors built on cylinder-quantized minutia neighborhoods, with
texture-augmented variants fed by short-time Fourier analysis of the ridge
pattern, a relaxation-based global matcher, image enhancement, and a
verification protocol with DET/EER reporting.
"""

from .angles import angle_diff, wrap_pi, wrap_two_pi
from .config import (
    VALID_KINDS,
    Config,
    CylinderParams,
    EnhancementParams,
    RelaxParams,
    StftParams,
    config_from_text,
    config_to_text,
    load_config,
)
from .descriptor import (
    SET1_KINDS,
    SET2_KINDS,
    EmptyTemplateError,
    build_cylinder,
    build_template,
    cell_angle,
    cell_center,
    cell_validity,
    cell_value,
    directional_contribution,
    sigmoid,
    spatial_contribution,
)
from .enhancement import (
    EmptyMaskError,
    enhance_pipeline,
    gabor_enhance,
    segment,
    smqt_normalize,
)
from .evaluation import (
    DatasetLayout,
    ProtocolResult,
    compute_eer,
    compute_fmr1000,
    det_points,
    emit_curves,
    emit_summary,
    fmr1000_operating_point,
    genuine_impostor_counts,
    run_protocol,
)
from .matcher import (
    KindMismatchError,
    MatchResult,
    compute_np,
    cylinder_similarity,
    global_score,
    local_similarity_matrix,
    lss_select,
    matchable,
    relax,
    similarity_double_angle,
    similarity_euclidean,
)
from .minutiae import Minutia, MinutiaeParseError, load_minutiae, parse_minutiae
from .stft import TextureMaps, analyze_windows, normalize_to_angle, stft_analyze
from .templates import (
    BadMagicError,
    ChecksumError,
    Cylinder,
    Template,
    TemplateIOError,
    TruncatedTemplateError,
    UnsupportedVersionError,
    deserialize_template,
    load_template,
    save_template,
    serialize_template,
)

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "ChecksumError",
    "Config",
    "Cylinder",
    "CylinderParams",
    "DatasetLayout",
    "EmptyMaskError",
    "EmptyTemplateError",
    "EnhancementParams",
    "KindMismatchError",
    "MatchResult",
    "Minutia",
    "MinutiaeParseError",
    "ProtocolResult",
    "RelaxParams",
    "SET1_KINDS",
    "SET2_KINDS",
    "StftParams",
    "Template",
    "TemplateIOError",
    "TextureMaps",
    "TruncatedTemplateError",
    "UnsupportedVersionError",
    "VALID_KINDS",
    "analyze_windows",
    "angle_diff",
    "build_cylinder",
    "build_template",
    "cell_angle",
    "cell_center",
    "cell_validity",
    "cell_value",
    "compute_eer",
    "compute_fmr1000",
    "compute_np",
    "config_from_text",
    "config_to_text",
    "cylinder_similarity",
    "deserialize_template",
    "det_points",
    "directional_contribution",
    "emit_curves",
    "emit_summary",
    "enhance_pipeline",
    "fmr1000_operating_point",
    "gabor_enhance",
    "genuine_impostor_counts",
    "global_score",
    "load_config",
    "load_minutiae",
    "load_template",
    "local_similarity_matrix",
    "lss_select",
    "matchable",
    "normalize_to_angle",
    "parse_minutiae",
    "relax",
    "run_protocol",
    "save_template",
    "segment",
    "serialize_template",
    "sigmoid",
    "similarity_double_angle",
    "similarity_euclidean",
    "smqt_normalize",
    "spatial_contribution",
    "stft_analyze",
    "wrap_pi",
    "wrap_two_pi",
]
