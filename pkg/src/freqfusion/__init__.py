"""Adaptive low/high-pass feature fusion operators and feature-quality analysis."""
from .analysis import (
    LabelMap,
    SimReport,
    Spectrum,
    boundary_mask,
    category_centers,
    dft2,
    inter_similarity,
    intra_similarity,
    kernel_frequency_response,
    nyquist_band_energy,
    radial_amplitude_spectrum,
    radial_power_spectrum,
    sim_report,
    similarity_accuracy,
    similarity_margin,
)
from .fusion import (
    FusionConfig,
    FusionOutput,
    FusionParams,
    bilinear_filter_field,
    cascade_fuse,
    freqfusion_forward,
    initial_fusion,
    standard_fusion,
)
from .generators import (
    ConvParams,
    GeneratorParams,
    OffsetField,
    ahpf_enhance,
    ahpf_generate,
    alpf_generate,
    alpf_upsample,
    local_similarity,
    offset_generate,
    resample,
)
from .tensor import (
    FilterField,
    FilterKind,
    PaddingMode,
    apply_filter_field,
    bilinear_sample,
    conv2d,
    kernel_softmax,
    pixel_shuffle,
    pixel_unshuffle,
)

__version__ = "0.1.0"
