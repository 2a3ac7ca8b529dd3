"""Fourier-based batch style standardization for self-supervised learning."""

from .estimators import BatchStylesStandardization, FourierAugmentation
from .fourier import Spectrum, amp_phase, dft2, fftshift, idft2, ifftshift, reconstruct
from .metrics import (
    Histogram,
    anchor_negative_similarities,
    domain_purity,
    knn,
    prototype_homogeneity,
)
from .objectives import (
    msn_loss,
    msn_probs,
    nt_xent,
    prototype_probs,
    sinkhorn_knopp,
    swav_loss_multicrop,
    swav_loss_pair,
)
from .pipeline import (
    ColorJitterParams,
    GeometryParams,
    ViewSpec,
    make_msn_views,
    make_simclr_views,
    make_swav_views,
)
from .rng import SplitMix64
from .style import (
    batch_styles_standardize,
    fourier_augment,
    standardized_low_freq_check,
    substitute_low_freq,
)
from .tensor import alloc_batch

__version__ = "0.1.0"

__all__ = [
    "BatchStylesStandardization", "FourierAugmentation",
    "Spectrum", "amp_phase", "dft2", "fftshift", "idft2", "ifftshift", "reconstruct",
    "Histogram", "anchor_negative_similarities", "domain_purity", "knn", "prototype_homogeneity",
    "msn_loss", "msn_probs", "nt_xent", "prototype_probs", "sinkhorn_knopp",
    "swav_loss_multicrop", "swav_loss_pair",
    "ColorJitterParams", "GeometryParams", "ViewSpec",
    "make_msn_views", "make_simclr_views", "make_swav_views",
    "SplitMix64",
    "batch_styles_standardize", "fourier_augment", "standardized_low_freq_check",
    "substitute_low_freq",
    "alloc_batch",
]
