"""Biorthogonal filter banks and the discrete wavelet transform."""
from .filters import WAVELETS, FilterBank, annihilation_order, filter_bank, wavelet_from_id
from .transform import (
    MODES,
    WaveletCoefficients,
    coeff_len,
    dwt_single,
    idwt_single,
    level_lengths,
    max_level,
    wavedec,
    waverec,
)

__all__ = [
    "MODES",
    "WAVELETS",
    "FilterBank",
    "WaveletCoefficients",
    "annihilation_order",
    "coeff_len",
    "dwt_single",
    "filter_bank",
    "idwt_single",
    "level_lengths",
    "max_level",
    "wavedec",
    "wavelet_from_id",
    "waverec",
]
