"""spectro: time-frequency transforms built as convolution kernel banks.

STFT, Mel spectrograms, and four constant-Q variants share one primitive:
a bank of kernels slid along the signal with a hop stride. Kernel banks are
built once, are immutable, and carry enough metadata to interpret their
output; a differentiable layer exposes analytic kernel gradients for the
trainable-transform experiment.
"""

from .errors import CorruptFileError, UnsupportedFormatError
from .gradients import TrainableLayer, finite_diff_check, spectrogram_vjp
from .kernels import (CqtConfig, CqtKernelBank, DftKernelBank, FrequencyScale,
                      MelFilterBank, build_cqt_kernels, build_dft_kernels,
                      build_frequency_scale, build_mel_filter_bank, cqt_q,
                      dft_naive, fft, hz_to_k, hz_to_mel, k_to_hz, mel_to_hz,
                      next_pow2)
from .siggen import SignalSpecgen, gen_signal
from .signal import (FirFilter, FrameMatrix, Signal, WindowVec, conv1d_strided,
                     design_lowpass_fir, downsample2, fir_frequency_response,
                     make_window, pad_signal)
from .specfile import read_spec, write_csv, write_spec
from .training import (LinearPredictor, SineDataset, gen_sine_dataset,
                       make_mel_layer, make_stft_layer,
                       train_frequency_predictor)
from .transforms import (Cqt1992, Cqt1992v2, Cqt2010, Cqt2010v2, MelParams,
                         MelSpec, Spectrogram, Stft, StftParams,
                         batch_transform, cqt1992, cqt1992v2, cqt2010,
                         cqt2010v2, mel_spectrogram, stft)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "CorruptFileError", "UnsupportedFormatError",
    "TrainableLayer", "finite_diff_check", "spectrogram_vjp",
    "CqtConfig", "CqtKernelBank", "DftKernelBank", "FrequencyScale",
    "MelFilterBank", "build_cqt_kernels", "build_dft_kernels",
    "build_frequency_scale", "build_mel_filter_bank", "cqt_q",
    "dft_naive", "fft", "hz_to_k", "hz_to_mel", "k_to_hz", "mel_to_hz",
    "next_pow2",
    "SignalSpecgen", "gen_signal",
    "FirFilter", "FrameMatrix", "Signal", "WindowVec", "conv1d_strided",
    "design_lowpass_fir", "downsample2", "fir_frequency_response",
    "make_window", "pad_signal",
    "read_spec", "write_csv", "write_spec",
    "LinearPredictor", "SineDataset", "gen_sine_dataset", "make_mel_layer",
    "make_stft_layer", "train_frequency_predictor",
    "Cqt1992", "Cqt1992v2", "Cqt2010", "Cqt2010v2", "MelParams", "MelSpec",
    "Spectrogram", "Stft", "StftParams", "batch_transform", "cqt1992",
    "cqt1992v2", "cqt2010", "cqt2010v2", "mel_spectrogram", "stft",
    "read_wav", "write_wav",
    "__version__",
]
