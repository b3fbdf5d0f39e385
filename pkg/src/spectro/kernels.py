"""Transform kernel construction: DFT bases on integer, linear, or log frequency
scales, Mel filter banks, constant-Q kernel banks, a radix-2 FFT, and a naive
O(N^2) DFT used as the correctness oracle throughout the test suite.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .signal import WindowVec, make_window, _readonly

FREQUENCY_SCALE_KINDS = ("no", "linear", "log")
MEL_FORMULAS = ("htk", "slaney")


# ---------------------------------------------------------------------------
# Frequency scales and DFT kernel banks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyScale:
    """Normalized analysis frequencies (cycles per window) for a DFT bank.

    ``norm_freqs[k]`` is the number of oscillation cycles of basis vector
    ``k`` across the analysis window; multiply by ``sample_rate / n_fft`` to
    get Hz.
    """

    kind: str
    n_fft: int
    sample_rate: float
    fmin: float
    fmax: float
    n_bins: int
    norm_freqs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "norm_freqs", _readonly(np.asarray(self.norm_freqs, dtype=np.float64)))

    @property
    def bin_freqs_hz(self) -> np.ndarray:
        return self.norm_freqs * (self.sample_rate / self.n_fft)


def hz_to_k(f, sample_rate: float, n_fft: int):
    """Convert frequency in Hz to normalized frequency (cycles per window)."""
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if n_fft < 1:
        raise ValueError("n_fft must be >= 1")
    return np.asarray(f, dtype=np.float64) * n_fft / sample_rate


def k_to_hz(k, sample_rate: float, n_fft: int):
    """Convert normalized frequency (cycles per window) to Hz: f = k * sr / N."""
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if n_fft < 1:
        raise ValueError("n_fft must be >= 1")
    return np.asarray(k, dtype=np.float64) * sample_rate / n_fft


def build_frequency_scale(kind: str, n_fft: int, sample_rate: float,
                          fmin: float = 50.0, fmax: float = 6000.0,
                          n_bins: int | None = None) -> FrequencyScale:
    """Construct the normalized-frequency ladder for a DFT kernel bank.

    kind "no" uses the integer DFT bins ``0 .. n_bins-1`` (``fmin``/``fmax``
    are ignored). "linear" spaces ``n_bins`` bins evenly between ``fmin`` and
    ``fmax``; "log" spaces them geometrically. Both reach ``fmax`` at index
    ``n_bins`` (one past the last bin), so the last bin sits just below it.
    """
    if kind not in FREQUENCY_SCALE_KINDS:
        raise ValueError(f"unknown frequency scale {kind!r}; expected one of {FREQUENCY_SCALE_KINDS}")
    if n_fft < 1:
        raise ValueError("n_fft must be >= 1")
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if n_bins is None:
        n_bins = n_fft // 2 + 1
    if not 1 <= n_bins <= n_fft // 2 + 1:
        raise ValueError(f"n_bins must lie in [1, n_fft/2 + 1], got {n_bins}")

    k = np.arange(n_bins, dtype=np.float64)
    if kind == "no":
        norm_freqs = k
        fmin = 0.0
        fmax = (n_bins - 1) * sample_rate / n_fft
    else:
        if not 0.0 < fmin < fmax:
            raise ValueError(f"need 0 < fmin < fmax, got fmin={fmin}, fmax={fmax}")
        if fmax > sample_rate / 2.0:
            raise ValueError(f"fmax={fmax} exceeds the Nyquist frequency {sample_rate / 2.0}")
        start = fmin * n_fft / sample_rate
        if kind == "linear":
            slope = (fmax - fmin) * n_fft / (n_bins * sample_rate)
            norm_freqs = slope * k + start
        else:  # log
            norm_freqs = start * (fmax / fmin) ** (k / n_bins)
    return FrequencyScale(kind=kind, n_fft=n_fft, sample_rate=float(sample_rate),
                          fmin=float(fmin), fmax=float(fmax), n_bins=int(n_bins),
                          norm_freqs=norm_freqs)


@dataclass(frozen=True)
class DftKernelBank:
    """Paired cosine/sine convolution kernels for a windowed DFT.

    Row ``r`` of ``h_re`` is ``cos(2 pi nf[r] n / N) * w[n]`` and of ``h_im``
    is ``sin(2 pi nf[r] n / N) * w[n]`` (no index reversal; apply them with a
    plain sliding dot product). The complex frame value is ``re - i im``.
    """

    h_re: np.ndarray
    h_im: np.ndarray
    scale: FrequencyScale
    window: WindowVec
    bin_freqs_hz: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h_re", _readonly(self.h_re))
        object.__setattr__(self, "h_im", _readonly(self.h_im))
        object.__setattr__(self, "bin_freqs_hz", _readonly(self.bin_freqs_hz))

    @property
    def n_bins(self):
        return self.h_re.shape[0]

    @property
    def n_fft(self):
        return self.h_re.shape[1]


def build_dft_kernels(scale: FrequencyScale, window: WindowVec) -> DftKernelBank:
    """Materialize the cosine/sine kernel rows for a frequency scale."""
    n = scale.n_fft
    if len(window) != n:
        raise ValueError(f"window length {len(window)} does not match n_fft {n}")
    phase = 2.0 * np.pi * np.outer(scale.norm_freqs, np.arange(n)) / n
    h_re = np.cos(phase) * window.values
    h_im = np.sin(phase) * window.values
    return DftKernelBank(h_re=h_re, h_im=h_im, scale=scale, window=window,
                         bin_freqs_hz=scale.bin_freqs_hz)


# ---------------------------------------------------------------------------
# Mel scale and filter banks
# ---------------------------------------------------------------------------

_SLANEY_BREAK_HZ = 1000.0
_SLANEY_BREAK_MEL = 15.0
_SLANEY_LOGSTEP = 27.0 / math.log(6.4)


def hz_to_mel(f, formula: str = "htk"):
    """Convert Hz to mel. ``htk`` is fully logarithmic; ``slaney`` is linear
    below 1 kHz and logarithmic above."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("frequencies must be non-negative")
    if formula == "htk":
        return 2595.0 * np.log10(1.0 + f / 700.0)
    if formula == "slaney":
        linear = 3.0 * f / 200.0
        log_part = np.log(np.maximum(f, _SLANEY_BREAK_HZ) / _SLANEY_BREAK_HZ)
        return np.where(f < _SLANEY_BREAK_HZ, linear,
                        _SLANEY_BREAK_MEL + _SLANEY_LOGSTEP * log_part)
    raise ValueError(f"unknown mel formula {formula!r}; expected one of {MEL_FORMULAS}")


def mel_to_hz(m, formula: str = "htk"):
    """Invert hz_to_mel."""
    m = np.asarray(m, dtype=np.float64)
    if formula == "htk":
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    if formula == "slaney":
        linear = 200.0 * m / 3.0
        log_part = _SLANEY_BREAK_HZ * np.exp(np.maximum(m - _SLANEY_BREAK_MEL, 0.0) / _SLANEY_LOGSTEP)
        return np.where(m < _SLANEY_BREAK_MEL, linear, log_part)
    raise ValueError(f"unknown mel formula {formula!r}; expected one of {MEL_FORMULAS}")


@dataclass(frozen=True)
class MelFilterBank:
    """Triangular weights mapping STFT bins to Mel bins.

    Each row is a triangle sampled at the STFT bin frequencies; rows rise then
    fall over a contiguous support. With ``norm="none"`` every row is rescaled
    so its largest sampled weight equals 1; ``norm="area"`` instead scales row
    ``m`` by ``2 / (f_right - f_left)`` so each triangle integrates to one.
    """

    weights: np.ndarray
    formula: str
    norm: str
    mel_center_freqs_hz: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "mel_center_freqs_hz", _readonly(self.mel_center_freqs_hz))

    @property
    def n_mels(self):
        return self.weights.shape[0]

    @property
    def n_stft_bins(self):
        return self.weights.shape[1]


def build_mel_filter_bank(sr: float, n_fft: int, n_mels: int,
                          fmin: float = 0.0, fmax: float | None = None,
                          formula: str = "htk", norm: str = "none") -> MelFilterBank:
    """Build a Mel filter bank over the ``n_fft // 2 + 1`` STFT bins.

    ``n_mels + 2`` points are spaced evenly on the mel axis from ``fmin`` to
    ``fmax``; triangle ``m`` spans points ``m .. m + 2`` and peaks at ``m + 1``.
    """
    if fmax is None:
        fmax = sr / 2.0
    if n_mels < 1:
        raise ValueError("n_mels must be >= 1")
    if not 0.0 <= fmin < fmax:
        raise ValueError(f"need 0 <= fmin < fmax, got fmin={fmin}, fmax={fmax}")
    if fmax > sr / 2.0:
        raise ValueError(f"fmax={fmax} exceeds the Nyquist frequency {sr / 2.0}")
    if norm not in ("none", "area"):
        raise ValueError(f"unknown norm {norm!r}; expected 'none' or 'area'")

    mel_points = np.linspace(hz_to_mel(fmin, formula), hz_to_mel(fmax, formula), n_mels + 2)
    hz_points = mel_to_hz(mel_points, formula)
    bin_freqs = np.arange(n_fft // 2 + 1) * (sr / n_fft)

    weights = np.zeros((n_mels, bin_freqs.size))
    for m in range(n_mels):
        f_left, f_center, f_right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_freqs - f_left) / (f_center - f_left)
        falling = (f_right - bin_freqs) / (f_right - f_center)
        row = np.maximum(0.0, np.minimum(rising, falling))
        peak = row.max()
        if peak == 0.0:
            warnings.warn(
                f"mel filter {m} has empty support; n_mels={n_mels} is too large "
                f"for n_fft={n_fft} at sr={sr}", stacklevel=2)
        elif norm == "none":
            row = row / peak
        else:
            row = row * (2.0 / (f_right - f_left))
        weights[m] = row
    return MelFilterBank(weights=weights, formula=formula, norm=norm,
                         mel_center_freqs_hz=hz_points[1:-1])


# ---------------------------------------------------------------------------
# Constant-Q kernel banks
# ---------------------------------------------------------------------------

def cqt_q(bins_per_octave: int) -> float:
    """Quality factor: cycles of oscillation in every constant-Q basis vector."""
    if bins_per_octave < 1:
        raise ValueError("bins_per_octave must be >= 1")
    return 1.0 / (2.0 ** (1.0 / bins_per_octave) - 1.0)


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (int(n) - 1).bit_length()


@dataclass(frozen=True)
class CqtConfig:
    """Parameters of a constant-Q transform.

    When ``fmax`` is given it overrides ``n_bins`` with
    ``floor(bins_per_octave * log2(fmax / fmin)) + 1``. The top analysis
    frequency must stay below Nyquist.
    """

    sr: float
    fmin: float = 32.70
    n_bins: int = 84
    bins_per_octave: int = 12
    hop_length: int = 512
    window_kind: str = "hann"
    norm: int | None = 1
    fmax: float | None = None
    pad_mode: str = "reflect"
    early_downsample: bool = True
    downsample_taps: int = 255

    def __post_init__(self):
        if self.sr <= 0:
            raise ValueError("sr must be positive")
        if self.fmin <= 0:
            raise ValueError("fmin must be positive")
        if self.bins_per_octave < 1:
            raise ValueError("bins_per_octave must be >= 1")
        if self.hop_length < 1:
            raise ValueError("hop_length must be >= 1")
        if self.norm not in (1, 2, None):
            raise ValueError("norm must be 1, 2, or None")
        if self.fmax is not None:
            n_bins = int(math.floor(self.bins_per_octave * math.log2(self.fmax / self.fmin))) + 1
            object.__setattr__(self, "n_bins", n_bins)
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        top = self.fmin * 2.0 ** ((self.n_bins - 1) / self.bins_per_octave)
        if top >= self.sr / 2.0:
            raise ValueError(
                f"top bin frequency {top:.2f} Hz reaches the Nyquist frequency "
                f"{self.sr / 2.0:.2f} Hz; reduce n_bins or fmax")

    @property
    def bin_freqs_hz(self) -> np.ndarray:
        k = np.arange(self.n_bins, dtype=np.float64)
        return self.fmin * 2.0 ** (k / self.bins_per_octave)


@dataclass(frozen=True)
class CqtKernelBank:
    """Complex constant-Q kernels, one row per bin.

    ``time_kernels`` rows hold the windowed complex exponentials, each placed
    so its center sample sits at column ``width // 2`` and zero-padded to a
    common (even) width. ``freq_kernels``, when built, holds each kernel's
    length-``fft_len`` spectrum with the index convention that puts the peak
    at the kernel's positive center-frequency bin, so that
    ``sum(X * freq_kernels[r]) / fft_len`` equals the time-domain inner
    product ``sum(segment * time_kernels[r])`` for any segment spectrum X.
    """

    q: float
    lengths: np.ndarray
    bin_freqs_hz: np.ndarray
    time_kernels: np.ndarray
    fft_len: int
    sample_rate: float
    freq_kernels: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "lengths", _readonly(self.lengths))
        object.__setattr__(self, "bin_freqs_hz", _readonly(self.bin_freqs_hz))
        object.__setattr__(self, "time_kernels", _readonly(self.time_kernels))
        if self.freq_kernels is not None:
            object.__setattr__(self, "freq_kernels", _readonly(self.freq_kernels))

    @property
    def n_bins(self):
        return self.time_kernels.shape[0]

    @property
    def width(self):
        return self.time_kernels.shape[1]


def build_cqt_kernels(cfg: CqtConfig, domain: str = "time") -> CqtKernelBank:
    """Construct the constant-Q kernel bank for ``cfg``.

    Bin ``k`` analyzes ``f_k = fmin * 2^(k / b)`` with a window of
    ``N_k = ceil(Q * sr / f_k)`` samples, so every kernel holds (within the
    integer rounding of its length) the same ``Q`` oscillation cycles:
    ``f_k N_k / sr`` lies in ``[Q, Q + f_k / sr)``. The complex exponential
    is evaluated at the exact bin frequency; quantizing it to ``Q / N_k``
    instead would shift every kernel's center frequency by up to one part in
    ``N_k``, which visibly skews magnitudes once the recursive transform
    reuses kernels at halved sample rates. Each kernel is smoothed by a
    periodic window of its own length, normalized per ``cfg.norm`` (1: L1,
    2: L2, None: raw), and center-aligned. ``domain="frequency"``
    additionally packs the kernels into rows of length ``fft_len`` (next
    power of two above the longest kernel) and stores their spectra for the
    frequency-domain path.
    """
    if domain not in ("time", "frequency"):
        raise ValueError(f"domain must be 'time' or 'frequency', got {domain!r}")
    q = cqt_q(cfg.bins_per_octave)
    freqs = cfg.bin_freqs_hz
    lengths = np.ceil(q * cfg.sr / freqs).astype(np.int64)
    fft_len = next_pow2(int(lengths[0]))
    if domain == "frequency":
        width = fft_len
    else:
        width = int(lengths[0])
        width += width & 1  # even width keeps frame centers on the hop grid

    time_kernels = np.zeros((cfg.n_bins, width), dtype=np.complex128)
    for k in range(cfg.n_bins):
        n_k = int(lengths[k])
        n = np.arange(n_k)
        kernel = np.exp(-2j * np.pi * (freqs[k] / cfg.sr) * n)
        kernel *= make_window(cfg.window_kind, n_k, periodic=True).values
        if cfg.norm == 1:
            kernel /= np.abs(kernel).sum()
        elif cfg.norm == 2:
            kernel /= np.sqrt((np.abs(kernel) ** 2).sum())
        start = width // 2 - n_k // 2
        time_kernels[k, start:start + n_k] = kernel

    freq_kernels = None
    if domain == "frequency":
        # Spectrum with reversed index sign so the Parseval product
        # (1/N) sum_k X[k] Y[k] reproduces sum_n x[n] y[n] exactly.
        freq_kernels = np.conj(fft(np.conj(time_kernels)))
    return CqtKernelBank(q=q, lengths=lengths, bin_freqs_hz=freqs,
                         time_kernels=time_kernels, fft_len=fft_len,
                         sample_rate=cfg.sr, freq_kernels=freq_kernels)


# ---------------------------------------------------------------------------
# FFT and the naive-DFT oracle
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _bit_reverse_indices(n: int) -> np.ndarray:
    levels = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(levels):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    rev.setflags(write=False)
    return rev


def _fft_forward(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    out = a[..., _bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(a.shape[:-1] + (n // size, size))
        low = blocks[..., :half].copy()
        high = blocks[..., half:] * twiddle
        blocks[..., :half] = low + high
        blocks[..., half:] = low - high
        size *= 2
    return out


def fft(v, inverse: bool = False) -> np.ndarray:
    """Radix-2 FFT along the last axis; length must be a power of two.

    Forward computes ``X[k] = sum_n x[n] e^{-2 pi i k n / N}``; the inverse
    applies the conjugate transform scaled by ``1 / N``.
    """
    a = np.asarray(v, dtype=np.complex128)
    n = a.shape[-1]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"FFT length must be a power of two, got {n}")
    if inverse:
        return np.conj(_fft_forward(np.conj(a))) / n
    return _fft_forward(a)


@lru_cache(maxsize=4)
def _dft_tables(n: int):
    phase = 2.0 * np.pi * np.outer(np.arange(n), np.arange(n)) / n
    cos_t, sin_t = np.cos(phase), np.sin(phase)
    cos_t.setflags(write=False)
    sin_t.setflags(write=False)
    return cos_t, sin_t


def dft_naive(x) -> np.ndarray:
    """Direct O(N^2) DFT via the split cosine/sine sums; the transform oracle.

    Returns the full N-bin spectrum. For real input, bins above N/2 mirror the
    first half; callers interested in the one-sided spectrum slice [0, N/2].
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n < 1:
        raise ValueError("input must be non-empty")
    cos_t, sin_t = _dft_tables(n)
    return (cos_t @ x) - 1j * (sin_t @ x)
