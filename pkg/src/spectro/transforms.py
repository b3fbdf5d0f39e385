"""End-user transforms: STFT, Mel spectrogram, and the four constant-Q
variants, all driven by strided convolution against precomputed kernel banks.

Transform objects build their kernels once at construction and are immutable
afterwards, so a single instance can be reused across many signals (and
threads). The module-level functions are one-shot conveniences.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernels import (CqtConfig, CqtKernelBank, build_cqt_kernels,
                      build_dft_kernels, build_frequency_scale,
                      build_mel_filter_bank)
from .signal import Signal, conv1d_strided, design_lowpass_fir, downsample2, make_window, pad_signal, _readonly

OUTPUT_KINDS = ("complex", "magnitude", "power")


@dataclass(frozen=True)
class Spectrogram:
    """A bins-by-frames matrix with the metadata needed to interpret it."""

    data: np.ndarray
    bin_freqs_hz: np.ndarray | None
    hop: int
    sample_rate: float
    kind: str

    def __post_init__(self):
        if self.kind not in OUTPUT_KINDS:
            raise ValueError(f"kind must be one of {OUTPUT_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "data", _readonly(self.data))
        if self.bin_freqs_hz is not None:
            object.__setattr__(self, "bin_freqs_hz", _readonly(np.asarray(self.bin_freqs_hz, dtype=np.float64)))

    @property
    def n_bins(self):
        return self.data.shape[0]

    @property
    def n_frames(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class StftParams:
    """STFT settings. Defaults: 2048-point Hann analysis every 512 samples,
    centered with reflect padding, one-sided integer bins, magnitude output.
    """

    n_fft: int = 2048
    freq_bins: int | None = None
    hop_length: int = 512
    window: str = "hann"
    freq_scale: str = "no"
    center: bool = True
    pad_mode: str = "reflect"
    fmin: float = 50.0
    fmax: float = 6000.0
    output: str = "magnitude"


@dataclass(frozen=True)
class MelParams:
    """Mel spectrogram settings; ``sr`` may be left None to use the signal's."""

    sr: float | None = None
    n_fft: int = 2048
    n_mels: int = 128
    hop_length: int = 512
    window: str = "hann"
    center: bool = True
    pad_mode: str = "reflect"
    htk: bool = False
    fmin: float = 0.0
    fmax: float | None = None
    norm: str = "none"
    power: float = 1.0


def _finish(re: np.ndarray, im: np.ndarray, output: str):
    if output == "complex":
        return re - 1j * im
    if output == "magnitude":
        return np.hypot(re, im)
    if output == "power":
        return re * re + im * im
    raise ValueError(f"output must be one of {OUTPUT_KINDS}, got {output!r}")


def _from_complex(frames: np.ndarray, output: str):
    if output == "complex":
        return frames
    if output == "magnitude":
        return np.abs(frames)
    if output == "power":
        return frames.real ** 2 + frames.imag ** 2
    raise ValueError(f"output must be one of {OUTPUT_KINDS}, got {output!r}")


def _center_pad(x: Signal, width: int, pad_mode: str) -> Signal:
    return pad_signal(x, pad_mode, width // 2, width // 2)


class Stft:
    """Short-time Fourier transform with precomputed cosine/sine kernels.

    Frames are produced every ``hop_length`` samples. With ``center=True``
    the signal is padded by ``n_fft // 2`` on each side, giving
    ``1 + len(x) // hop`` frames referenced to the original sample grid.
    """

    def __init__(self, params: StftParams, sample_rate: float):
        if params.output not in OUTPUT_KINDS:
            raise ValueError(f"output must be one of {OUTPUT_KINDS}")
        self.params = params
        self.sample_rate = float(sample_rate)
        scale = build_frequency_scale(params.freq_scale, params.n_fft, sample_rate,
                                      fmin=params.fmin, fmax=params.fmax,
                                      n_bins=params.freq_bins)
        window = make_window(params.window, params.n_fft, periodic=True)
        self.bank = build_dft_kernels(scale, window)
        self._stacked = np.vstack([self.bank.h_re, self.bank.h_im])

    def __call__(self, x: Signal, output: str | None = None) -> Spectrogram:
        p = self.params
        if x.sample_rate != self.sample_rate:
            raise ValueError(f"signal rate {x.sample_rate} != transform rate {self.sample_rate}")
        if len(x) < 1:
            raise ValueError("signal must be non-empty")
        if p.center:
            x = _center_pad(x, p.n_fft, p.pad_mode)
        frames = conv1d_strided(x, self._stacked, p.hop_length).values
        n_bins = self.bank.n_bins
        re, im = frames[:n_bins], frames[n_bins:]
        out = output if output is not None else p.output
        return Spectrogram(data=_finish(re, im, out), bin_freqs_hz=self.bank.bin_freqs_hz,
                           hop=p.hop_length, sample_rate=self.sample_rate,
                           kind=out)


class MelSpec:
    """Mel spectrogram: triangular filter bank applied to the magnitude STFT."""

    def __init__(self, params: MelParams, sample_rate: float):
        if params.sr is not None and params.sr != sample_rate:
            raise ValueError(f"params.sr {params.sr} != sample_rate {sample_rate}")
        self.params = params
        self.sample_rate = float(sample_rate)
        self._stft = Stft(StftParams(n_fft=params.n_fft, hop_length=params.hop_length,
                                     window=params.window, center=params.center,
                                     pad_mode=params.pad_mode, output="magnitude"),
                          sample_rate)
        self.bank = build_mel_filter_bank(sample_rate, params.n_fft, params.n_mels,
                                          fmin=params.fmin, fmax=params.fmax,
                                          formula="htk" if params.htk else "slaney",
                                          norm=params.norm)

    def __call__(self, x: Signal) -> Spectrogram:
        p = self.params
        stft_mag = self._stft(x).data
        if p.power != 1.0:
            stft_mag = stft_mag ** p.power
        data = self.bank.weights @ stft_mag
        return Spectrogram(data=data, bin_freqs_hz=self.bank.mel_center_freqs_hz,
                           hop=p.hop_length, sample_rate=self.sample_rate,
                           kind="magnitude" if p.power == 1.0 else "power")


def _complex_conv(x: Signal, kernels: np.ndarray, hop: int, pad_mode: str) -> np.ndarray:
    """Centered strided convolution with complex kernel rows.

    Pads by half the kernel width so frame ``t`` is centered on sample
    ``t * hop``, then runs the real and imaginary parts as one stacked bank.
    """
    width = kernels.shape[1]
    padded = _center_pad(x, width, pad_mode)
    stacked = np.vstack([kernels.real, kernels.imag])
    frames = conv1d_strided(padded, stacked, hop).values
    r = kernels.shape[0]
    return frames[:r] + 1j * frames[r:]


def _full_spectrum_dft_rows(n: int):
    phase = 2.0 * np.pi * np.outer(np.arange(n), np.arange(n)) / n
    return np.cos(phase), np.sin(phase)


class Cqt1992v2:
    """Constant-Q transform by direct convolution with time-domain kernels."""

    def __init__(self, cfg: CqtConfig):
        self.cfg = cfg
        self.bank = build_cqt_kernels(cfg, domain="time")

    def __call__(self, x: Signal, output: str = "magnitude") -> Spectrogram:
        cfg = self.cfg
        if x.sample_rate != cfg.sr:
            raise ValueError(f"signal rate {x.sample_rate} != configured rate {cfg.sr}")
        frames = _complex_conv(x, self.bank.time_kernels, cfg.hop_length, cfg.pad_mode)
        data = _from_complex(frames, output)
        return Spectrogram(data=data, bin_freqs_hz=self.bank.bin_freqs_hz,
                           hop=cfg.hop_length, sample_rate=cfg.sr, kind=output)


class Cqt1992:
    """Constant-Q transform through the frequency domain.

    Each frame's full-length spectrum is computed by convolving with a
    rectangular-window DFT bank, then multiplied with the frequency-domain
    constant-Q kernels and scaled by ``1 / fft_len`` (the power-theorem
    route). Output matches Cqt1992v2 up to rounding because no kernel
    sparsification is applied.
    """

    def __init__(self, cfg: CqtConfig):
        self.cfg = cfg
        self.bank = build_cqt_kernels(cfg, domain="frequency")
        cos_rows, sin_rows = _full_spectrum_dft_rows(self.bank.fft_len)
        self._dft_stacked = np.vstack([cos_rows, sin_rows])

    def __call__(self, x: Signal, output: str = "magnitude") -> Spectrogram:
        cfg = self.cfg
        if x.sample_rate != cfg.sr:
            raise ValueError(f"signal rate {x.sample_rate} != configured rate {cfg.sr}")
        n = self.bank.fft_len
        padded = _center_pad(x, n, cfg.pad_mode)
        frames = conv1d_strided(padded, self._dft_stacked, cfg.hop_length).values
        spectra = (frames[:n] - 1j * frames[n:]).T  # (n_frames, fft_len)
        cq = (spectra @ self.bank.freq_kernels.T).T / n
        data = _from_complex(cq, output)
        return Spectrogram(data=data, bin_freqs_hz=self.bank.bin_freqs_hz,
                           hop=cfg.hop_length, sample_rate=cfg.sr, kind=output)


class _CqtRecursive:
    """Shared machinery for the octave-recursive constant-Q transforms.

    Kernels are built once for the top octave; each lower octave reuses them
    on the input downsampled by another factor of two with the hop halved,
    which shifts the analyzed frequencies down one octave.
    """

    def __init__(self, cfg: CqtConfig, domain: str):
        b = cfg.bins_per_octave
        self.cfg = cfg
        self.n_octaves = math.ceil(cfg.n_bins / b)
        divisor = 2 ** (self.n_octaves - 1)
        if cfg.hop_length % divisor != 0:
            raise ValueError(
                f"hop_length must be divisible by 2**(n_octaves - 1) = {divisor}, "
                f"got {cfg.hop_length}")
        self.n_filters = min(b, cfg.n_bins)
        self._first_bin = cfg.n_bins - self.n_filters  # global index of lowest top-octave bin
        f_top = cfg.fmin * 2.0 ** ((cfg.n_bins - 1) / b)

        m = 0
        if cfg.early_downsample:
            # Pre-halve the rate while the top analysis band keeps a 1.3x
            # guard below the shrinking Nyquist and the hop stays divisible.
            limit = cfg.sr / (2.0 * 1.3 * f_top)
            if limit > 1.0:
                m = int(math.floor(math.log2(limit)))
            while m > 0 and cfg.hop_length % (2 ** (m + self.n_octaves - 1)) != 0:
                m -= 1
        self.early_stages = m
        self.kernel_sr = cfg.sr / 2 ** m
        self.kernel_hop = cfg.hop_length // 2 ** m

        top_cfg = CqtConfig(sr=self.kernel_sr,
                            fmin=cfg.fmin * 2.0 ** (self._first_bin / b),
                            n_bins=self.n_filters, bins_per_octave=b,
                            hop_length=max(1, self.kernel_hop // divisor),
                            window_kind=cfg.window_kind, norm=cfg.norm,
                            pad_mode=cfg.pad_mode, early_downsample=False)
        self.bank = build_cqt_kernels(top_cfg, domain=domain)
        self.fir = design_lowpass_fir(cfg.downsample_taps, 0.5, "hamming")
        if domain == "frequency":
            cos_rows, sin_rows = _full_spectrum_dft_rows(self.bank.fft_len)
            self._dft_stacked = np.vstack([cos_rows, sin_rows])

    def _octave_frames(self, x: Signal, hop: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: Signal, output: str = "magnitude") -> Spectrogram:
        cfg = self.cfg
        if x.sample_rate != cfg.sr:
            raise ValueError(f"signal rate {x.sample_rate} != configured rate {cfg.sr}")
        cur = x
        for _ in range(self.early_stages):
            cur = downsample2(cur, self.fir)
        b = cfg.bins_per_octave
        octaves = []
        for alpha in range(self.n_octaves):
            if alpha > 0:
                cur = downsample2(cur, self.fir)
            hop = self.kernel_hop >> alpha
            frames = self._octave_frames(cur, hop)
            skip = max(0, alpha * b - self._first_bin)  # rows that would fall below bin 0
            octaves.append((alpha, skip, frames[skip:]))
        n_frames = min(f.shape[1] for _, _, f in octaves)
        out = np.zeros((cfg.n_bins, n_frames), dtype=np.complex128)
        for alpha, skip, frames in octaves:
            for j in range(frames.shape[0]):
                out[self._first_bin + skip + j - alpha * b] = frames[j, :n_frames]
        data = _from_complex(out, output)
        return Spectrogram(data=data, bin_freqs_hz=cfg.bin_freqs_hz,
                           hop=cfg.hop_length, sample_rate=cfg.sr, kind=output)


class Cqt2010v2(_CqtRecursive):
    """Octave-recursive constant-Q transform using time-domain kernels only."""

    def __init__(self, cfg: CqtConfig):
        super().__init__(cfg, domain="time")

    def _octave_frames(self, x: Signal, hop: int) -> np.ndarray:
        return _complex_conv(x, self.bank.time_kernels, hop, self.cfg.pad_mode)


class Cqt2010(_CqtRecursive):
    """Octave-recursive constant-Q transform through the frequency domain."""

    def __init__(self, cfg: CqtConfig):
        super().__init__(cfg, domain="frequency")

    def _octave_frames(self, x: Signal, hop: int) -> np.ndarray:
        n = self.bank.fft_len
        padded = _center_pad(x, n, self.cfg.pad_mode)
        frames = conv1d_strided(padded, self._dft_stacked, hop).values
        spectra = (frames[:n] - 1j * frames[n:]).T
        return (spectra @ self.bank.freq_kernels.T).T / n


def stft(x: Signal, params: StftParams | None = None) -> Spectrogram:
    """One-shot STFT of ``x``; see Stft for the reusable-transform form."""
    return Stft(params or StftParams(), x.sample_rate)(x)


def mel_spectrogram(x: Signal, params: MelParams | None = None) -> Spectrogram:
    """One-shot Mel spectrogram of ``x``."""
    return MelSpec(params or MelParams(), x.sample_rate)(x)


def cqt1992(x: Signal, cfg: CqtConfig, output: str = "magnitude") -> Spectrogram:
    """One-shot frequency-domain constant-Q transform."""
    return Cqt1992(cfg)(x, output)


def cqt1992v2(x: Signal, cfg: CqtConfig, output: str = "magnitude") -> Spectrogram:
    """One-shot time-domain constant-Q transform (the default algorithm)."""
    return Cqt1992v2(cfg)(x, output)


def cqt2010(x: Signal, cfg: CqtConfig, output: str = "magnitude") -> Spectrogram:
    """One-shot recursive constant-Q transform (frequency-domain kernels)."""
    return Cqt2010(cfg)(x, output)


def cqt2010v2(x: Signal, cfg: CqtConfig, output: str = "magnitude") -> Spectrogram:
    """One-shot recursive constant-Q transform (time-domain kernels)."""
    return Cqt2010v2(cfg)(x, output)


def batch_transform(signals, transform, threads: int | None = None) -> list:
    """Apply one transform to many signals, preserving order.

    All signals must share a sample rate. With ``threads > 1`` (or the
    SPECTRO_THREADS environment variable) signals are fanned out to a thread
    pool; results are bit-identical to the sequential path either way.
    """
    signals = list(signals)
    if not signals:
        return []
    rates = {s.sample_rate for s in signals}
    if len(rates) > 1:
        raise ValueError(f"signals must share one sample rate, got {sorted(rates)}")
    if threads is None:
        threads = int(os.environ.get("SPECTRO_THREADS", "1"))
    if threads <= 1:
        return [transform(s) for s in signals]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(transform, signals))
