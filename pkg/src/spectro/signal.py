"""Sample-domain primitives: windows, padding, strided convolution, FIR design,
and factor-2 downsampling.

Everything here is a pure function of its inputs; returned containers hold
read-only float64 arrays and are safe to share across threads.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

WINDOW_KINDS = ("hann", "hamming", "blackman", "rectangular")


def _readonly(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Signal:
    """A mono sample sequence with its sample rate in Hz.

    Samples are coerced to float64, validated to be finite, and frozen.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite (no NaN/Inf)")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", _readonly(samples))
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        """Length of the signal in seconds."""
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class WindowVec:
    """A smoothing window: values in [0, 1], plus how it was made."""

    values: np.ndarray
    kind: str
    periodic: bool

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=np.float64)))

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class FirFilter:
    """FIR filter taps with the normalized cutoff they were designed for.

    ``normalized_cutoff`` is a fraction of the Nyquist frequency in (0, 1).
    Designed filters are symmetric (linear phase) with unit DC gain.
    """

    taps: np.ndarray
    normalized_cutoff: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D sequence")
        if not 0.0 < self.normalized_cutoff < 1.0:
            raise ValueError("normalized_cutoff must lie in (0, 1)")
        if abs(taps.sum() - 1.0) > 1e-9:
            raise ValueError("taps must sum to 1 (unit DC gain)")
        if np.max(np.abs(taps - taps[::-1])) > 1e-12:
            raise ValueError("taps must be symmetric about the center")
        object.__setattr__(self, "taps", _readonly(taps))


@dataclass(frozen=True)
class FrameMatrix:
    """Kernel responses per analysis frame: rows are kernels, columns frames."""

    values: np.ndarray
    hop: int = field(default=1)

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=np.float64)))

    @property
    def n_frames(self):
        return self.values.shape[1]


def make_window(kind: str, n: int, periodic: bool = True) -> WindowVec:
    """Build a length-``n`` smoothing window.

    Parameters
    ----------
    kind : {"hann", "hamming", "blackman", "rectangular"}
    n : int > 0
        Window length in samples.
    periodic : bool
        Periodic windows use denominator ``n`` (suited to overlapped spectral
        analysis); symmetric windows use ``n - 1``.
    """
    if n < 1:
        raise ValueError(f"window length must be >= 1, got {n}")
    if kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window kind {kind!r}; expected one of {WINDOW_KINDS}")
    if kind == "rectangular":
        return WindowVec(np.ones(n), kind, periodic)
    denom = n if periodic else n - 1
    if denom == 0:
        # single-point symmetric window degenerates to an identity weight
        return WindowVec(np.ones(1), kind, periodic)
    t = 2.0 * np.pi * np.arange(n) / denom
    if kind == "hann":
        vals = 0.5 - 0.5 * np.cos(t)
    elif kind == "hamming":
        vals = 0.54 - 0.46 * np.cos(t)
    else:  # blackman
        vals = 0.42 - 0.5 * np.cos(t) + 0.08 * np.cos(2.0 * t)
    return WindowVec(np.clip(vals, 0.0, 1.0), kind, periodic)


def pad_signal(x: Signal, mode: str, left: int, right: int) -> Signal:
    """Pad a signal on both sides.

    ``reflect`` mirrors the interior without repeating the edge sample, so the
    pad amounts must be strictly shorter than the signal.
    """
    if left < 0 or right < 0:
        raise ValueError("pad amounts must be non-negative")
    if mode == "reflect":
        if left >= len(x) or right >= len(x):
            raise ValueError(
                f"reflect padding ({left}, {right}) must be shorter than the signal (len {len(x)})"
            )
        padded = np.pad(x.samples, (left, right), mode="reflect")
    elif mode == "constant_zero":
        padded = np.pad(x.samples, (left, right))
    else:
        raise ValueError(f"unknown pad mode {mode!r}")
    return Signal(padded, x.sample_rate)


def conv1d_strided(x: Signal, kernels, stride: int) -> FrameMatrix:
    """Slide a bank of kernels along a signal, hopping ``stride`` samples.

    Each output entry is the plain dot product of one kernel row with the
    signal segment starting at ``frame * stride`` (cross-correlation; kernel
    rows are used as given, without index reversal).

    Returns a FrameMatrix of shape ``(n_kernels, n_frames)`` with
    ``n_frames = (len(x) - kernel_len) // stride + 1``.
    """
    kernels = np.atleast_2d(np.asarray(kernels))
    if np.iscomplexobj(kernels):
        raise ValueError("kernels must be real; run real and imaginary parts separately")
    kernels = kernels.astype(np.float64, copy=False)
    if kernels.size == 0:
        raise ValueError("at least one non-empty kernel row is required")
    m = kernels.shape[1]
    if m > len(x):
        raise ValueError(f"kernel length {m} exceeds signal length {len(x)}; pad the signal first")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    # contiguous frames keep the product on the fast BLAS path
    frames = np.ascontiguousarray(sliding_window_view(x.samples, m)[::stride])
    values = frames @ kernels.T  # (n_frames, n_kernels)
    return FrameMatrix(np.ascontiguousarray(values.T), hop=stride)


def design_lowpass_fir(num_taps: int, cutoff: float, window_kind: str = "hamming") -> FirFilter:
    """Design a low-pass FIR filter with the windowed-sinc method.

    Parameters
    ----------
    num_taps : odd int >= 3
        Filter length; odd so the filter is symmetric with a center tap.
    cutoff : float in (0, 1)
        Cutoff as a fraction of the Nyquist frequency.
    window_kind : str
        Smoothing window applied to the ideal sinc response (symmetric form).

    The taps are normalized to sum to 1 (unit DC gain) and symmetrized so
    ``taps[i] == taps[-1 - i]`` holds exactly.
    """
    if num_taps < 3 or num_taps % 2 == 0:
        raise ValueError(f"num_taps must be an odd integer >= 3, got {num_taps}")
    if not 0.0 < cutoff < 1.0:
        raise ValueError(f"cutoff must lie in (0, 1), got {cutoff}")
    n = np.arange(num_taps)
    center = (num_taps - 1) / 2.0
    win = make_window(window_kind, num_taps, periodic=False)
    taps = cutoff * np.sinc(cutoff * (n - center)) * win.values
    taps = 0.5 * (taps + taps[::-1])  # bit-exact symmetry
    taps /= taps.sum()
    return FirFilter(taps=taps, normalized_cutoff=cutoff)


def fir_frequency_response(f, n_points: int = 512):
    """Sample the magnitude response of an FIR filter on [0, Nyquist].

    Accepts a FirFilter or a plain tap sequence. Returns ``(freqs, mag_db)``
    where ``freqs`` are fractions of Nyquist in [0, 1] and ``mag_db`` is
    ``20 log10 |H|`` (``-inf`` where the response is exactly zero).
    """
    taps = f.taps if isinstance(f, FirFilter) else np.asarray(f, dtype=np.float64)
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    w = np.linspace(0.0, np.pi, n_points)
    response = np.exp(-1j * np.outer(w, np.arange(taps.size))) @ taps
    mag = np.abs(response)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(mag)
    return w / np.pi, mag_db


def downsample2(x: Signal, f: FirFilter) -> Signal:
    """Halve the sample rate: low-pass filter, then keep every second sample.

    The signal is reflect-padded by half the filter length and filtered with
    the center tap aligned (zero phase), so output sample ``i`` sits at input
    sample ``2 i``. Output length is ``ceil(len(x) / 2)``.
    """
    taps = f.taps
    if taps.size % 2 == 0:
        raise ValueError("downsample2 requires an odd-length (center-tap) filter")
    if len(x) < taps.size:
        raise ValueError(f"signal (len {len(x)}) shorter than filter (len {taps.size})")
    half = (taps.size - 1) // 2
    padded = np.pad(x.samples, (half, half), mode="reflect")
    filtered = np.convolve(padded, taps, mode="valid")  # length == len(x)
    return Signal(filtered[::2], x.sample_rate / 2.0)
