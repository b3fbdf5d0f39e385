"""Analytic gradients of spectrogram outputs with respect to transform
kernels, plus a central-difference harness for verifying them.

A TrainableLayer owns writable copies of its kernel arrays. The magnitude it
produces is smoothed, ``S = sqrt(re^2 + im^2 + eps_mag)``, so the gradient is
finite even where the plain magnitude has a kink at zero.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .kernels import CqtKernelBank, DftKernelBank, MelFilterBank
from .signal import Signal


def _pad_index_map(n: int, pad: int, mode: str):
    """Padded-position -> original-sample index; -1 marks zero-padded slots."""
    idx = np.arange(n)
    if mode == "reflect":
        return np.pad(idx, (pad, pad), mode="reflect")
    if mode == "constant_zero":
        return np.pad(idx, (pad, pad), constant_values=-1)
    raise ValueError(f"unknown pad mode {mode!r}")


@dataclass
class TrainableLayer:
    """A spectrogram layer whose kernels may be updated by gradient descent.

    ``kernels`` is the bank the layer was initialized from; the layer keeps
    its own writable parameter arrays (``params()``) so training never
    mutates the source bank. For a Mel bank the fixed STFT stage that feeds
    it must be supplied as ``stft_bank``.
    """

    kernels: DftKernelBank | MelFilterBank | CqtKernelBank
    hop: int
    trainable: bool = True
    eps_mag: float = 1e-12
    center: bool = True
    pad_mode: str = "reflect"
    stft_bank: DftKernelBank | None = None
    _params: dict = field(init=False, repr=False)

    def __post_init__(self):
        bank = self.kernels
        if isinstance(bank, DftKernelBank):
            self._params = {"h_re": np.array(bank.h_re), "h_im": np.array(bank.h_im)}
        elif isinstance(bank, CqtKernelBank):
            self._params = {"h_re": np.array(bank.time_kernels.real),
                            "h_im": np.array(bank.time_kernels.imag)}
        elif isinstance(bank, MelFilterBank):
            if self.stft_bank is None:
                raise ValueError("a Mel layer needs the fixed stft_bank it is applied to")
            self._params = {"weights": np.array(bank.weights)}
        else:
            raise TypeError(f"unsupported kernel bank type {type(bank).__name__}")

    def params(self) -> dict:
        """The layer's writable parameter arrays, keyed by name."""
        return self._params

    @property
    def is_mel(self) -> bool:
        return isinstance(self.kernels, MelFilterBank)

    def _frames(self, x: Signal, width: int) -> np.ndarray:
        samples = x.samples
        if self.center:
            pad = width // 2
            if self.pad_mode == "reflect":
                samples = np.pad(samples, (pad, pad), mode="reflect")
            else:
                samples = np.pad(samples, (pad, pad))
        if samples.size < width:
            raise ValueError(f"signal too short ({samples.size}) for window {width}")
        return np.ascontiguousarray(sliding_window_view(samples, width)[::self.hop])

    def _conv_forward(self, x: Signal):
        h_re, h_im = self._params["h_re"], self._params["h_im"]
        frames = self._frames(x, h_re.shape[1])
        re = frames @ h_re.T
        im = frames @ h_im.T
        mag = np.sqrt(re * re + im * im + self.eps_mag)
        return frames, re.T, im.T, mag.T

    def _stft_magnitude(self, x: Signal):
        bank = self.stft_bank
        frames = self._frames(x, bank.n_fft)
        re = frames @ bank.h_re.T
        im = frames @ bank.h_im.T
        return np.sqrt(re * re + im * im + self.eps_mag).T

    def spectrogram(self, x: Signal) -> np.ndarray:
        """Forward pass: the smoothed-magnitude spectrogram (bins x frames)."""
        if self.is_mel:
            return self._params["weights"] @ self._stft_magnitude(x)
        return self._conv_forward(x)[3]


def spectrogram_vjp(x: Signal, layer: TrainableLayer, upstream_grad: np.ndarray,
                    with_input_grad: bool = False):
    """Vector-Jacobian product: pull a loss gradient back onto the kernels.

    For a magnitude layer ``S = sqrt(re^2 + im^2 + eps)`` the kernel gradients
    are ``dL/dh_re[r, m] = sum_t g[r, t] (re[r, t] / S[r, t]) frames[t, m]``
    (and likewise for ``h_im``); for a Mel layer the weight gradient is
    ``upstream @ stft_magnitude.T``. Returns a dict of gradients keyed like
    ``layer.params()``; with ``with_input_grad=True`` a second value holds
    ``dL/dx`` with padding contributions folded back onto the signal.
    """
    upstream_grad = np.asarray(upstream_grad, dtype=np.float64)
    expected = layer.spectrogram(x).shape
    if upstream_grad.shape != expected:
        raise ValueError(f"upstream_grad shape {upstream_grad.shape} != spectrogram shape {expected}")

    if layer.is_mel:
        smag = layer._stft_magnitude(x)
        grads = {"weights": upstream_grad @ smag.T}
        if with_input_grad:
            raise NotImplementedError("input gradients are only provided for convolution layers")
        return grads

    frames, re, im, mag = layer._conv_forward(x)
    coef_re = upstream_grad * (re / mag)  # (bins, frames)
    coef_im = upstream_grad * (im / mag)
    grads = {"h_re": coef_re @ frames, "h_im": coef_im @ frames}
    if not with_input_grad:
        return grads

    h_re, h_im = layer._params["h_re"], layer._params["h_im"]
    width = h_re.shape[1]
    frame_grads = coef_re.T @ h_re + coef_im.T @ h_im  # (frames, width)
    pad = width // 2 if layer.center else 0
    padded_len = len(x) + 2 * pad
    grad_padded = np.zeros(padded_len)
    starts = np.arange(frame_grads.shape[0]) * layer.hop
    positions = starts[:, None] + np.arange(width)[None, :]
    np.add.at(grad_padded, positions.ravel(), frame_grads.ravel())
    grad_x = np.zeros(len(x))
    if layer.center:
        index_map = _pad_index_map(len(x), pad, layer.pad_mode)
        keep = index_map >= 0
        np.add.at(grad_x, index_map[keep], grad_padded[keep])
    else:
        grad_x += grad_padded
    return grads, grad_x


def finite_diff_check(f, theta: np.ndarray, analytic: np.ndarray, indices,
                      eps: float = 1e-6) -> float:
    """Largest relative disagreement between ``analytic`` and central
    differences of ``f`` over the sampled entries of ``theta``.

    ``f(theta)`` must return a scalar; ``theta`` is perturbed in place and
    restored. The relative error at each index is
    ``|analytic - numeric| / (|analytic| + 1e-12)``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    worst = 0.0
    for idx in indices:
        idx = tuple(np.atleast_1d(idx)) if not np.isscalar(idx) else (idx,)
        original = theta[idx]
        theta[idx] = original + eps
        f_plus = f(theta)
        theta[idx] = original - eps
        f_minus = f(theta)
        theta[idx] = original
        numeric = (f_plus - f_minus) / (2.0 * eps)
        rel = abs(analytic[idx] - numeric) / (abs(analytic[idx]) + 1e-12)
        worst = max(worst, rel)
    return worst
