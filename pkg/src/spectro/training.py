"""Desk-scale trainable-kernel experiment: predict a sine wave's frequency
from a deliberately low-resolution spectrogram, comparing fixed against
trainable transform kernels.

The trainer is plain minibatch SGD, single threaded, and bit-deterministic
for a given seed.
"""

from dataclasses import dataclass

import numpy as np

from .gradients import TrainableLayer, spectrogram_vjp
from .kernels import build_dft_kernels, build_frequency_scale, build_mel_filter_bank
from .signal import Signal, make_window


@dataclass(frozen=True)
class SineDataset:
    """Pure sine waves with normalized frequency targets and a fixed split."""

    waveforms: np.ndarray        # (n_examples, n_samples)
    targets: np.ndarray          # (n_examples,) in [0, 1]
    freqs_hz: np.ndarray         # (n_examples,)
    train_idx: np.ndarray
    test_idx: np.ndarray
    sample_rate: float
    seed: int

    @property
    def n_examples(self):
        return self.waveforms.shape[0]

    def signal(self, i: int) -> Signal:
        return Signal(self.waveforms[i], self.sample_rate)


def gen_sine_dataset(f_lo: int, f_hi: int, phases: int, sr: float,
                     length: int = 1024, seed: int = 0, step: int = 1) -> SineDataset:
    """Generate ``((f_hi - f_lo) // step + 1) * phases`` sine examples.

    Frequencies are the integers ``f_lo, f_lo + step, ..., f_hi``; each is
    rendered at ``phases`` distinct phase offsets drawn once from ``seed``
    (equally spaced offsets would pair up to identical magnitude
    spectrograms whenever two of them differ by pi). Targets are frequencies
    normalized to [0, 1] over the requested range. The 80/20 train/test
    split is a seeded shuffle, so the same seed reproduces the dataset byte
    for byte.
    """
    if f_hi > sr / 2.0:
        raise ValueError(f"f_hi={f_hi} exceeds the Nyquist frequency {sr / 2.0}")
    if f_lo <= 0 or f_hi < f_lo:
        raise ValueError("need 0 < f_lo <= f_hi")
    if phases < 1 or step < 1 or length < 1:
        raise ValueError("phases, step, and length must be >= 1")
    rng = np.random.default_rng(seed)
    freqs = np.arange(f_lo, f_hi + 1, step, dtype=np.float64)
    phase_offsets = rng.uniform(0.0, 2.0 * np.pi, phases)
    t = np.arange(length) / sr
    n = freqs.size * phases
    waveforms = np.empty((n, length))
    freq_col = np.empty(n)
    i = 0
    for f in freqs:
        for phi in phase_offsets:
            waveforms[i] = np.sin(2.0 * np.pi * (f * t) + phi)
            freq_col[i] = f
            i += 1
    targets = (freq_col - f_lo) / (f_hi - f_lo) if f_hi > f_lo else np.zeros(n)
    order = rng.permutation(n)
    n_train = int(round(0.8 * n))
    return SineDataset(waveforms=waveforms, targets=targets, freqs_hz=freq_col,
                       train_idx=order[:n_train], test_idx=order[n_train:],
                       sample_rate=float(sr), seed=seed)


def make_stft_layer(sr: float, n_fft: int = 64, hop: int | None = None,
                    trainable: bool = True, window: str = "hann") -> TrainableLayer:
    """A trainable STFT layer with the experiment's deliberately small window."""
    scale = build_frequency_scale("no", n_fft, sr)
    bank = build_dft_kernels(scale, make_window(window, n_fft, periodic=True))
    return TrainableLayer(bank, hop=hop or n_fft, trainable=trainable)


def make_mel_layer(sr: float, n_fft: int = 64, n_mels: int = 8,
                   hop: int | None = None, trainable: bool = True,
                   window: str = "hann", htk: bool = True) -> TrainableLayer:
    """A trainable Mel layer over a fixed small-window STFT stage."""
    scale = build_frequency_scale("no", n_fft, sr)
    stft_bank = build_dft_kernels(scale, make_window(window, n_fft, periodic=True))
    mel_bank = build_mel_filter_bank(sr, n_fft, n_mels,
                                     formula="htk" if htk else "slaney")
    return TrainableLayer(mel_bank, hop=hop or n_fft, trainable=trainable,
                          stft_bank=stft_bank)


@dataclass
class LinearPredictor:
    """One neuron with a sigmoid: flattened spectrogram -> value in (0, 1)."""

    weights: np.ndarray
    bias: float = 0.0

    @classmethod
    def zeros(cls, n_features: int) -> "LinearPredictor":
        return cls(weights=np.zeros(n_features), bias=0.0)

    @classmethod
    def init_random(cls, n_features: int, seed: int = 0, scale: float = 0.01) -> "LinearPredictor":
        rng = np.random.default_rng(seed)
        return cls(weights=scale * rng.standard_normal(n_features), bias=0.0)

    def forward(self, features: np.ndarray) -> float:
        z = float(self.weights @ features) + self.bias
        return 1.0 / (1.0 + np.exp(-z))


def _mse_over(dataset: SineDataset, idx, layer: TrainableLayer,
              predictor: LinearPredictor) -> float:
    total = 0.0
    for i in idx:
        s = layer.spectrogram(dataset.signal(int(i)))
        pred = predictor.forward(s.ravel())
        total += (pred - dataset.targets[int(i)]) ** 2
    return total / len(idx)


def train_frequency_predictor(dataset: SineDataset, layer: TrainableLayer,
                              predictor: LinearPredictor, epochs: int = 30,
                              lr: float = 0.01, seed: int = 0,
                              batch_size: int = 32):
    """Minibatch-SGD training of the predictor (and the layer's kernels when
    ``layer.trainable``).

    Returns a list of ``(epoch, train_mse, test_mse)`` rows; the train MSE is
    the running mean over that epoch's minibatches.
    """
    rng = np.random.default_rng(seed)
    params = layer.params()
    history = []
    for epoch in range(epochs):
        order = rng.permutation(dataset.train_idx)
        epoch_loss = 0.0
        n_seen = 0
        for start in range(0, order.size, batch_size):
            batch = order[start:start + batch_size]
            grad_w = np.zeros_like(predictor.weights)
            grad_b = 0.0
            kernel_grads = {name: np.zeros_like(p) for name, p in params.items()} \
                if layer.trainable else None
            for i in batch:
                x = dataset.signal(int(i))
                s = layer.spectrogram(x)
                v = s.ravel()
                pred = predictor.forward(v)
                err = pred - dataset.targets[int(i)]
                epoch_loss += err * err
                dz = 2.0 * err * pred * (1.0 - pred)
                grad_w += dz * v
                grad_b += dz
                if layer.trainable:
                    upstream = (dz * predictor.weights).reshape(s.shape)
                    for name, g in spectrogram_vjp(x, layer, upstream).items():
                        kernel_grads[name] += g
            scale = lr / batch.size
            predictor.weights -= scale * grad_w
            predictor.bias -= scale * grad_b
            if layer.trainable:
                for name, g in kernel_grads.items():
                    params[name] -= scale * g
            n_seen += batch.size
        train_mse = epoch_loss / n_seen
        test_mse = _mse_over(dataset, dataset.test_idx, layer, predictor)
        history.append((epoch, float(train_mse), float(test_mse)))
    return history
