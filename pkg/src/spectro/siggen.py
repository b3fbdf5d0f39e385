"""Deterministic test-signal generation: sweeps, impulses, and tones."""

import math
from dataclasses import dataclass

import numpy as np

from .signal import Signal

SIGNAL_KINDS = ("linear_sweep", "log_sweep", "impulse", "pure_tone", "multi_tone")


@dataclass(frozen=True)
class SignalSpecgen:
    """Recipe for a synthetic signal.

    ``phase`` of None draws a random starting phase from ``seed``. Sweeps run
    from f0 to f1 over the duration; ``multi_tone`` mixes three equal tones
    log-spaced between f0 and f1. All outputs stay within [-1, 1].
    """

    kind: str
    f0: float = 440.0
    f1: float = 440.0
    duration: float = 1.0
    sr: float = 22050.0
    phase: float | None = 0.0
    seed: int = 0


def gen_signal(spec: SignalSpecgen) -> Signal:
    """Render the signal described by ``spec``."""
    if spec.kind not in SIGNAL_KINDS:
        raise ValueError(f"unknown signal kind {spec.kind!r}; expected one of {SIGNAL_KINDS}")
    if spec.sr <= 0 or spec.duration <= 0:
        raise ValueError("sr and duration must be positive")
    nyquist = spec.sr / 2.0
    if max(spec.f0, spec.f1) > nyquist:
        raise ValueError(f"frequencies must not exceed the Nyquist frequency {nyquist}")
    n = int(round(spec.duration * spec.sr))
    t = np.arange(n) / spec.sr
    phase = spec.phase
    if phase is None:
        phase = float(np.random.default_rng(spec.seed).uniform(0.0, 2.0 * np.pi))

    if spec.kind == "impulse":
        samples = np.zeros(n)
        samples[0] = 1.0
        return Signal(samples, spec.sr)
    if spec.kind == "pure_tone":
        return Signal(np.sin(2.0 * np.pi * (spec.f0 * t) + phase), spec.sr)
    if spec.kind == "linear_sweep":
        # instantaneous frequency f0 + (f1 - f0) t / T
        sweep = (spec.f1 - spec.f0) / (2.0 * spec.duration)
        return Signal(np.sin(2.0 * np.pi * (spec.f0 * t + sweep * t * t) + phase), spec.sr)
    if spec.kind == "log_sweep":
        if spec.f0 <= 0 or spec.f1 <= 0:
            raise ValueError("log sweeps need strictly positive endpoint frequencies")
        if spec.f1 == spec.f0:
            return Signal(np.sin(2.0 * np.pi * (spec.f0 * t) + phase), spec.sr)
        rate = math.log(spec.f1 / spec.f0) / spec.duration
        angle = 2.0 * np.pi * spec.f0 / rate * (np.exp(rate * t) - 1.0)
        return Signal(np.sin(angle + phase), spec.sr)
    # multi_tone: three tones log-spaced over [f0, f1]
    if spec.f0 <= 0 or spec.f1 < spec.f0:
        raise ValueError("multi_tone needs 0 < f0 <= f1")
    freqs = (spec.f0, math.sqrt(spec.f0 * spec.f1), spec.f1)
    samples = sum(np.sin(2.0 * np.pi * (f * t) + phase) for f in freqs) / 3.0
    return Signal(samples, spec.sr)
