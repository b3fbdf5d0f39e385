"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report. The heavyweight criteria (9 and 10) dominate the runtime; the whole
module completes in a few minutes.
"""

import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from spectro.cli import cli_main
from spectro.gradients import finite_diff_check, spectrogram_vjp
from spectro.kernels import (CqtConfig, build_cqt_kernels,
                             build_frequency_scale, build_mel_filter_bank,
                             cqt_q, dft_naive, k_to_hz)
from spectro.siggen import SignalSpecgen, gen_signal
from spectro.signal import Signal, design_lowpass_fir, downsample2, fir_frequency_response, make_window
from spectro.specfile import read_spec, write_spec
from spectro.training import (LinearPredictor, gen_sine_dataset, make_mel_layer,
                              make_stft_layer, train_frequency_predictor)
from spectro.transforms import (Cqt1992, Cqt1992v2, Cqt2010v2, StftParams,
                                Stft, stft)
from spectro.wavio import read_wav, write_wav


def report(number, text):
    print(f"ACCEPTANCE {number}: PASS - {text}")


def test_c01_frequency_scale_anchors():
    scale = build_frequency_scale("linear", 2048, 44100.0, 50.0, 6000.0, 1025)
    nf = scale.norm_freqs
    assert abs(nf[0] - 2.32) <= 5e-3
    assert abs(nf[1] - 2.59) <= 5e-3
    spacing_hz = (nf[1] - nf[0]) * 44100.0 / 2048
    assert 5.80 <= spacing_hz <= 5.81
    assert abs(k_to_hz(1, 44100.0, 2048) - 21.53) <= 5e-3
    report(1, f"linear scale anchors sigma(0)={nf[0]:.4f}, sigma(1)={nf[1]:.4f}, "
              f"bin spacing {spacing_hz:.4f} Hz, k=1 -> 21.53 Hz")


@pytest.mark.xfail(strict=True, reason=(
    "the linear-scale formula gives sigma(1024) = 278.36988; the quoted "
    "anchor 278.36 is a truncated two-decimal print (its neighbour anchor "
    "278.10 = sigma(1023) matches the formula to 3e-4), so the +-0.005 "
    "window around the printed value cannot be met by the formula itself"))
def test_c01_sigma_1024_printed_anchor():
    scale = build_frequency_scale("linear", 2048, 44100.0, 50.0, 6000.0, 1025)
    assert abs(scale.norm_freqs[1024] - 278.36) <= 5e-3


def test_c01_sigma_1024_closed_form():
    # the value the formula actually yields, pinned tightly
    scale = build_frequency_scale("linear", 2048, 44100.0, 50.0, 6000.0, 1025)
    expected = 50.0 * 2048 / 44100.0 + 1024 * (5950.0 * 2048) / (1025 * 44100.0)
    assert abs(scale.norm_freqs[1024] - expected) < 1e-9
    assert abs(scale.norm_freqs[1023] - 278.10) <= 5e-3
    report(1, f"sigma(1024) = {scale.norm_freqs[1024]:.5f} (printed table "
              "truncates to 278.36); sigma(1023) matches 278.10")


def test_c02_mel_table_reproduction():
    bank = build_mel_filter_bank(1000.0, 128, 4, 0.0, 500.0, formula="htk")
    spans = []
    for row in bank.weights:
        nz = np.nonzero(row)[0]
        spans.append((int(nz[0]), int(nz[-1])))
    assert spans == [(1, 21), (11, 34), (22, 48), (35, 64)]
    report(2, f"htk mel bank supports {spans}")


def test_c03_cqt_constants():
    q = cqt_q(24)
    assert abs(q - 34.127) <= 1e-3
    cfg = CqtConfig(sr=44100.0, fmin=27.5, n_bins=176, bins_per_octave=24,
                    hop_length=512)
    bank = build_cqt_kernels(cfg, domain="time")
    assert int(bank.lengths[0]) in (54727, 54728)
    assert bank.fft_len == 65536
    report(3, f"Q(24)={q:.4f}, longest kernel {int(bank.lengths[0])}, "
              f"padded FFT length {bank.fft_len}")


def test_c04_stft_oracle_equivalence():
    n_fft, hop = 256, 128
    rng = np.random.default_rng(2024)
    transform = Stft(StftParams(n_fft=n_fft, hop_length=hop, output="complex"), 22050.0)
    window = make_window("hann", n_fft).values
    worst = 0.0
    for _ in range(20):
        x = Signal(rng.standard_normal(4096), 22050.0)
        got = transform(x).data
        padded = np.pad(x.samples, (n_fft // 2, n_fft // 2), mode="reflect")
        frames = sliding_window_view(padded, n_fft)[::hop]
        ref = np.stack([dft_naive(f * window)[: n_fft // 2 + 1] for f in frames], axis=1)
        worst = max(worst, np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    assert worst < 1e-10
    report(4, f"conv STFT vs naive per-frame DFT on 20 random signals, "
              f"max relative error {worst:.3e}")


def _four_test_signals(sr):
    duration = 2.0
    return [
        gen_signal(SignalSpecgen("linear_sweep", f0=250.0, f1=3000.0,
                                 duration=duration, sr=sr)),
        gen_signal(SignalSpecgen("log_sweep", f0=250.0, f1=3000.0,
                                 duration=duration, sr=sr)),
        gen_signal(SignalSpecgen("impulse", duration=duration, sr=sr)),
        gen_signal(SignalSpecgen("multi_tone", f0=250.0, f1=2000.0,
                                 duration=duration, sr=sr)),
    ]


def test_c05_cqt_variant_equivalences():
    sr = 22050.0
    cfg = CqtConfig(sr=sr, fmin=220.0, n_bins=48, bins_per_octave=12, hop_length=512)
    direct = Cqt1992v2(cfg)
    freq_domain = Cqt1992(cfg)
    worst = 0.0
    for x in _four_test_signals(sr):
        a = freq_domain(x).data
        b = direct(x).data
        worst = max(worst, np.max(np.abs(a - b)) / np.max(np.abs(b)))
    assert worst < 1e-9

    rcfg = CqtConfig(sr=sr, fmin=55.0, n_bins=48, bins_per_octave=12, hop_length=256)
    rdirect = Cqt1992v2(rcfg)
    recursive = Cqt2010v2(rcfg)
    margin = int(np.ceil((rdirect.bank.width // 2) / rcfg.hop_length)) + 1
    tone = gen_signal(SignalSpecgen("pure_tone", f0=440.0, duration=1.0, sr=sr))
    a, b = recursive(tone).data, rdirect(tone).data
    frames = min(a.shape[1], b.shape[1])
    sl = slice(margin, frames - margin)
    tone_diff = np.max(np.abs(a[:, sl] - b[:, sl])) / np.max(np.abs(b))
    assert tone_diff < 1e-2

    for k in range(48):
        semitone = gen_signal(SignalSpecgen("pure_tone", f0=55.0 * 2 ** (k / 12.0),
                                            duration=0.6, sr=sr))
        a, b = recursive(semitone).data, rdirect(semitone).data
        frames = min(a.shape[1], b.shape[1])
        sl = slice(margin, frames - margin)
        assert np.array_equal(np.argmax(a[:, sl], axis=0), np.argmax(b[:, sl], axis=0))
    report(5, f"CQT1992 == CQT1992v2 (max rel {worst:.3e}) on four test signals; "
              f"CQT2010v2 vs CQT1992v2 peak-normalized diff {tone_diff:.4f} "
              "and identical argmax on all 48 semitones")


def test_c06_sweep_and_impulse_properties():
    sr = 22050.0
    sweep = gen_signal(SignalSpecgen("linear_sweep", f0=50.0, f1=6000.0,
                                     duration=2.0, sr=sr))
    spec = stft(sweep, StftParams(n_fft=2048, hop_length=512))
    track = np.argmax(spec.data[:, 5:-5], axis=0)
    assert (np.diff(track) >= 0).all()

    impulse = gen_signal(SignalSpecgen("impulse", duration=0.1, sr=8000.0))
    flat = stft(impulse, StftParams(n_fft=64, hop_length=64, window="rectangular",
                                    center=False, output="magnitude"))
    assert np.max(np.abs(flat.data[:, 0] - 1.0)) < 1e-9

    cfg = CqtConfig(sr=sr, fmin=110.0, n_bins=36, bins_per_octave=12, hop_length=256)
    logsweep = gen_signal(SignalSpecgen("log_sweep", f0=130.0, f1=750.0,
                                        duration=2.0, sr=sr))
    cspec = Cqt1992v2(cfg)(logsweep)
    ctrack = np.argmax(cspec.data[:, 16:-16], axis=0)
    assert (np.diff(ctrack) >= 0).all()
    report(6, "linear-sweep STFT argmax monotone, impulse frame flat to 1e-9, "
              "log-sweep CQT argmax monotone")


def test_c07_antialiasing_filter():
    fir = design_lowpass_fir(255, 0.5, "hamming")
    freqs, mag_db = fir_frequency_response(fir, 4096)
    dc_gain = 10 ** (mag_db[0] / 20)
    assert abs(dc_gain - 1.0) <= 1e-6
    stop = np.max(mag_db[freqs >= 0.55])
    assert stop <= -50.0

    sr = 2000.0
    t = np.arange(8192) / sr
    x = np.sin(2 * np.pi * (0.9 * sr / 2) * t)
    out = downsample2(Signal(x, sr), fir)
    ratio = (np.sqrt(np.mean(out.samples[256:-256] ** 2))
             / np.sqrt(np.mean(x ** 2)))
    assert ratio < 10 ** (-50 / 20)
    report(7, f"255-tap filter: DC gain {dc_gain:.8f}, worst response above "
              f"0.55 Nyquist {stop:.1f} dB, 0.9-Nyquist tone attenuated "
              f"{-20 * np.log10(ratio):.1f} dB by downsampling")


def test_c08_gradient_correctness():
    rng = np.random.default_rng(88)
    x = Signal(rng.standard_normal(512), 8000.0)

    stft_layer = make_stft_layer(8000.0, n_fft=32)
    upstream = np.ones_like(stft_layer.spectrogram(x))
    grads = spectrogram_vjp(x, stft_layer, upstream)
    worst = 0.0
    for name in ("h_re", "h_im"):
        theta = stft_layer.params()[name]
        idx = [(int(rng.integers(1, theta.shape[0] - 1)), int(rng.integers(theta.shape[1])))
               for _ in range(10)]
        worst = max(worst, finite_diff_check(
            lambda _: stft_layer.spectrogram(x).sum(), theta, grads[name], idx, eps=1e-6))

    mel_layer = make_mel_layer(8000.0, n_fft=32, n_mels=4)
    upstream = np.ones_like(mel_layer.spectrogram(x))
    mel_grads = spectrogram_vjp(x, mel_layer, upstream)
    theta = mel_layer.params()["weights"]
    idx = [(int(rng.integers(theta.shape[0])), int(rng.integers(theta.shape[1])))
           for _ in range(10)]
    worst = max(worst, finite_diff_check(
        lambda _: mel_layer.spectrogram(x).sum(), theta, mel_grads["weights"], idx, eps=1e-6))
    assert worst < 1e-6
    report(8, f"STFT and Mel kernel gradients vs central differences, "
              f"max relative error {worst:.3e}")


def test_c09_trainable_kernel_experiment():
    # desk scale: 2000 integer frequencies x 2 phases, 64-sample window;
    # lr pinned to 0.003 (0.01 oscillates at this scale for both arms)
    sr = 44100.0
    dataset = gen_sine_dataset(200, 2199, 2, sr, length=1024, seed=0)
    assert dataset.n_examples == 4000
    results = {}
    for kind, make in (("stft", make_stft_layer), ("mel", make_mel_layer)):
        wins = 0
        for seed in (42, 7, 1234):
            finals = {}
            for trainable in (True, False):
                layer = make(sr, n_fft=64, trainable=trainable)
                predictor = LinearPredictor.init_random(
                    layer.spectrogram(dataset.signal(0)).size, seed=seed)
                history = train_frequency_predictor(dataset, layer, predictor,
                                                    epochs=30, lr=0.003, seed=seed)
                finals[trainable] = history[-1][1]
            wins += finals[True] < finals[False]
        results[kind] = wins
        assert wins >= 2, f"trainable {kind} won only {wins}/3 seeds"
    report(9, f"trainable beats fixed kernels: stft {results['stft']}/3 seeds, "
              f"mel {results['mel']}/3 seeds (30 epochs, lr 0.003)")


def test_c10_performance_property(capsys):
    # asserts batch == sequential bitwise and conv-vs-naive agreement, and
    # returns nonzero if the batched conv path is not faster
    rc = cli_main(["bench", "--signals", "100", "--len", "80000"])
    out = capsys.readouterr().out
    print(out)
    assert rc == 0
    report(10, "batched conv STFT beat the naive per-frame DFT loop with "
               "bit-identical batch/sequential outputs")


def test_c11_determinism_and_round_trips(tmp_path):
    # SpecFile round trip
    x = gen_signal(SignalSpecgen("pure_tone", f0=440.0, duration=0.25, sr=8000.0))
    spec = stft(x, StftParams(n_fft=128, hop_length=64))
    spec_path = tmp_path / "s.spec"
    write_spec(spec_path, spec)
    back = read_spec(spec_path)
    assert np.array_equal(back.data, spec.data)

    # WAV round trip
    wav_path = tmp_path / "x.wav"
    write_wav(wav_path, x, encoding="pcm16")
    assert np.max(np.abs(read_wav(wav_path).samples - x.samples)) <= 1.0 / 32768.0

    # repeated CLI runs byte-identical
    w = tmp_path / "gen.wav"
    outs = []
    for name in ("a.spec", "b.spec"):
        assert cli_main(["gen", str(w), "--kind", "linear_sweep", "--f0", "100",
                         "--f1", "900", "--duration", "0.4", "--sr", "4000"]) == 0
        out = tmp_path / name
        assert cli_main(["stft", str(w), str(out), "--n-fft", "128", "--hop", "64"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]

    # fixed-seed training histories identical
    dataset = gen_sine_dataset(200, 249, 2, 8000.0, length=256, seed=1)
    histories = []
    for _ in range(2):
        layer = make_stft_layer(8000.0, n_fft=32, trainable=True)
        predictor = LinearPredictor.init_random(
            layer.spectrogram(dataset.signal(0)).size, seed=9)
        histories.append(train_frequency_predictor(dataset, layer, predictor,
                                                   epochs=3, lr=0.003, seed=9))
    assert histories[0] == histories[1]
    report(11, "SpecFile and WAV round trips, byte-identical CLI reruns, "
               "and bit-identical fixed-seed training histories")
