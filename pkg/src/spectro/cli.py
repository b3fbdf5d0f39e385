"""Command-line surface: convert WAV files to spectrograms, generate test
signals, benchmark, run the trainable-kernel demo, and self-test.

Exit codes: 0 success, 1 usage error, 2 data error, 3 selftest/benchmark
failure.
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CorruptFileError, UnsupportedFormatError
from .kernels import (CqtConfig, build_mel_filter_bank, cqt_q, dft_naive,
                      fft, next_pow2)
from .signal import Signal, conv1d_strided, design_lowpass_fir, fir_frequency_response, make_window, pad_signal
from .siggen import SIGNAL_KINDS, SignalSpecgen, gen_signal
from .specfile import read_spec, write_csv, write_spec
from .training import (LinearPredictor, gen_sine_dataset, make_mel_layer,
                       make_stft_layer, train_frequency_predictor)
from .transforms import (Cqt1992, Cqt1992v2, Cqt2010, Cqt2010v2, MelParams,
                         Stft, StftParams, batch_transform, cqt1992,
                         cqt1992v2, mel_spectrogram, stft)
from .wavio import read_wav, write_wav

_CQT_ALGOS = {"1992": Cqt1992, "1992v2": Cqt1992v2, "2010": Cqt2010, "2010v2": Cqt2010v2}


def _add_io_args(p):
    p.add_argument("input", help="input WAV file (PCM16 or float32)")
    p.add_argument("output", help="output spectrogram file")
    p.add_argument("--format", choices=("spec", "csv"), default="spec")
    p.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    p.add_argument("--skip-samples", type=int, default=0,
                   help="discard this many samples from the start of the file")


def _load_signal(args) -> Signal:
    x = read_wav(args.input)
    if args.skip_samples > 0:
        x = Signal(x.samples[args.skip_samples:], x.sample_rate)
    return x


def _save_spec(args, spec) -> None:
    if args.format == "csv":
        write_csv(args.output, spec)
    else:
        write_spec(args.output, spec, dtype=args.dtype)


def _cmd_stft(args) -> int:
    x = _load_signal(args)
    params = StftParams(n_fft=args.n_fft, freq_bins=args.freq_bins,
                        hop_length=args.hop, window=args.window,
                        freq_scale=args.freq_scale, center=not args.no_center,
                        pad_mode=args.pad_mode, fmin=args.fmin, fmax=args.fmax,
                        output=args.output_kind)
    _save_spec(args, stft(x, params))
    return 0


def _cmd_melspec(args) -> int:
    x = _load_signal(args)
    params = MelParams(n_fft=args.n_fft, n_mels=args.n_mels, hop_length=args.hop,
                       window=args.window, center=not args.no_center,
                       pad_mode=args.pad_mode, htk=args.htk, fmin=args.fmin,
                       fmax=args.fmax, norm=args.norm, power=args.power)
    _save_spec(args, mel_spectrogram(x, params))
    return 0


def _cmd_cqt(args) -> int:
    x = _load_signal(args)
    cfg = CqtConfig(sr=x.sample_rate, fmin=args.fmin, n_bins=args.n_bins,
                    bins_per_octave=args.bins_per_octave, hop_length=args.hop,
                    window_kind=args.window,
                    norm=None if args.norm == "none" else int(args.norm),
                    fmax=args.fmax, pad_mode=args.pad_mode)
    transform = _CQT_ALGOS[args.algo](cfg)
    _save_spec(args, transform(x, output=args.output_kind))
    return 0


def _cmd_gen(args) -> int:
    spec = SignalSpecgen(kind=args.kind, f0=args.f0, f1=args.f1,
                         duration=args.duration, sr=args.sr,
                         phase=args.phase, seed=args.seed)
    write_wav(args.output, gen_signal(spec), encoding="pcm16" if args.pcm16 else "float32")
    return 0


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    data = 0.5 * rng.standard_normal((args.signals, args.length))
    signals = [Signal(row, args.sr) for row in data]
    transform = Stft(StftParams(n_fft=args.n_fft, hop_length=args.hop,
                                output="magnitude"), args.sr)

    t0 = time.perf_counter()
    batched = batch_transform(signals, transform)
    t_batch = time.perf_counter() - t0

    t0 = time.perf_counter()
    sequential = [transform(s) for s in signals]
    t_seq = time.perf_counter() - t0

    for got, want in zip(batched, sequential):
        if not np.array_equal(got.data, want.data):
            print("FAIL: batched output differs from sequential output", file=sys.stderr)
            return 3

    n_fft, hop = args.n_fft, args.hop
    window = make_window("hann", n_fft, periodic=True).values
    n_bins = n_fft // 2 + 1
    t0 = time.perf_counter()
    naive_results = []
    for s in signals:
        padded = np.pad(s.samples, (n_fft // 2, n_fft // 2), mode="reflect")
        frames = sliding_window_view(padded, n_fft)[::hop]
        mags = np.empty((n_bins, frames.shape[0]))
        for ti in range(frames.shape[0]):
            spectrum = dft_naive(frames[ti] * window)
            mags[:, ti] = np.abs(spectrum[:n_bins])
        naive_results.append(mags)
    t_naive = time.perf_counter() - t0

    worst = max(np.max(np.abs(got.data - want)) / max(np.max(np.abs(want)), 1e-300)
                for got, want in zip(batched, naive_results))
    print(f"signals: {args.signals} x {args.length} samples, n_fft={n_fft}, hop={hop}")
    print(f"batched conv stft:       {t_batch:9.3f} s")
    print(f"sequential conv stft:    {t_seq:9.3f} s")
    print(f"naive per-frame dft:     {t_naive:9.3f} s")
    print(f"batch == sequential: bit-exact; conv vs naive max rel err: {worst:.3e}")
    if worst > 1e-9:
        print("FAIL: conv and naive outputs disagree", file=sys.stderr)
        return 3
    if t_batch >= t_naive:
        print("FAIL: batched conv was not faster than the naive DFT loop", file=sys.stderr)
        return 3
    return 0


def _cmd_train_demo(args) -> int:
    dataset = gen_sine_dataset(args.f_lo, args.f_hi, args.phases, args.sr,
                               length=args.length, seed=args.seed)
    make = make_mel_layer if args.layer == "mel" else make_stft_layer
    layer = make(args.sr, n_fft=args.n_fft, hop=args.hop, trainable=not args.fixed)
    n_features = layer.spectrogram(dataset.signal(0)).size
    predictor = LinearPredictor.zeros(n_features)
    history = train_frequency_predictor(dataset, layer, predictor,
                                        epochs=args.epochs, lr=args.lr,
                                        seed=args.seed)
    with open(args.output, "w") as fh:
        fh.write("epoch,train_mse,test_mse\n")
        for epoch, train_mse, test_mse in history:
            fh.write(f"{epoch},{train_mse:.17g},{test_mse:.17g}\n")
    print(f"{'fixed' if args.fixed else 'trainable'} {args.layer}: "
          f"final train MSE {history[-1][1]:.6f}, test MSE {history[-1][2]:.6f}")
    return 0


def _selftest_checks():
    yield "window values", lambda: np.allclose(
        make_window("hann", 4).values, [0.0, 0.5, 1.0, 0.5], atol=1e-15)

    def check_pad():
        out = pad_signal(Signal([1.0, 2.0, 3.0], 1.0), "reflect", 2, 2)
        return np.array_equal(out.samples, [3, 2, 1, 2, 3, 2, 1])
    yield "reflect padding", check_pad

    def check_conv():
        out = conv1d_strided(Signal([1.0, 2.0, 3.0, 4.0], 1.0), [[1.0, 1.0]], 1)
        return np.array_equal(out.values, [[3.0, 5.0, 7.0]])
    yield "strided convolution", check_conv

    def check_fft():
        v = np.random.default_rng(0).standard_normal(64)
        ref = dft_naive(v)
        got = fft(v)
        return np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-10
    yield "fft vs naive dft", check_fft

    def check_mel_table():
        bank = build_mel_filter_bank(1000.0, 128, 4, 0.0, 500.0, formula="htk")
        spans = [(np.nonzero(row)[0][0], np.nonzero(row)[0][-1]) for row in bank.weights]
        return spans == [(1, 21), (11, 34), (22, 48), (35, 64)]
    yield "mel bin mapping", check_mel_table

    def check_cqt_constants():
        q = cqt_q(24)
        longest = int(np.ceil(q * 44100.0 / 27.5))
        return abs(q - 34.127) < 1e-3 and longest in (54727, 54728) and next_pow2(longest) == 65536
    yield "constant-q constants", check_cqt_constants

    def check_fir():
        fir = design_lowpass_fir(255, 0.5, "hamming")
        freqs, mag_db = fir_frequency_response(fir, 2048)
        stop = mag_db[freqs >= 0.55]
        return abs(mag_db[0]) < 1e-6 and np.max(stop) <= -50.0
    yield "antialiasing filter", check_fir

    def check_stft_oracle():
        rng = np.random.default_rng(1)
        x = Signal(rng.standard_normal(1024), 8000.0)
        n_fft, hop = 128, 64
        spec = stft(x, StftParams(n_fft=n_fft, hop_length=hop, output="complex"))
        window = make_window("hann", n_fft).values
        padded = np.pad(x.samples, (n_fft // 2, n_fft // 2), mode="reflect")
        frames = sliding_window_view(padded, n_fft)[::hop]
        ref = np.stack([dft_naive(f * window)[:n_fft // 2 + 1] for f in frames], axis=1)
        return np.max(np.abs(spec.data - ref)) / np.max(np.abs(ref)) < 1e-10
    yield "stft oracle", check_stft_oracle

    def check_cqt_equivalence():
        cfg = CqtConfig(sr=8000.0, fmin=220.0, n_bins=24, bins_per_octave=12,
                        hop_length=256)
        x = gen_signal(SignalSpecgen("pure_tone", f0=440.0, duration=0.5, sr=8000.0))
        a = cqt1992(x, cfg).data
        b = cqt1992v2(x, cfg).data
        return np.max(np.abs(a - b)) / np.max(np.abs(b)) < 1e-9
    yield "cqt1992 == cqt1992v2", check_cqt_equivalence

    def check_roundtrips():
        x = gen_signal(SignalSpecgen("pure_tone", f0=100.0, duration=0.1, sr=4000.0))
        spec = stft(x, StftParams(n_fft=64, hop_length=32))
        with tempfile.TemporaryDirectory() as tmp:
            spec_path = Path(tmp) / "t.spec"
            wav_path = Path(tmp) / "t.wav"
            write_spec(spec_path, spec)
            back = read_spec(spec_path)
            write_wav(wav_path, x, encoding="float32")
            x_back = read_wav(wav_path)
        return (np.array_equal(back.data, spec.data)
                and np.max(np.abs(x_back.samples - x.samples)) < 1e-7)
    yield "file round trips", check_roundtrips

    def check_sweep_degenerate():
        tone = gen_signal(SignalSpecgen("pure_tone", f0=440.0, f1=440.0, duration=0.2, sr=8000.0))
        sweep = gen_signal(SignalSpecgen("linear_sweep", f0=440.0, f1=440.0, duration=0.2, sr=8000.0))
        return np.max(np.abs(tone.samples - sweep.samples)) < 1e-12
    yield "degenerate sweep", check_sweep_degenerate


def _cmd_selftest(args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
        except Exception as exc:  # a crashed check is a failed check
            ok = False
            print(f"  error: {exc}", file=sys.stderr)
        print(f"{'ok  ' if ok else 'FAIL'}  {name}")
        failures += not ok
    if failures:
        print(f"{failures} selftest check(s) failed", file=sys.stderr)
        return 3
    print("all selftest checks passed")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectro",
                                     description="Time-frequency transforms as convolution kernel banks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stft", help="short-time Fourier transform of a WAV file")
    _add_io_args(p)
    p.add_argument("--n-fft", type=int, default=2048)
    p.add_argument("--hop", type=int, default=512)
    p.add_argument("--window", default="hann")
    p.add_argument("--freq-scale", choices=("no", "linear", "log"), default="no")
    p.add_argument("--freq-bins", type=int, default=None)
    p.add_argument("--fmin", type=float, default=50.0)
    p.add_argument("--fmax", type=float, default=6000.0)
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--pad-mode", choices=("reflect", "constant_zero"), default="reflect")
    p.add_argument("--output-kind", choices=("complex", "magnitude", "power"),
                   default="magnitude")
    p.set_defaults(func=_cmd_stft)

    p = sub.add_parser("melspec", help="Mel spectrogram of a WAV file")
    _add_io_args(p)
    p.add_argument("--n-fft", type=int, default=2048)
    p.add_argument("--hop", type=int, default=512)
    p.add_argument("--n-mels", type=int, default=128)
    p.add_argument("--window", default="hann")
    p.add_argument("--htk", action="store_true")
    p.add_argument("--fmin", type=float, default=0.0)
    p.add_argument("--fmax", type=float, default=None)
    p.add_argument("--norm", choices=("none", "area"), default="none")
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--pad-mode", choices=("reflect", "constant_zero"), default="reflect")
    p.set_defaults(func=_cmd_melspec)

    p = sub.add_parser("cqt", help="constant-Q transform of a WAV file")
    _add_io_args(p)
    p.add_argument("--algo", choices=sorted(_CQT_ALGOS), default="1992v2")
    p.add_argument("--fmin", type=float, default=32.70)
    p.add_argument("--n-bins", type=int, default=84)
    p.add_argument("--bins-per-octave", type=int, default=12)
    p.add_argument("--hop", type=int, default=512)
    p.add_argument("--window", default="hann")
    p.add_argument("--norm", choices=("1", "2", "none"), default="1")
    p.add_argument("--fmax", type=float, default=None)
    p.add_argument("--pad-mode", choices=("reflect", "constant_zero"), default="reflect")
    p.add_argument("--output-kind", choices=("complex", "magnitude", "power"),
                   default="magnitude")
    p.set_defaults(func=_cmd_cqt)

    p = sub.add_parser("gen", help="generate a synthetic test signal as WAV")
    p.add_argument("output")
    p.add_argument("--kind", choices=SIGNAL_KINDS, default="pure_tone")
    p.add_argument("--f0", type=float, default=440.0)
    p.add_argument("--f1", type=float, default=440.0)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--sr", type=float, default=22050.0)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pcm16", action="store_true", help="write 16-bit PCM instead of float32")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="time batched conv STFT against a naive DFT loop")
    p.add_argument("--signals", type=int, default=100)
    p.add_argument("--len", dest="length", type=int, default=80000)
    p.add_argument("--transform", choices=("stft",), default="stft")
    p.add_argument("--n-fft", type=int, default=2048)
    p.add_argument("--hop", type=int, default=512)
    p.add_argument("--sr", type=float, default=44100.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("train-demo", help="trainable-kernel frequency prediction demo")
    p.add_argument("output", help="loss-history CSV path")
    p.add_argument("--layer", choices=("stft", "mel"), default="stft")
    p.add_argument("--fixed", action="store_true", help="freeze the transform kernels")
    p.add_argument("--f-lo", type=int, default=200)
    p.add_argument("--f-hi", type=int, default=599)
    p.add_argument("--phases", type=int, default=2)
    p.add_argument("--sr", type=float, default=44100.0)
    p.add_argument("--length", type=int, default=1024)
    p.add_argument("--n-fft", type=int, default=64)
    p.add_argument("--hop", type=int, default=None)
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=_cmd_train_demo)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.set_defaults(func=_cmd_selftest)
    return parser


def cli_main(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (CorruptFileError, UnsupportedFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
