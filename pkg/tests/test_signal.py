import numpy as np
import pytest

from spectro.signal import (FirFilter, Signal, conv1d_strided, design_lowpass_fir,
                            downsample2, fir_frequency_response, make_window,
                            pad_signal)


def sig(values, sr=1000.0):
    return Signal(values, sr)


class TestSignal:
    def test_validation(self):
        with pytest.raises(ValueError):
            Signal([1.0, np.nan], 100.0)
        with pytest.raises(ValueError):
            Signal([1.0, np.inf], 100.0)
        with pytest.raises(ValueError):
            Signal([1.0], 0.0)
        with pytest.raises(ValueError):
            Signal([[1.0, 2.0]], 100.0)

    def test_immutability(self):
        x = sig([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            x.samples[0] = 5.0

    def test_does_not_freeze_caller_array(self):
        raw = np.array([1.0, 2.0])
        Signal(raw, 10.0)
        raw[0] = 9.0  # caller's array must stay writable

    def test_empty_allowed(self):
        assert len(sig([])) == 0


class TestMakeWindow:
    def test_hann_periodic_4(self):
        # 0.5 (1 - cos(2 pi n / N)) for n = 0..3
        assert np.allclose(make_window("hann", 4, periodic=True).values,
                           [0.0, 0.5, 1.0, 0.5], atol=1e-15)

    def test_rectangular(self):
        assert np.array_equal(make_window("rectangular", 3).values, [1.0, 1.0, 1.0])

    def test_hann_single_point_periodic(self):
        assert np.array_equal(make_window("hann", 1, periodic=True).values, [0.0])

    def test_symmetric_uses_n_minus_1(self):
        w = make_window("hann", 5, periodic=False).values
        expected = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(5) / 4)
        assert np.allclose(w, expected, atol=1e-15)

    @pytest.mark.parametrize("n", [8, 64, 256])
    def test_periodic_hann_overlap_sums_to_one(self, n):
        w = make_window("hann", n, periodic=True).values
        assert np.max(np.abs(w[: n // 2] + w[n // 2:] - 1.0)) < 1e-12

    @pytest.mark.parametrize("kind", ["hann", "hamming", "blackman", "rectangular"])
    def test_range(self, kind):
        w = make_window(kind, 33, periodic=False).values
        assert w.min() >= 0.0 and w.max() <= 1.0

    def test_errors(self):
        with pytest.raises(ValueError):
            make_window("hann", 0)
        with pytest.raises(ValueError):
            make_window("kaiser", 8)


class TestPadSignal:
    def test_reflect_mirrors_without_edge(self):
        out = pad_signal(sig([1.0, 2.0, 3.0]), "reflect", 2, 2)
        assert np.array_equal(out.samples, [3, 2, 1, 2, 3, 2, 1])

    def test_zero_pad(self):
        out = pad_signal(sig([1.0, 2.0, 3.0]), "constant_zero", 1, 1)
        assert np.array_equal(out.samples, [0, 1, 2, 3, 0])

    def test_identity(self):
        out = pad_signal(sig([5.0]), "reflect", 0, 0)
        assert np.array_equal(out.samples, [5.0])

    def test_reflect_too_long(self):
        with pytest.raises(ValueError):
            pad_signal(sig([1.0, 2.0, 3.0]), "reflect", 3, 0)

    def test_negative_amount(self):
        with pytest.raises(ValueError):
            pad_signal(sig([1.0, 2.0]), "constant_zero", -1, 0)


class TestConv1dStrided:
    def test_sliding_sum(self):
        out = conv1d_strided(sig([1.0, 2.0, 3.0, 4.0]), [[1.0, 1.0]], 1)
        assert np.array_equal(out.values, [[3.0, 5.0, 7.0]])

    def test_stride_picks_hop_samples(self):
        # kernel [1, 0] with stride 2 reads the samples at the hop positions
        out = conv1d_strided(sig([1.0, 2.0, 3.0, 4.0]), [[1.0, 0.0]], 2)
        assert np.array_equal(out.values, [[1.0, 3.0]])

    def test_zero_signal(self):
        out = conv1d_strided(sig(np.zeros(16)), [[0.3, -1.0, 2.0], [1.0, 1.0, 1.0]], 3)
        assert not out.values.any()

    def test_linearity(self):
        rng = np.random.default_rng(11)
        x, y = rng.standard_normal(200), rng.standard_normal(200)
        kernels = rng.standard_normal((4, 16))
        a, b = 1.7, -0.3
        lhs = conv1d_strided(sig(a * x + b * y), kernels, 8).values
        rhs = (a * conv1d_strided(sig(x), kernels, 8).values
               + b * conv1d_strided(sig(y), kernels, 8).values)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(rhs))

    def test_stride_equals_subsampled_stride1(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(300)
        kernels = rng.standard_normal((2, 32))
        full = conv1d_strided(sig(x), kernels, 1).values
        for stride in (2, 3, 7):
            hopped = conv1d_strided(sig(x), kernels, stride).values
            # BLAS blocks the product differently per frame count, so the
            # agreement is to the last ulp rather than bitwise
            assert np.max(np.abs(hopped - full[:, ::stride][:, :hopped.shape[1]])) < 1e-12

    def test_frame_count(self):
        out = conv1d_strided(sig(np.zeros(100)), np.ones((1, 10)), 9)
        assert out.values.shape == (1, (100 - 10) // 9 + 1)

    def test_errors(self):
        with pytest.raises(ValueError):
            conv1d_strided(sig([1.0, 2.0]), np.empty((0, 2)), 1)
        with pytest.raises(ValueError):
            conv1d_strided(sig([1.0, 2.0]), [[1.0, 1.0, 1.0]], 1)
        with pytest.raises(ValueError):
            conv1d_strided(sig([1.0, 2.0]), [[1.0, 1.0]], 0)
        with pytest.raises(ValueError):
            conv1d_strided(sig([1.0, 2.0]), np.array([[1 + 1j, 0]]), 1)


class TestDesignLowpassFir:
    def test_minimal_three_tap(self):
        # oracle: sinc(cutoff (n - center)) windowed then normalized
        fir = design_lowpass_fir(3, 0.5, "rectangular")
        raw = np.sinc(0.5 * (np.arange(3) - 1.0))
        expected = raw / raw.sum()
        assert np.allclose(fir.taps, expected, atol=1e-12)
        assert np.allclose(fir.taps, [0.2800496, 0.4399008, 0.2800496], atol=1e-6)

    @pytest.mark.parametrize("num_taps,cutoff,window", [
        (15, 0.3, "hamming"), (63, 0.5, "hann"), (255, 0.8, "blackman")])
    def test_unit_dc_gain(self, num_taps, cutoff, window):
        fir = design_lowpass_fir(num_taps, cutoff, window)
        assert abs(fir.taps.sum() - 1.0) <= 1e-9

    def test_exact_symmetry(self):
        fir = design_lowpass_fir(255, 0.5, "hamming")
        assert np.array_equal(fir.taps, fir.taps[::-1])

    def test_255_tap_response(self):
        fir = design_lowpass_fir(255, 0.5, "hamming")
        freqs, mag_db = fir_frequency_response(fir, 4096)
        assert abs(mag_db[0]) < 20 * np.log10(1 + 1e-6)
        assert np.max(mag_db[freqs >= 0.75]) < -50.0
        quarter = np.argmin(np.abs(freqs - 0.25))
        assert abs(mag_db[quarter]) < 0.1

    def test_errors(self):
        with pytest.raises(ValueError):
            design_lowpass_fir(4, 0.5)
        with pytest.raises(ValueError):
            design_lowpass_fir(1, 0.5)
        with pytest.raises(ValueError):
            design_lowpass_fir(9, 1.5)


class TestFirFrequencyResponse:
    def test_identity_filter_flat(self):
        _, mag_db = fir_frequency_response(np.array([1.0]), 64)
        assert np.max(np.abs(mag_db)) < 1e-12

    def test_two_tap_null_at_nyquist(self):
        _, mag_db = fir_frequency_response(np.array([0.5, 0.5]), 257)
        assert mag_db[-1] < -100.0

    def test_n_points_validation(self):
        with pytest.raises(ValueError):
            fir_frequency_response(np.array([1.0]), 1)


class TestDownsample2:
    def test_constant_signal_stays_constant(self):
        fir = design_lowpass_fir(31, 0.5, "hamming")
        out = downsample2(sig(np.ones(400), 2000.0), fir)
        margin = 16
        assert np.max(np.abs(out.samples[margin:-margin] - 1.0)) < 1e-6
        assert out.sample_rate == 1000.0
        assert len(out) == 200

    def test_zero_signal(self):
        fir = design_lowpass_fir(31, 0.5, "hamming")
        out = downsample2(sig(np.zeros(101)), fir)
        assert not out.samples.any()
        assert len(out) == 51  # ceil(101 / 2)

    def test_high_tone_attenuated_50db(self):
        sr = 2000.0
        n = 8192
        t = np.arange(n) / sr
        x = np.sin(2 * np.pi * (0.9 * sr / 2) * t)  # 0.9 x Nyquist
        fir = design_lowpass_fir(255, 0.5, "hamming")
        out = downsample2(sig(x, sr), fir)
        in_rms = np.sqrt(np.mean(x ** 2))
        out_rms = np.sqrt(np.mean(out.samples[256:-256] ** 2))
        assert out_rms < 10 ** (-50 / 20) * in_rms

    def test_signal_shorter_than_filter(self):
        fir = design_lowpass_fir(31, 0.5, "hamming")
        with pytest.raises(ValueError):
            downsample2(sig(np.zeros(30)), fir)

    def test_no_aliasing_three_tones(self):
        # band-limited input (all content below 0.4 x Nyquist) must not grow
        # new spectral content above -50 dB after decimation
        from spectro.kernels import dft_naive
        sr = 8192.0
        n = 8192
        t = np.arange(n) / sr
        bins = (400, 800, 1500)  # of the 4096-long output transform
        x = sum(np.sin(2 * np.pi * (k * sr / n) * t) for k in bins) / 3.0
        fir = design_lowpass_fir(255, 0.5, "hamming")
        out = downsample2(sig(x, sr), fir)
        w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(len(out)) / len(out))
        spectrum = np.abs(dft_naive(out.samples * w))[: len(out) // 2]
        peak = spectrum.max()
        mask = np.ones(len(spectrum), dtype=bool)
        for k in bins:
            mask[max(0, k - 4): k + 5] = False
        mask[:4] = False  # DC leakage from windowing
        assert spectrum[mask].max() < peak * 10 ** (-50 / 20)


class TestFirFilterType:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            FirFilter(np.array([0.7, 0.2, 0.1]), 0.5)

    def test_rejects_wrong_sum(self):
        with pytest.raises(ValueError):
            FirFilter(np.array([0.5, 0.6, 0.5]), 0.5)
