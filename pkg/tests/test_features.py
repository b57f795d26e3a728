import numpy as np
import pytest

import oracles
from spectroforge import (FeatureArchiveError, FeatureMatrix, MaskSpec,
                          apply_filterbank, build_mel_filterbank,
                          read_features, spec_augment, write_features)

SR = 16000
N_BINS = 257


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


class TestBuildMelFilterbank:
    def test_single_filter_peaks_at_mel_midpoint(self):
        fb = build_mel_filterbank(1, N_BINS, SR)
        mid_hz = mel_to_hz(hz_to_mel(SR / 2) / 2.0)
        peak_hz = np.argmax(fb.weights[0]) * (SR / 2) / (N_BINS - 1)
        assert abs(peak_hz - mid_hz) <= (SR / 2) / (N_BINS - 1)

    def test_adjacent_filters_cross_at_half(self):
        fb = build_mel_filterbank(20, N_BINS, SR)
        bin_freqs = np.linspace(0, SR / 2, N_BINS)
        centers = fb.edges_hz[1:-1]
        for i in range(3, 17):
            mid = 0.5 * (centers[i] + centers[i + 1])
            w_desc = np.interp(mid, bin_freqs, fb.weights[i])
            w_asc = np.interp(mid, bin_freqs, fb.weights[i + 1])
            assert w_desc == pytest.approx(0.5, abs=1e-9)
            assert w_asc == pytest.approx(0.5, abs=1e-9)

    def test_flat_spectrum_gives_row_sums(self):
        fb = build_mel_filterbank(12, N_BINS, SR)
        out = apply_filterbank(np.ones(N_BINS), fb)
        row_sums = fb.weights.sum(axis=1)
        assert np.allclose(np.exp(out), np.maximum(row_sums, 1e-10), rtol=1e-12)

    def test_rows_nonnegative_contiguous_support(self):
        fb = build_mel_filterbank(40, N_BINS, SR)
        assert np.all(fb.weights >= 0)
        for row in fb.weights:
            support = np.flatnonzero(row > 0)
            assert support.size > 0
            assert np.array_equal(support, np.arange(support[0], support[-1] + 1))

    def test_peaks_ascend(self):
        fb = build_mel_filterbank(20, N_BINS, SR)
        peaks = fb.weights.argmax(axis=1)
        assert np.all(np.diff(peaks) > 0)
        fb80 = build_mel_filterbank(80, N_BINS, SR)
        assert np.all(np.diff(fb80.weights.argmax(axis=1)) >= 0)

    def test_rebuild_is_identical(self):
        a = build_mel_filterbank(80, N_BINS, SR)
        b = build_mel_filterbank(80, N_BINS, SR)
        assert np.array_equal(a.weights, b.weights)

    @pytest.mark.parametrize("n_filters,n_bins", [(0, 257), (-3, 257), (100, 50)])
    def test_rejects_bad_sizes(self, n_filters, n_bins):
        with pytest.raises(ValueError):
            build_mel_filterbank(n_filters, n_bins, SR)


class TestApplyFilterbank:
    def test_zero_spectrum_hits_floor(self):
        fb = build_mel_filterbank(10, N_BINS, SR)
        out = apply_filterbank(np.zeros(N_BINS), fb)
        assert np.allclose(out, np.log(1e-10))

    def test_scaling_shifts_log_output(self):
        fb = build_mel_filterbank(10, N_BINS, SR)
        spectrum = np.random.default_rng(0).uniform(0.5, 2.0, N_BINS)
        base = apply_filterbank(spectrum, fb)
        scaled = apply_filterbank(7.0 * spectrum, fb)
        assert np.allclose(scaled - base, 2.0 * np.log(7.0), atol=1e-12)

    def test_matches_double_loop_oracle(self):
        fb = build_mel_filterbank(16, N_BINS, SR)
        spectrum = np.random.default_rng(1).uniform(0.0, 3.0, N_BINS)
        got = apply_filterbank(spectrum, fb)
        want = oracles.filterbank_naive(spectrum, fb.weights)
        assert np.allclose(got, want, atol=1e-9)

    def test_batch_matches_per_frame(self):
        fb = build_mel_filterbank(16, N_BINS, SR)
        spectra = np.random.default_rng(2).uniform(0.0, 2.0, (5, N_BINS))
        batch = apply_filterbank(spectra, fb)
        rows = np.stack([apply_filterbank(s, fb) for s in spectra])
        assert np.allclose(batch, rows, rtol=1e-13, atol=0)

    def test_rejects_wrong_bin_count(self):
        fb = build_mel_filterbank(16, N_BINS, SR)
        with pytest.raises(ValueError):
            apply_filterbank(np.ones(100), fb)


class TestSpecAugment:
    def _features(self, n_frames=50, n_filters=8, seed=0):
        values = np.random.default_rng(seed).uniform(-5, 5, (n_frames, n_filters))
        return FeatureMatrix(values=values, meta={"source_id": "m"})

    def test_zero_mask_is_identity(self):
        feats = self._features()
        out = spec_augment(feats, MaskSpec.none(), 7)
        assert np.array_equal(out.values, feats.values)

    def test_deterministic(self):
        feats = self._features()
        mask = MaskSpec(2, 4, 2, 10)
        a = spec_augment(feats, mask, 42)
        b = spec_augment(feats, mask, 42)
        assert np.array_equal(a.values, b.values)

    def test_full_width_mask_reaches_everywhere(self):
        feats = self._features(n_frames=20, n_filters=8)
        mean = np.float32(feats.values.mean())
        mask = MaskSpec(1, 8, 0, 0)
        hit_full = None
        for seed in range(200):
            out = spec_augment(feats, mask, seed)
            if np.all(out.values == mean):
                hit_full = seed
                break
        assert hit_full is not None, "width draw never reached the maximum"

    def test_masked_cells_take_mean_value(self):
        feats = self._features()
        mean = np.float32(feats.values.mean())
        out = spec_augment(feats, MaskSpec(2, 4, 2, 10), 3)
        changed = out.values != feats.values
        assert changed.any()
        assert np.all(out.values[changed] == mean)

    def test_changed_cell_budget(self):
        n_frames, n_filters = 60, 12
        feats = self._features(n_frames, n_filters)
        mask = MaskSpec(2, 5, 2, 7)
        bound = (mask.n_freq_masks * mask.max_freq_width * n_frames
                 + mask.n_time_masks * mask.max_time_width * n_filters)
        for seed in range(25):
            out = spec_augment(feats, mask, seed)
            assert int((out.values != feats.values).sum()) <= bound

    def test_rejects_oversized_widths(self):
        feats = self._features(n_frames=10, n_filters=8)
        with pytest.raises(ValueError):
            spec_augment(feats, MaskSpec(1, 9, 0, 0), 0)
        with pytest.raises(ValueError):
            spec_augment(feats, MaskSpec(0, 0, 1, 11), 0)


class TestArchiveRoundTrip:
    def _matrix(self, seed=0, n_frames=98, n_filters=80):
        values = np.random.default_rng(seed).standard_normal(
            (n_frames, n_filters)).astype(np.float32)
        meta = {"source_id": "utt7", "preset_name": "lpc-swp-exp3+fep",
                "rng_seed": 1234567890123, "alphas": [0.61, 0.7, 0.9, 0.99],
                "betas": [0.71, 1.29, 1.0, 0.85], "sample_rate": SR,
                "frame_ms": 25.0, "hop_ms": 10.0}
        return FeatureMatrix(values=values, meta=meta)

    def test_bit_identical_values(self, tmp_path):
        feats = self._matrix()
        path = tmp_path / "utt7.sfg"
        write_features(feats, path)
        back = read_features(path)
        assert np.array_equal(back.values, feats.values)
        assert back.values.dtype == np.float32

    def test_metadata_preserved_exactly(self, tmp_path):
        feats = self._matrix()
        path = tmp_path / "m.sfg"
        write_features(feats, path)
        assert read_features(path).meta == feats.meta

    def test_write_is_deterministic(self, tmp_path):
        feats = self._matrix()
        write_features(feats, tmp_path / "a.sfg")
        write_features(feats, tmp_path / "b.sfg")
        assert (tmp_path / "a.sfg").read_bytes() == (tmp_path / "b.sfg").read_bytes()
        assert (tmp_path / "a.sfg.json").read_text() == (tmp_path / "b.sfg.json").read_text()

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "t.sfg"
        write_features(self._matrix(), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:len(blob) // 2])
        with pytest.raises(FeatureArchiveError, match="dimension mismatch"):
            read_features(path)

    def test_truncated_header_rejected(self, tmp_path):
        path = tmp_path / "h.sfg"
        path.write_bytes(b"SFG1\x02")
        with pytest.raises(FeatureArchiveError, match="corrupt header"):
            read_features(path)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "w.sfg"
        write_features(self._matrix(), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"NOPE"
        path.write_bytes(bytes(blob))
        with pytest.raises(FeatureArchiveError, match="corrupt header"):
            read_features(path)

    def test_missing_sidecar_rejected(self, tmp_path):
        path = tmp_path / "s.sfg"
        write_features(self._matrix(), path)
        (tmp_path / "s.sfg.json").unlink()
        with pytest.raises(FeatureArchiveError, match="sidecar"):
            read_features(path)
