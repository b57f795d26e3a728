import numpy as np
import pytest

import oracles
from spectroforge import (AudioClip, AudioFormatError, frame_signal,
                          load_audio, pre_emphasize)

SR = 16000


class TestLoadAudio:
    def test_pcm16_scaling(self, tmp_path):
        path = tmp_path / "x.wav"
        payload = oracles.pcm16_raw_bytes([16384, -16384])
        path.write_bytes(oracles.wav_bytes([0, 0], SR, data_override=payload))
        clip = load_audio(path)
        assert np.allclose(clip.samples, [0.5, -0.5])

    def test_stereo_averaged_to_mono(self, tmp_path):
        path = tmp_path / "st.wav"
        stereo = np.array([[1.0, 0.0], [0.5, -0.5]])
        oracles.write_wav(path, stereo, SR, fmt="float32", channels=2)
        clip = load_audio(path)
        assert clip.channel_count == 1
        assert np.allclose(clip.samples, [0.5, 0.0])

    def test_sample_count_preserved(self, tmp_path):
        path = tmp_path / "sec.wav"
        oracles.write_wav(path, np.zeros(SR) + 0.25, SR)
        assert len(load_audio(path)) == SR

    def test_float32_roundtrip(self, tmp_path):
        path = tmp_path / "f32.wav"
        values = np.array([0.125, -0.5, 0.725], dtype=np.float32)
        oracles.write_wav(path, values, SR, fmt="float32")
        assert np.array_equal(load_audio(path).samples, values.astype(np.float64))

    def test_unknown_chunks_skipped(self, tmp_path):
        path = tmp_path / "chunky.wav"
        extra = b"LIST" + (12).to_bytes(4, "little") + b"INFOabcdefgh"
        path.write_bytes(oracles.wav_bytes([0.5, -0.5], SR, extra_chunk=extra))
        assert np.allclose(load_audio(path).samples, [0.5, -0.5], atol=1e-4)

    def test_deterministic_reread(self, tmp_path):
        path = tmp_path / "det.wav"
        rng = np.random.default_rng(3)
        oracles.write_wav(path, rng.uniform(-1, 1, 500), SR)
        assert np.array_equal(load_audio(path).samples, load_audio(path).samples)

    def test_rejects_compressed_encoding(self, tmp_path):
        path = tmp_path / "alaw.wav"
        blob = bytearray(oracles.wav_bytes([0.1, 0.2], SR))
        blob[20:22] = (6).to_bytes(2, "little")  # format tag 6 = A-law
        path.write_bytes(bytes(blob))
        with pytest.raises(AudioFormatError, match="unsupported encoding"):
            load_audio(path)

    def test_rejects_zero_length(self, tmp_path):
        path = tmp_path / "empty.wav"
        path.write_bytes(oracles.wav_bytes([0.0], SR, data_override=b""))
        with pytest.raises(AudioFormatError, match="zero-length"):
            load_audio(path)

    def test_rejects_non_wav(self, tmp_path):
        path = tmp_path / "junk.wav"
        path.write_bytes(b"this is not audio at all, definitely")
        with pytest.raises(AudioFormatError, match="not a RIFF"):
            load_audio(path)

    def test_rejects_truncated_data(self, tmp_path):
        path = tmp_path / "trunc.wav"
        blob = oracles.wav_bytes(np.zeros(100) + 0.1, SR)
        path.write_bytes(blob[:-50])
        with pytest.raises(AudioFormatError, match="truncated"):
            load_audio(path)


class TestPreEmphasize:
    def _clip(self, samples):
        return AudioClip(samples=np.asarray(samples, dtype=np.float64),
                         sample_rate=SR, channel_count=1, source_id="t")

    def test_zero_coefficient_is_identity(self):
        clip = self._clip([0.1, 0.2, 0.3])
        assert np.array_equal(pre_emphasize(clip, 0.0).samples, clip.samples)

    def test_constant_input(self):
        out = pre_emphasize(self._clip([1.0, 1.0, 1.0]), 0.97)
        assert np.allclose(out.samples, [1.0, 0.03, 0.03])

    def test_matches_naive_loop(self):
        x = np.random.default_rng(11).uniform(-1, 1, 100)
        out = pre_emphasize(self._clip(x), 0.97)
        assert np.allclose(out.samples, oracles.preemph_naive(x, 0.97), atol=1e-15)

    def test_linearity(self):
        x = np.random.default_rng(5).uniform(-0.3, 0.3, 64)
        scaled = pre_emphasize(self._clip(3.0 * x), 0.95).samples
        ref = 3.0 * pre_emphasize(self._clip(x), 0.95).samples
        assert np.allclose(scaled, ref, rtol=1e-15, atol=1e-15)

    @pytest.mark.parametrize("coeff", [-0.1, 1.0, 1.5])
    def test_rejects_bad_coefficient(self, coeff):
        with pytest.raises(ValueError):
            pre_emphasize(self._clip([0.1, 0.2]), coeff)


class TestFrameSignal:
    def _clip(self, samples):
        return AudioClip(samples=np.asarray(samples, dtype=np.float64),
                         sample_rate=SR, channel_count=1, source_id="t")

    def test_one_second_frame_count(self):
        frames = frame_signal(self._clip(np.zeros(SR)), 25.0, 10.0, "none")
        assert len(frames) == 98
        assert all(len(f.samples) == 400 for f in frames)

    def test_count_matches_enumeration_oracle(self):
        for n in (400, 401, 559, 560, 561, 16000, 16100):
            frames = frame_signal(self._clip(np.zeros(n)), 25.0, 10.0, "none")
            expected = sum(1 for start in range(0, n, 160) if start + 400 <= n)
            assert len(frames) == expected, f"n={n}"

    def test_start_offsets_form_arithmetic_sequence(self):
        frames = frame_signal(self._clip(np.zeros(5 * 400)), 25.0, 10.0, "none")
        starts = np.array([f.start_sample for f in frames])
        assert np.array_equal(np.diff(starts), np.full(len(frames) - 1, 160))
        assert [f.frame_index for f in frames] == list(range(len(frames)))

    def test_rectangular_window_passthrough(self):
        frames = frame_signal(self._clip(np.ones(800)), 25.0, 10.0, "rectangular")
        for f in frames:
            assert np.array_equal(f.samples, np.ones(400))
            assert not f.window_applied

    def test_hamming_window_applied(self):
        frames = frame_signal(self._clip(np.ones(400)), 25.0, 10.0, "hamming")
        assert np.allclose(frames[0].samples, np.hamming(400))
        assert frames[0].window_applied

    def test_partial_trailing_frame_dropped(self):
        frames = frame_signal(self._clip(np.zeros(400 + 159)), 25.0, 10.0, "none")
        assert len(frames) == 1

    def test_rejects_short_clip(self):
        with pytest.raises(ValueError, match="shorter"):
            frame_signal(self._clip(np.zeros(399)), 25.0, 10.0)

    def test_rejects_bad_hop(self):
        with pytest.raises(ValueError):
            frame_signal(self._clip(np.zeros(SR)), 10.0, 25.0)

    def test_rejects_unknown_window(self):
        with pytest.raises(ValueError, match="window"):
            frame_signal(self._clip(np.zeros(SR)), 25.0, 10.0, "kaiser")
