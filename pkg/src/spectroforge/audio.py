"""Audio ingest and analysis framing.

A minimal RIFF/WAVE reader (16-bit PCM and 32-bit IEEE float, little-endian)
feeds pre-emphasis and overlapped windowed framing.  Everything downstream
operates on mono clips with amplitudes in [-1, 1]; clips are never resampled,
a mismatched rate is the caller's problem to reject loudly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

DEFAULT_PRE_EMPHASIS = 0.97


class AudioFormatError(Exception):
    """Raised for files this reader cannot or will not decode."""


@dataclass(frozen=True)
class AudioClip:
    """Mono audio with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    channel_count: int
    source_id: str

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class Frame:
    """One fixed-length analysis window cut out of a clip."""

    samples: np.ndarray
    start_sample: int
    frame_index: int
    window_applied: bool


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload) for every chunk in a RIFF body."""
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        payload = data[pos + 8:pos + 8 + size]
        if len(payload) < size:
            raise AudioFormatError(f"truncated chunk {cid!r}: "
                                   f"declared {size}, got {len(payload)} bytes")
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def load_audio(path) -> AudioClip:
    """Read a WAV file into a mono AudioClip.

    Accepts uncompressed little-endian RIFF/WAVE with 16-bit integer PCM or
    32-bit IEEE float samples.  Multi-channel audio is averaged down to mono;
    integer samples are scaled to [-1, 1] by 2^15.  Unknown chunks are
    skipped.

    Raises:
        AudioFormatError: not a WAV file, compressed/unsupported encoding,
            zero-length audio, or a truncated chunk.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, chunk in _read_chunks(data):
        if cid == b"fmt " and fmt is None:
            if len(chunk) < 16:
                raise AudioFormatError(f"{path}: malformed fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", chunk, 0)
        elif cid == b"data" and payload is None:
            payload = chunk
    if fmt is None or payload is None:
        raise AudioFormatError(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels < 1 or sample_rate <= 0:
        raise AudioFormatError(f"{path}: malformed fmt chunk")
    if audio_format == 1 and bits == 16:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        raw = np.frombuffer(payload[:len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise AudioFormatError(
            f"{path}: unsupported encoding (format tag {audio_format}, "
            f"{bits}-bit); only 16-bit PCM and 32-bit float are readable")

    if samples.size == 0:
        raise AudioFormatError(f"{path}: zero-length audio")
    if n_channels > 1:
        usable = (samples.size // n_channels) * n_channels
        samples = samples[:usable].reshape(-1, n_channels).mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise AudioFormatError(f"{path}: non-finite sample values")

    return AudioClip(samples=samples, sample_rate=int(sample_rate),
                     channel_count=1, source_id=str(path))


def pre_emphasize(clip: AudioClip, coefficient: float = DEFAULT_PRE_EMPHASIS) -> AudioClip:
    """First-order high-pass: y[n] = x[n] - coefficient * x[n-1], y[0] = x[0]."""
    if not 0.0 <= coefficient < 1.0:
        raise ValueError(f"pre-emphasis coefficient must be in [0, 1), got {coefficient}")
    if coefficient == 0.0:
        return clip
    x = clip.samples
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - coefficient * x[:-1]
    return AudioClip(samples=y, sample_rate=clip.sample_rate,
                     channel_count=clip.channel_count, source_id=clip.source_id)


def frame_length_samples(sample_rate: int, frame_ms: float) -> int:
    return int(round(frame_ms * sample_rate / 1000.0))


def frame_signal(clip: AudioClip, frame_ms: float = 25.0, hop_ms: float = 10.0,
                 window: str = "hamming") -> list[Frame]:
    """Cut a clip into overlapped frames, one window kind applied to all.

    Frames start at multiples of the hop; a trailing partial frame is
    dropped.  ``window`` is one of "hamming", "rectangular", or "none"
    (the last two are equivalent: no taper).
    """
    if hop_ms <= 0 or frame_ms < hop_ms:
        raise ValueError(f"need frame_ms >= hop_ms > 0, got {frame_ms}/{hop_ms}")
    if window not in ("hamming", "rectangular", "none"):
        raise ValueError(f"unknown window kind {window!r}")
    n_frame = frame_length_samples(clip.sample_rate, frame_ms)
    n_hop = frame_length_samples(clip.sample_rate, hop_ms)
    n = len(clip.samples)
    if n < n_frame:
        raise ValueError(f"clip has {n} samples, shorter than one "
                         f"{n_frame}-sample frame")

    taper = np.hamming(n_frame) if window == "hamming" else None
    n_frames = (n - n_frame) // n_hop + 1
    frames = []
    for i in range(n_frames):
        start = i * n_hop
        chunk = clip.samples[start:start + n_frame]
        if taper is not None:
            chunk = chunk * taper
        else:
            chunk = chunk.copy()
        frames.append(Frame(samples=chunk, start_sample=start, frame_index=i,
                            window_applied=taper is not None))
    return frames
