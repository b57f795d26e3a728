"""Log-mel filterbank features, masking augmentation, and archive I/O.

Feature archives are a deliberately tiny binary format: the magic bytes
"SFG1", two little-endian u32 dimensions (frames, filters), then float32
log-energies row-major by frame.  Provenance metadata travels in a JSON
sidecar at ``<path>.json`` so the binary stays trivially parseable anywhere.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64

ARCHIVE_MAGIC = b"SFG1"
LOG_FLOOR = 1e-10
DEFAULT_N_MEL = 80


class FeatureArchiveError(Exception):
    """Raised for unreadable or inconsistent feature archives."""


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular filters with centers uniformly spaced on the mel scale."""

    n_filters: int
    weights: np.ndarray        # (n_filters, n_bins), non-negative
    mel_low_hz: float
    mel_high_hz: float
    edges_hz: np.ndarray       # n_filters + 2 triangle corner frequencies


@dataclass(frozen=True)
class MaskSpec:
    """How many frequency/time masks to draw and their maximum widths."""

    n_freq_masks: int = 2
    max_freq_width: int = 30
    n_time_masks: int = 2
    max_time_width: int = 40

    @classmethod
    def none(cls) -> "MaskSpec":
        return cls(0, 0, 0, 0)


@dataclass(frozen=True)
class FeatureMatrix:
    """frames x filters log-mel energies plus provenance metadata.

    Values are stored float32, matching the archive encoding, so a write
    followed by a read round-trips bit for bit.
    """

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.ascontiguousarray(self.values, dtype=np.float32))

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_filters(self) -> int:
        return self.values.shape[1]


def build_mel_filterbank(n_filters: int, n_bins: int, sample_rate: int) -> MelFilterbank:
    """Construct triangular mel filters over the rfft bin grid.

    Triangle corners sit at n_filters + 2 points uniformly spaced on the
    mel scale m(f) = 2595 log10(1 + f/700) between 0 and Nyquist; filter i
    rises over [edge_i, edge_i+1] and falls over [edge_i+1, edge_i+2].
    """
    if n_filters < 1:
        raise ValueError(f"n_filters must be >= 1, got {n_filters}")
    if n_bins < n_filters + 2:
        raise ValueError(f"n_bins {n_bins} too small for {n_filters} filters")
    nyquist = sample_rate / 2.0
    freqs = np.linspace(0.0, nyquist, n_bins)
    edges = _mel_to_hz(np.linspace(0.0, _hz_to_mel(nyquist), n_filters + 2))
    left, center, right = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rise = (freqs[None, :] - left) / (center - left)
    fall = (right - freqs[None, :]) / (right - center)
    weights = np.maximum(0.0, np.minimum(rise, fall))
    return MelFilterbank(n_filters=n_filters, weights=weights,
                         mel_low_hz=0.0, mel_high_hz=nyquist, edges_hz=edges)


def apply_filterbank(spectrum: np.ndarray, fb: MelFilterbank) -> np.ndarray:
    """Log power through the filterbank: ln(max(W @ spectrum^2, floor)).

    ``spectrum`` holds magnitude bins on its last axis; a 2-D input is
    treated as a stack of frames.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.shape[-1] != fb.weights.shape[1]:
        raise ValueError(f"spectrum has {spectrum.shape[-1]} bins, "
                         f"filterbank expects {fb.weights.shape[1]}")
    power = spectrum * spectrum
    return np.log(np.maximum(power @ fb.weights.T, LOG_FLOOR))


def spec_augment(features: FeatureMatrix, mask: MaskSpec, seed: int) -> FeatureMatrix:
    """Mask random frequency bands and time spans with the utterance mean.

    Draw order per mask, frequency masks first: width uniform in
    [0, max_width], then start uniform over the valid positions.  The fill
    value is the mean of the unmasked input, so masking never injects the
    log floor as a fake feature.  Deterministic for a fixed seed.
    """
    n_frames, n_filters = features.values.shape
    if mask.max_freq_width > n_filters or mask.max_time_width > n_frames:
        raise ValueError("mask widths exceed feature dimensions")
    out = features.values.copy()
    fill = float(features.values.mean()) if features.values.size else 0.0
    gen = SplitMix64(seed)
    for _ in range(mask.n_freq_masks):
        width = gen.randint(mask.max_freq_width + 1)
        start = gen.randint(n_filters - width + 1)
        out[:, start:start + width] = fill
    for _ in range(mask.n_time_masks):
        width = gen.randint(mask.max_time_width + 1)
        start = gen.randint(n_frames - width + 1)
        out[start:start + width, :] = fill
    return FeatureMatrix(values=out, meta=dict(features.meta))


def write_features(features: FeatureMatrix, path) -> None:
    """Write the binary archive and its JSON metadata sidecar."""
    values = features.values
    header = ARCHIVE_MAGIC + struct.pack("<II", values.shape[0], values.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.astype("<f4", copy=False).tobytes(order="C"))
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(features.meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_features(path) -> FeatureMatrix:
    """Read an archive written by ``write_features``; exact inverse.

    Raises:
        FeatureArchiveError: bad magic, truncated header, payload size not
            matching the declared dimensions, or missing sidecar.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != ARCHIVE_MAGIC:
        raise FeatureArchiveError(f"{path}: corrupt header")
    n_frames, n_filters = struct.unpack_from("<II", blob, 4)
    expected = 12 + 4 * n_frames * n_filters
    if len(blob) != expected:
        raise FeatureArchiveError(f"{path}: dimension mismatch, header says "
                                  f"{n_frames}x{n_filters} but file has "
                                  f"{len(blob) - 12} payload bytes")
    values = np.frombuffer(blob, dtype="<f4", offset=12).reshape(n_frames, n_filters).copy()
    sidecar = str(path) + ".json"
    if not os.path.exists(sidecar):
        raise FeatureArchiveError(f"{path}: missing metadata sidecar {sidecar}")
    with open(sidecar, encoding="utf-8") as fh:
        meta = json.load(fh)
    return FeatureMatrix(values=values, meta=meta)
