"""Corpus-scale feature extraction and augmentation runs.

A run walks a directory of WAV files in sorted order, pushes each utterance
through the configured chain (framing, LPC analysis, segmental warping,
energy perturbation, filterbank, masking), writes one feature archive per
(utterance, copy), and records a JSON-lines manifest.  Failures are isolated
per utterance: a bad file yields an error entry and the run continues.

Determinism contract: every random draw for an utterance derives from
(global_seed, utterance_id, copy_index) via ``rng.derive_seed``; frame-level
and mask draws branch off that seed through ``rng.substream``.  Re-running a
command therefore reproduces every archive and the manifest byte for byte.
Paths inside the manifest are stored relative to their corpus directories so
the bytes do not depend on where the corpora live.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .audio import (AudioClip, AudioFormatError, frame_signal, load_audio,
                    pre_emphasize)
from .features import (FeatureMatrix, MaskSpec, apply_filterbank,
                       build_mel_filterbank, spec_augment, write_features)
from .lpc import (DegenerateFrameError, _autocorr_batch, _envelope_batch,
                  _levinson_batch, _residual_from_mag, AUTOCORR_FLOOR,
                  SpectralEnvelope, fit_lpc, formants_from_poles)
from .rng import derive_seed, substream
from .warp import (PRESETS, VTLP_F_HI_FRACTION, apply_fep, apply_warp,
                   build_warp_map, detect_segments, draw_factors,
                   single_segment_map)

JOBS_ENV_VAR = "SPECTROFORGE_JOBS"
MASK_STREAM_TAG = 0x6D61736B          # ascii "mask"
VOICING_ENERGY_RATIO = 0.01           # frame energy vs utterance max to count as voiced
FORMANT_BANDWIDTH_CAP_HZ = 400.0      # wider pole pairs are not counted as formants


@dataclass(frozen=True)
class AugmentConfig:
    """Everything a corpus run needs; JSON-serializable, flags can override."""

    preset_name: str = "lpc-swp-exp3+fep"
    sample_rate: int = 16000
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    lpc_order: int = 18
    fft_size: int = 512
    n_mel: int = 80
    factor_granularity: str = "per-utterance"   # or "per-frame"
    mask: MaskSpec = field(default_factory=MaskSpec)
    global_seed: int = 0
    augment_copies: int = 1
    pre_emphasis: float = 0.97
    window: str = "hamming"
    jobs: int = 0                                # 0: $SPECTROFORGE_JOBS or serial

    def __post_init__(self):
        if self.preset_name not in PRESETS:
            raise ValueError(f"unknown preset {self.preset_name!r}; "
                             f"expected one of {sorted(PRESETS)}")
        if self.hop_ms <= 0 or self.frame_ms < self.hop_ms:
            raise ValueError("need frame_ms >= hop_ms > 0")
        if self.lpc_order <= 0 or self.sample_rate <= 0:
            raise ValueError("lpc_order and sample_rate must be positive")
        if self.fft_size & (self.fft_size - 1) or self.fft_size < 2 * self.lpc_order:
            raise ValueError("fft_size must be a power of two >= 2*lpc_order")
        if self.n_mel < 1 or self.augment_copies < 0:
            raise ValueError("n_mel must be >= 1 and augment_copies >= 0")
        if self.factor_granularity not in ("per-utterance", "per-frame"):
            raise ValueError("factor_granularity must be per-utterance or per-frame")
        if not 0.0 <= self.pre_emphasis < 1.0:
            raise ValueError("pre_emphasis must be in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AugmentConfig":
        data = dict(data)
        if "mask" in data and isinstance(data["mask"], dict):
            data["mask"] = MaskSpec(**data["mask"])
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "AugmentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class CorpusManifest:
    """Ordered per-archive records of one run; serialized as JSON lines."""

    entries: list[dict] = field(default_factory=list)

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(json.dumps(entry) + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "CorpusManifest":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(json.loads(line))
        return cls(entries=entries)

    def count(self, status: str) -> int:
        return sum(1 for e in self.entries if e["status"] == status)


def resolve_jobs(config: AugmentConfig) -> int:
    if config.jobs > 0:
        return config.jobs
    env = os.environ.get(JOBS_ENV_VAR, "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{JOBS_ENV_VAR} must be an integer, got {env!r}")
    return 1


def _load_prepared_clip(path, config: AugmentConfig) -> AudioClip:
    clip = load_audio(path)
    if clip.sample_rate != config.sample_rate:
        raise AudioFormatError(
            f"{path}: sample rate {clip.sample_rate} does not match configured "
            f"{config.sample_rate}; resampling is not performed")
    if config.pre_emphasis > 0:
        clip = pre_emphasize(clip, config.pre_emphasis)
    return clip


def _frame_matrix(clip: AudioClip, config: AugmentConfig) -> np.ndarray:
    frames = frame_signal(clip, config.frame_ms, config.hop_ms, config.window)
    return np.stack([f.samples for f in frames])


def _factors_for_frame(config: AugmentConfig, utterance_seed: int, frame_index: int):
    if config.factor_granularity == "per-frame":
        return draw_factors(config.preset_name, substream(utterance_seed, frame_index))
    return draw_factors(config.preset_name, utterance_seed)


def _augment_magnitudes(frames: np.ndarray, config: AugmentConfig,
                        utterance_seed: int) -> tuple[np.ndarray, int]:
    """Run the spectral chain over a frame matrix.

    Returns (modified magnitude spectra (frames x bins), degenerate frame
    count).  Degenerate frames keep their raw spectrum.
    """
    preset = PRESETS[config.preset_name]
    nyquist = config.sample_rate / 2.0
    bin_hz = config.sample_rate / config.fft_size
    mag = np.abs(np.fft.rfft(frames, config.fft_size, axis=1))
    out = np.empty_like(mag)
    n_degenerate = 0

    if not preset.uses_lpc:
        # uniform baseline: warp the raw FFT magnitude, no envelope model
        segmap = single_segment_map(VTLP_F_HI_FRACTION * nyquist)
        shared_map = None
        if config.factor_granularity == "per-utterance":
            factors = _factors_for_frame(config, utterance_seed, 0)
            shared_map = build_warp_map(segmap, factors, nyquist)
        for i in range(mag.shape[0]):
            wmap = shared_map or build_warp_map(
                segmap, _factors_for_frame(config, utterance_seed, i), nyquist)
            raw = SpectralEnvelope(mag[i], bin_hz, nyquist)
            out[i] = apply_warp(raw, wmap).magnitudes
        return out, 0

    r = _autocorr_batch(frames, config.lpc_order)
    r[:, 0] += AUTOCORR_FLOOR * r[:, 0]
    coeffs, err, valid = _levinson_batch(r, config.lpc_order)
    env_rows = _envelope_batch(coeffs, np.sqrt(np.maximum(err, 0.0)), config.fft_size)
    for i in range(mag.shape[0]):
        if not valid[i]:
            out[i] = mag[i]
            n_degenerate += 1
            continue
        env = SpectralEnvelope(env_rows[i], bin_hz, nyquist)
        residual = _residual_from_mag(mag[i], env.magnitudes)
        segmap = detect_segments(env)
        factors = _factors_for_frame(config, utterance_seed, i)
        wmap = build_warp_map(segmap, factors, nyquist)
        warped = apply_warp(env, wmap)
        if preset.fep:
            warped = apply_fep(warped, segmap, wmap, factors)
        out[i] = warped.magnitudes * residual
    return out, n_degenerate


def _featurize_one(wav_path, config: AugmentConfig) -> FeatureMatrix:
    clip = _load_prepared_clip(wav_path, config)
    frames = _frame_matrix(clip, config)
    mag = np.abs(np.fft.rfft(frames, config.fft_size, axis=1))
    fb = build_mel_filterbank(config.n_mel, config.fft_size // 2 + 1, config.sample_rate)
    stem = os.path.splitext(os.path.basename(str(wav_path)))[0]
    meta = {"source_id": stem, "preset_name": None, "rng_seed": None,
            "alphas": None, "betas": None, "sample_rate": config.sample_rate,
            "frame_ms": config.frame_ms, "hop_ms": config.hop_ms}
    return FeatureMatrix(values=apply_filterbank(mag, fb), meta=meta)


def _augment_one(wav_path, config: AugmentConfig, copy_index: int) -> tuple[FeatureMatrix, int]:
    clip = _load_prepared_clip(wav_path, config)
    frames = _frame_matrix(clip, config)
    stem = os.path.splitext(os.path.basename(str(wav_path)))[0]
    seed = derive_seed(config.global_seed, stem, copy_index)
    mag, n_degenerate = _augment_magnitudes(frames, config, seed)
    fb = build_mel_filterbank(config.n_mel, config.fft_size // 2 + 1, config.sample_rate)
    recorded = draw_factors(config.preset_name, seed) \
        if config.factor_granularity == "per-utterance" else None
    meta = {"source_id": stem, "preset_name": config.preset_name, "rng_seed": seed,
            "alphas": list(recorded.alphas) if recorded else None,
            "betas": list(recorded.betas) if recorded else None,
            "sample_rate": config.sample_rate, "frame_ms": config.frame_ms,
            "hop_ms": config.hop_ms}
    feats = FeatureMatrix(values=apply_filterbank(mag, fb), meta=meta)
    if config.mask.n_freq_masks > 0 or config.mask.n_time_masks > 0:
        # short utterances: cap mask widths at the axis lengths
        effective = MaskSpec(
            n_freq_masks=config.mask.n_freq_masks,
            max_freq_width=min(config.mask.max_freq_width, feats.n_filters),
            n_time_masks=config.mask.n_time_masks,
            max_time_width=min(config.mask.max_time_width, feats.n_frames))
        feats = spec_augment(feats, effective, substream(seed, MASK_STREAM_TAG))
    return feats, n_degenerate


def _entry(utterance_id, audio_rel, feature_rel, preset, seed, alphas, betas,
           n_frames, status, error=None) -> dict:
    entry = {"utterance_id": utterance_id, "audio_path": audio_rel,
             "feature_path": feature_rel, "preset": preset, "seed": seed,
             "alphas": alphas, "betas": betas, "n_frames": n_frames,
             "status": status}
    if error is not None:
        entry["error"] = error
    return entry


_WORKER_BLAS_LIMIT = None


def _worker_init():
    """Pin BLAS to one thread per worker; the pool owns the parallelism."""
    global _WORKER_BLAS_LIMIT
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    _WORKER_BLAS_LIMIT = threadpool_limits(limits=1)


def _process_task(task) -> list[dict]:
    """Worker body: one source file, all its copies.  Must stay picklable."""
    mode, wav_path, audio_rel, out_dir, config = task
    stem = os.path.splitext(os.path.basename(wav_path))[0]
    entries = []
    if mode == "featurize":
        try:
            feats = _featurize_one(wav_path, config)
            feature_rel = stem + ".sfg"
            write_features(feats, os.path.join(out_dir, feature_rel))
            entries.append(_entry(stem, audio_rel, feature_rel, None, None, None,
                                  None, feats.n_frames, "ok"))
        except (AudioFormatError, ValueError, OSError) as exc:
            entries.append(_entry(stem, audio_rel, None, None, None, None, None,
                                  None, "error", error=str(exc)))
        return entries

    for copy_index in range(config.augment_copies):
        utterance_id = f"{stem}.c{copy_index}"
        try:
            feats, n_degenerate = _augment_one(wav_path, config, copy_index)
            feature_rel = utterance_id + ".sfg"
            write_features(feats, os.path.join(out_dir, feature_rel))
            all_degenerate = feats.n_frames > 0 and n_degenerate == feats.n_frames
            status = "skipped-degenerate" if all_degenerate else "ok"
            entries.append(_entry(utterance_id, audio_rel, feature_rel,
                                  feats.meta["preset_name"], feats.meta["rng_seed"],
                                  feats.meta["alphas"], feats.meta["betas"],
                                  feats.n_frames, status))
        except (AudioFormatError, ValueError, OSError) as exc:
            entries.append(_entry(utterance_id, audio_rel, None, config.preset_name,
                                  None, None, None, None, "error", error=str(exc)))
    return entries


def _run_corpus(mode: str, config: AugmentConfig, input_dir, output_dir) -> CorpusManifest:
    wavs = sorted(f for f in os.listdir(input_dir) if f.lower().endswith(".wav"))
    if not wavs:
        raise ValueError(f"no WAV files found in {input_dir}")
    os.makedirs(output_dir, exist_ok=True)
    tasks = [(mode, os.path.join(str(input_dir), name), name, str(output_dir), config)
             for name in wavs]
    jobs = resolve_jobs(config)
    if jobs <= 1:
        results = [_process_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init) as pool:
            results = list(pool.map(_process_task, tasks))
    manifest = CorpusManifest(entries=[e for group in results for e in group])
    manifest.write_jsonl(os.path.join(str(output_dir), "manifest.jsonl"))
    return manifest


def run_featurize(config: AugmentConfig, input_dir, output_dir) -> CorpusManifest:
    """Plain log-mel features for every WAV in a directory, no augmentation."""
    return _run_corpus("featurize", config, input_dir, output_dir)


def run_augment(config: AugmentConfig, input_dir, output_dir) -> CorpusManifest:
    """Augmented features: ``augment_copies`` archives per utterance.

    Archives are named ``<stem>.c<copy>.sfg`` so they can sit alongside the
    plain features of the same corpus without collisions.
    """
    return _run_corpus("augment", config, input_dir, output_dir)


def run_inspect(config: AugmentConfig, audio_path, frame_index: int) -> dict:
    """Single-frame analysis report with every intermediate of the chain.

    The report always carries the LPC-envelope view (envelope, valleys,
    segment boundaries, formants) plus the warped and energy-scaled
    envelopes under the configured preset's factor draw, which is enough to
    re-plot before/after spectra externally.  Degenerate frames keep their
    raw spectrum and flag ``degenerate`` with empty envelope fields.
    """
    clip = _load_prepared_clip(audio_path, config)
    frames = frame_signal(clip, config.frame_ms, config.hop_ms, config.window)
    if not 0 <= frame_index < len(frames):
        raise ValueError(f"frame_index {frame_index} out of range "
                         f"[0, {len(frames)})")
    frame = frames[frame_index]
    stem = os.path.splitext(os.path.basename(str(audio_path)))[0]
    seed = derive_seed(config.global_seed, stem, 0)
    nyquist = config.sample_rate / 2.0
    mag = np.abs(np.fft.rfft(frame.samples, config.fft_size))
    factors = _factors_for_frame(config, seed, frame_index)
    report = {
        "source_id": stem, "frame_index": frame_index,
        "sample_rate": config.sample_rate, "fft_size": config.fft_size,
        "bin_hz": config.sample_rate / config.fft_size,
        "preset": config.preset_name, "seed": seed,
        "alphas": list(factors.alphas), "betas": list(factors.betas),
        "degenerate": False, "raw_magnitude": mag.tolist(),
        "envelope": [], "valleys_hz": [], "boundaries_hz": [],
        "warped_envelope": [], "fep_envelope": None, "formants": [],
    }
    try:
        model = fit_lpc(frame, config.lpc_order)
        env = SpectralEnvelope(
            _envelope_batch(model.coefficients[None, :], np.array([model.gain]),
                            config.fft_size)[0],
            config.sample_rate / config.fft_size, nyquist)
        formants = formants_from_poles(model, config.sample_rate)
    except DegenerateFrameError:
        report["degenerate"] = True
        return report
    segmap = detect_segments(env)
    wmap = build_warp_map(segmap, factors, nyquist)
    warped = apply_warp(env, wmap)
    report.update(
        envelope=env.magnitudes.tolist(),
        valleys_hz=segmap.valleys_hz.tolist(),
        boundaries_hz=segmap.boundaries_hz.tolist(),
        warped_envelope=warped.magnitudes.tolist(),
        formants=[{"frequency_hz": f.frequency_hz, "bandwidth_hz": f.bandwidth_hz,
                   "magnitude": f.magnitude} for f in formants],
    )
    if PRESETS[config.preset_name].fep:
        report["fep_envelope"] = apply_fep(warped, segmap, wmap, factors).magnitudes.tolist()
    return report


def _collect_formants(corpus_dir, config: AugmentConfig) -> np.ndarray:
    """First-3 formant frequencies of every voiced frame in a corpus.

    A frame counts as voiced when its windowed energy is at least 1% of the
    utterance's loudest frame and pole analysis yields three formants with
    bandwidth under 400 Hz (wider pole pairs are fit artifacts, not
    resonances).
    """
    rows = []
    wavs = sorted(f for f in os.listdir(corpus_dir) if f.lower().endswith(".wav"))
    if not wavs:
        raise ValueError(f"no WAV files found in {corpus_dir}")
    for name in wavs:
        try:
            clip = _load_prepared_clip(os.path.join(str(corpus_dir), name), config)
            frames = frame_signal(clip, config.frame_ms, config.hop_ms, config.window)
        except (AudioFormatError, ValueError):
            continue
        energies = np.array([float(np.dot(f.samples, f.samples)) for f in frames])
        if energies.size == 0 or energies.max() <= 0:
            continue
        threshold = VOICING_ENERGY_RATIO * energies.max()
        for frame, energy in zip(frames, energies):
            if energy < threshold:
                continue
            try:
                formants = formants_from_poles(fit_lpc(frame, config.lpc_order),
                                               config.sample_rate)
            except DegenerateFrameError:
                continue
            narrow = [f for f in formants if f.bandwidth_hz < FORMANT_BANDWIDTH_CAP_HZ]
            if len(narrow) >= 3:
                rows.append([f.frequency_hz for f in narrow[:3]])
    if not rows:
        raise ValueError(f"{corpus_dir}: no voiced frames with three formants")
    return np.asarray(rows)


def run_formant_stats(config: AugmentConfig, corpus_a_dir, corpus_b_dir) -> dict:
    """Mean/stddev of F1-F3 per corpus and the per-formant b/a mean ratios."""
    a = _collect_formants(corpus_a_dir, config)
    b = _collect_formants(corpus_b_dir, config)
    return {
        "n_frames_a": int(a.shape[0]), "n_frames_b": int(b.shape[0]),
        "mean_a_hz": a.mean(axis=0).tolist(), "std_a_hz": a.std(axis=0).tolist(),
        "mean_b_hz": b.mean(axis=0).tolist(), "std_b_hz": b.std(axis=0).tolist(),
        "ratio_b_over_a": (b.mean(axis=0) / a.mean(axis=0)).tolist(),
    }


def _csv_cell(value) -> str:
    return "" if value == "" else repr(float(value))


def formant_stats_csv(stats: dict) -> str:
    lines = ["formant,corpus_a_mean_hz,corpus_a_std_hz,"
             "corpus_b_mean_hz,corpus_b_std_hz,ratio_b_over_a"]
    for i in range(3):
        cells = [stats["mean_a_hz"][i], stats["std_a_hz"][i],
                 stats["mean_b_hz"][i], stats["std_b_hz"][i],
                 stats["ratio_b_over_a"][i]]
        lines.append(f"F{i + 1}," + ",".join(_csv_cell(c) for c in cells))
    return "\n".join(lines) + "\n"


def inspect_report_csv(report: dict) -> str:
    """Per-bin columns of an inspect report (RFC-4180, header row first)."""
    n_bins = len(report["raw_magnitude"])
    bin_hz = report["bin_hz"]

    def column(name):
        vals = report[name]
        return vals if vals else [""] * n_bins

    env, warped, fep = column("envelope"), column("warped_envelope"), column("fep_envelope")
    lines = ["frequency_hz,raw_magnitude,envelope,warped_envelope,fep_envelope"]
    for k in range(n_bins):
        cells = [k * bin_hz, report["raw_magnitude"][k], env[k], warped[k], fep[k]]
        lines.append(",".join(_csv_cell(c) for c in cells))
    return "\n".join(lines) + "\n"
