"""Speech-spectrum augmentation: make adult spectra children-like.

The chain (per analysis frame): LPC envelope -> valley-bounded segments ->
per-segment random frequency warp -> per-segment random energy scale ->
envelope x residual reconstruction -> log-mel features.  Uniform-warp
baselines and feature masking are included, plus a corpus CLI
(``spectroforge featurize|augment|inspect|formant-stats``).
"""

from .audio import (AudioClip, AudioFormatError, Frame, frame_signal,
                    load_audio, pre_emphasize)
from .features import (FeatureArchiveError, FeatureMatrix, MaskSpec,
                       MelFilterbank, apply_filterbank, build_mel_filterbank,
                       read_features, spec_augment, write_features)
from .lpc import (DegenerateFrameError, Formant, LpcModel, SpectralEnvelope,
                  autocorrelate, envelope, fit_lpc, formants_from_poles,
                  levinson_durbin, residual_spectrum)
from .pipeline import (AugmentConfig, CorpusManifest, run_augment,
                       run_featurize, run_formant_stats, run_inspect)
from .warp import (PRESETS, SegmentMap, WarpFactors, WarpMap, apply_fep,
                   apply_warp, build_warp_map, detect_segments, draw_factors,
                   reconstruct_spectrum, single_segment_map)

__version__ = "0.1.0"

__all__ = [
    "AudioClip", "AudioFormatError", "Frame", "frame_signal", "load_audio",
    "pre_emphasize",
    "DegenerateFrameError", "Formant", "LpcModel", "SpectralEnvelope",
    "autocorrelate", "envelope", "fit_lpc", "formants_from_poles",
    "levinson_durbin", "residual_spectrum",
    "PRESETS", "SegmentMap", "WarpFactors", "WarpMap", "apply_fep",
    "apply_warp", "build_warp_map", "detect_segments", "draw_factors",
    "reconstruct_spectrum", "single_segment_map",
    "FeatureArchiveError", "FeatureMatrix", "MaskSpec", "MelFilterbank",
    "apply_filterbank", "build_mel_filterbank", "read_features",
    "spec_augment", "write_features",
    "AugmentConfig", "CorpusManifest", "run_augment", "run_featurize",
    "run_formant_stats", "run_inspect",
]
