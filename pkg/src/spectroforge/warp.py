"""Segmental spectrum warping and per-segment energy scaling.

The transform chain that turns an adult-like spectral envelope into a
children-like one:

1. ``detect_segments`` splits the envelope at its valleys (local minima of
   the log envelope) into at most four frequency segments.
2. ``draw_factors`` draws one warp factor per segment (and optionally one
   energy factor per segment) from a named preset's ranges.
3. ``build_warp_map`` realises the piecewise frequency mapping: inside
   segment k the map has slope 1/alpha_k (alpha < 1 pushes content up in
   frequency, where children's formants sit), segments chain continuously,
   and the band above the last segment is compressed linearly so that
   Nyquist maps to Nyquist.
4. ``apply_warp`` resamples the envelope through the map and ``apply_fep``
   scales each warped segment's magnitude by its energy factor.
5. ``reconstruct_spectrum`` multiplies the modified envelope back onto the
   excitation residual.

All randomness is owned by the caller via explicit seeds; the same
(preset, seed) pair always yields the same factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lpc import SpectralEnvelope
from .rng import SplitMix64

MAX_SEGMENTS = 4
VALLEY_PROMINENCE_DB = 1.0     # minima shallower than this are noise
F_HI_FRACTION = 0.9            # upper segment edge when too few valleys exist
VTLP_F_HI_FRACTION = 0.8       # fixed upper edge of the single-segment baseline map
NYQUIST_GUARD = 0.95           # rescale target if cumulative warping overshoots
BETA_RANGE = (0.7, 1.3)


@dataclass(frozen=True)
class PresetSpec:
    """Factor ranges and routing for one augmentation preset."""

    alpha_ranges: tuple[tuple[float, float], ...]
    shared_alpha: bool     # one draw replicated across segments
    fep: bool              # draw per-segment energy factors
    uses_lpc: bool         # False: warp the raw FFT magnitude directly


PRESETS: dict[str, PresetSpec] = {
    "vtlp": PresetSpec(((0.9, 1.1),) * 4, shared_alpha=True, fep=False, uses_lpc=False),
    "lpc-wp": PresetSpec(((0.9, 1.1),) * 4, shared_alpha=True, fep=False, uses_lpc=True),
    "lpc-swp-exp1": PresetSpec(((0.9, 1.1),) * 4, shared_alpha=False, fep=False, uses_lpc=True),
    "lpc-swp-exp2": PresetSpec(((0.75, 1.0),) * 4, shared_alpha=False, fep=False, uses_lpc=True),
    "lpc-swp-exp3": PresetSpec(((0.6, 0.85), (0.7, 0.85), (0.75, 0.95), (0.85, 1.0)),
                               shared_alpha=False, fep=False, uses_lpc=True),
    "fep": PresetSpec(((1.0, 1.0),) * 4, shared_alpha=True, fep=True, uses_lpc=True),
    "lpc-swp-exp3+fep": PresetSpec(((0.6, 0.85), (0.7, 0.85), (0.75, 0.95), (0.85, 1.0)),
                                   shared_alpha=False, fep=True, uses_lpc=True),
    # all factors pinned to 1: verification preset, the chain must be a no-op
    "identity": PresetSpec(((1.0, 1.0),) * 4, shared_alpha=True, fep=False, uses_lpc=True),
}


@dataclass(frozen=True)
class SegmentMap:
    """Frequency segments of one envelope, bounded by its valleys.

    ``boundaries_hz`` is b0=0 < b1 < ... < bK with the interior boundaries
    at detected valleys and bK the upper edge of the last segment; bin f
    belongs to segment k when b(k-1) <= f < b(k).
    """

    valleys_hz: np.ndarray
    boundaries_hz: np.ndarray
    segment_count: int
    f_hi_hz: float


@dataclass(frozen=True)
class WarpFactors:
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    preset_name: str
    rng_seed: int


@dataclass(frozen=True)
class WarpMap:
    """Monotone piecewise-linear bijection of [0, nyquist]."""

    source_hz: np.ndarray
    target_hz: np.ndarray
    nyquist_hz: float
    rescaled: bool = False     # cumulative targets overshot Nyquist and were pulled back

    @property
    def anchors(self) -> list[tuple[float, float]]:
        return list(zip(self.source_hz.tolist(), self.target_hz.tolist()))

    def forward(self, freq_hz):
        return np.interp(freq_hz, self.source_hz, self.target_hz)

    def inverse(self, freq_hz):
        return np.interp(freq_hz, self.target_hz, self.source_hz)


def _valley_prominences_db(log_env: np.ndarray, minima: np.ndarray) -> np.ndarray:
    """Depth of each local minimum below the lower of its two flanking rises.

    The window on each side extends to the nearest strictly lower point (or
    the edge); the rise is the window maximum minus the minimum's own level.
    """
    proms = np.empty(len(minima))
    for j, i in enumerate(minima):
        lower_left = np.flatnonzero(log_env[:i] < log_env[i])
        lo = lower_left[-1] + 1 if lower_left.size else 0
        left_rise = log_env[lo:i].max() - log_env[i]
        lower_right = np.flatnonzero(log_env[i + 1:] < log_env[i])
        hi = i + 1 + lower_right[0] if lower_right.size else len(log_env)
        right_rise = log_env[i + 1:hi].max() - log_env[i]
        proms[j] = min(left_rise, right_rise)
    return proms


def detect_segments(env: SpectralEnvelope, max_segments: int = MAX_SEGMENTS,
                    prominence_db: float = VALLEY_PROMINENCE_DB) -> SegmentMap:
    """Split an envelope into segments at its prominent valleys.

    The first max_segments-1 valleys become interior boundaries.  The upper
    edge of the last segment is the next valley when one exists, otherwise
    0.9 x Nyquist.  An envelope without usable valleys yields one segment.
    """
    log_env = 20.0 * np.log10(np.maximum(env.magnitudes, 1e-30))
    interior = log_env[1:-1]
    minima = np.flatnonzero((interior < log_env[:-2]) & (interior < log_env[2:])) + 1
    if minima.size:
        proms = _valley_prominences_db(log_env, minima)
        minima = minima[proms >= prominence_db]
    valleys_hz = minima * env.bin_hz

    cap = F_HI_FRACTION * env.nyquist_hz
    usable = valleys_hz[valleys_hz < cap]
    if len(usable) >= max_segments:
        interior_hz = usable[:max_segments - 1]
        f_hi = float(usable[max_segments - 1])
    else:
        interior_hz = usable
        f_hi = cap
    boundaries = np.concatenate(([0.0], interior_hz, [f_hi]))
    return SegmentMap(valleys_hz=valleys_hz, boundaries_hz=boundaries,
                      segment_count=len(boundaries) - 1, f_hi_hz=f_hi)


def single_segment_map(f_hi_hz: float) -> SegmentMap:
    """One segment spanning [0, f_hi]; used by the uniform-warp baselines."""
    return SegmentMap(valleys_hz=np.array([]),
                      boundaries_hz=np.array([0.0, f_hi_hz]),
                      segment_count=1, f_hi_hz=f_hi_hz)


def draw_factors(preset: str, seed: int) -> WarpFactors:
    """Draw per-segment warp and energy factors for a named preset.

    Draw order (documented for reproducibility): one uniform for a shared
    warp factor, else four, low segment first; then four energy factors if
    the preset perturbs energies.  Shared-alpha presets replicate the single
    draw across all four slots.
    """
    try:
        spec = PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown preset {preset!r}; "
                         f"expected one of {sorted(PRESETS)}") from None
    gen = SplitMix64(seed)
    if spec.shared_alpha:
        a = gen.uniform(*spec.alpha_ranges[0])
        alphas = (a,) * MAX_SEGMENTS
    else:
        alphas = tuple(gen.uniform(lo, hi) for lo, hi in spec.alpha_ranges)
    if spec.fep:
        betas = tuple(gen.uniform(*BETA_RANGE) for _ in range(MAX_SEGMENTS))
    else:
        betas = (1.0,) * MAX_SEGMENTS
    return WarpFactors(alphas=alphas, betas=betas, preset_name=preset, rng_seed=seed)


def _per_segment(values: tuple[float, ...], count: int) -> np.ndarray:
    """Truncate or extend (by repeating the last entry) to ``count`` factors."""
    if len(values) >= count:
        return np.asarray(values[:count], dtype=np.float64)
    return np.asarray(values + (values[-1],) * (count - len(values)), dtype=np.float64)


def build_warp_map(segmap: SegmentMap, factors: WarpFactors, nyquist_hz: float) -> WarpMap:
    """Chain per-segment warps into one continuous monotone frequency map.

    Anchor targets accumulate segment by segment with slope 1/alpha_k, so
    each warped segment starts where the previous one ended.  The band above
    the last segment edge is mapped linearly onto what is left up to
    Nyquist.  If the cumulative targets reach past Nyquist they are rescaled
    to 0.95 x Nyquist to keep the map a bijection.
    """
    b = segmap.boundaries_hz
    if b[-1] >= nyquist_hz:
        raise ValueError(f"segment edge {b[-1]} Hz must lie below Nyquist {nyquist_hz} Hz")
    alphas = _per_segment(factors.alphas, segmap.segment_count)
    targets = np.concatenate(([0.0], np.cumsum(np.diff(b) / alphas)))
    rescaled = False
    if targets[-1] >= nyquist_hz:
        targets *= NYQUIST_GUARD * nyquist_hz / targets[-1]
        rescaled = True
    source = np.concatenate((b, [nyquist_hz]))
    target = np.concatenate((targets, [nyquist_hz]))
    return WarpMap(source_hz=source, target_hz=target,
                   nyquist_hz=nyquist_hz, rescaled=rescaled)


def apply_warp(env: SpectralEnvelope, warp_map: WarpMap) -> SpectralEnvelope:
    """Resample an envelope through a frequency map, same grid in and out.

    Each output bin at frequency g takes the envelope's linearly
    interpolated value at the inverse-mapped frequency, so spectral content
    at f lands at forward(f).
    """
    if abs(warp_map.nyquist_hz - env.nyquist_hz) > 1e-6:
        raise ValueError("warp map and envelope disagree on Nyquist")
    grid = env.frequencies
    pulled = np.interp(warp_map.inverse(grid), grid, env.magnitudes)
    return SpectralEnvelope(magnitudes=pulled, bin_hz=env.bin_hz,
                            nyquist_hz=env.nyquist_hz)


def apply_fep(env: SpectralEnvelope, segmap: SegmentMap, warp_map: WarpMap,
              factors: WarpFactors) -> SpectralEnvelope:
    """Scale each warped segment's magnitude by its energy factor.

    Segment boundaries are carried through the warp map before bins are
    assigned, so factor k scales exactly the content that segment k warped
    into.  Bins above the last warped boundary share the last factor.
    """
    k = segmap.segment_count
    betas = _per_segment(factors.betas, k)
    warped_interior = warp_map.forward(segmap.boundaries_hz[1:k])
    idx = np.searchsorted(warped_interior, env.frequencies, side="right")
    return SpectralEnvelope(magnitudes=env.magnitudes * betas[idx],
                            bin_hz=env.bin_hz, nyquist_hz=env.nyquist_hz)


def reconstruct_spectrum(modified_env: SpectralEnvelope, residual: np.ndarray) -> np.ndarray:
    """Modified envelope times excitation residual: the new magnitude spectrum."""
    if len(residual) != len(modified_env.magnitudes):
        raise ValueError("envelope and residual bin counts differ")
    return modified_env.magnitudes * residual
