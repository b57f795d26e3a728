"""Per-frame linear-prediction analysis.

Sign convention, used everywhere in this package: the inverse filter is

    A(z) = 1 - sum_{i=1..p} a[i] z^-i

so the predictor coefficients ``a`` solve the Toeplitz normal equations
R a = r[1..p] and the all-pole envelope is gain / |A(e^{jw})|.

The core recursions are written over a batch axis (frames x ...) because a
corpus run pushes hundreds of thousands of frames through them; the public
single-frame operations are thin wrappers over the same code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Frame

DEFAULT_LPC_ORDER = 18
DEFAULT_FFT_SIZE = 512
POLE_RADIUS_MIN = 0.7          # poles wider than this are not resonances
AUTOCORR_FLOOR = 1e-9          # white-noise floor added to r[0] before recursion
ENVELOPE_EPS = 1e-10


class DegenerateFrameError(Exception):
    """Frame cannot be LPC-modelled (silent, ill-conditioned, or roots diverge)."""


@dataclass(frozen=True)
class LpcModel:
    order: int
    coefficients: np.ndarray   # a[1..p], stored at indices 0..p-1
    gain: float
    prediction_error: float
    frame_index: int = -1


@dataclass(frozen=True)
class SpectralEnvelope:
    """All-pole envelope magnitude sampled on a uniform frequency grid."""

    magnitudes: np.ndarray
    bin_hz: float
    nyquist_hz: float

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(len(self.magnitudes)) * self.bin_hz


@dataclass(frozen=True)
class Formant:
    frequency_hz: float
    bandwidth_hz: float
    magnitude: float


def autocorrelate(frame: Frame | np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocorrelation r[k] = sum_n x[n] x[n+k] for k = 0..max_lag."""
    x = frame.samples if isinstance(frame, Frame) else np.asarray(frame, dtype=np.float64)
    if max_lag >= len(x):
        raise ValueError(f"max_lag {max_lag} must be < frame length {len(x)}")
    return _autocorr_batch(x[None, :], max_lag)[0]


def _autocorr_batch(frames: np.ndarray, max_lag: int) -> np.ndarray:
    n = frames.shape[1]
    r = np.empty((frames.shape[0], max_lag + 1))
    for k in range(max_lag + 1):
        r[:, k] = np.einsum("fn,fn->f", frames[:, :n - k], frames[:, k:])
    return r


def levinson_durbin(r: np.ndarray, order: int, frame_index: int = -1) -> LpcModel:
    """Solve the order-p Toeplitz normal equations by Levinson-Durbin recursion.

    Raises:
        DegenerateFrameError: r[0] <= 0 (silent frame) or the recursion error
            becomes non-positive (ill-conditioned frame).
    """
    r = np.asarray(r, dtype=np.float64)
    if order > len(r) - 1:
        raise ValueError(f"order {order} needs {order + 1} lags, got {len(r)}")
    if r[0] <= 0:
        raise DegenerateFrameError("silent frame: r[0] <= 0")
    coeffs, err, valid = _levinson_batch(r[None, :], order)
    if not valid[0]:
        raise DegenerateFrameError("ill-conditioned frame: recursion error <= 0")
    e = float(err[0])
    return LpcModel(order=order, coefficients=coeffs[0], gain=float(np.sqrt(e)),
                    prediction_error=e, frame_index=frame_index)


def _levinson_batch(r: np.ndarray, order: int):
    """Vectorised recursion over a batch of autocorrelation rows.

    Returns (coefficients (F, p), final error (F,), valid mask (F,)).
    Invalid rows (r[0] <= 0 or error underflow) carry zeros and must be
    treated as degenerate by the caller.
    """
    n_rows = r.shape[0]
    a = np.zeros((n_rows, order))
    err = r[:, 0].astype(np.float64).copy()
    valid = err > 0
    safe = np.where(valid, err, 1.0)
    for i in range(1, order + 1):
        acc = r[:, i].copy()
        if i > 1:
            acc -= np.einsum("fj,fj->f", a[:, :i - 1], r[:, i - 1:0:-1])
        k = np.where(valid, acc / safe, 0.0)
        if i > 1:
            a[:, :i - 1] = a[:, :i - 1] - k[:, None] * a[:, i - 2::-1]
        a[:, i - 1] = k
        err = err * (1.0 - k * k)
        valid &= err > 0
        safe = np.where(valid, err, 1.0)
    a[~valid] = 0.0
    err = np.where(valid, err, 0.0)
    return a, err, valid


def fit_lpc(frame: Frame, order: int = DEFAULT_LPC_ORDER) -> LpcModel:
    """Autocorrelation-method LPC fit of one windowed frame.

    Adds a 1e-9 relative white-noise floor to r[0] before the recursion so
    near-silent frames stay positive definite.
    """
    r = autocorrelate(frame, order)
    r = r.copy()
    r[0] += AUTOCORR_FLOOR * r[0]
    return levinson_durbin(r, order, frame_index=frame.frame_index)


def envelope(model: LpcModel, fft_size: int = DEFAULT_FFT_SIZE,
             sample_rate: int = 16000) -> SpectralEnvelope:
    """Sample gain / |A(e^{jw})| on the rfft grid of ``fft_size``."""
    if fft_size & (fft_size - 1) or fft_size < 2 * model.order:
        raise ValueError(f"fft_size must be a power of two >= 2*order, got {fft_size}")
    mags = _envelope_batch(model.coefficients[None, :],
                           np.array([model.gain]), fft_size)[0]
    return SpectralEnvelope(magnitudes=mags, bin_hz=sample_rate / fft_size,
                            nyquist_hz=sample_rate / 2.0)


def _envelope_batch(coeffs: np.ndarray, gain: np.ndarray, fft_size: int) -> np.ndarray:
    n_rows, order = coeffs.shape
    poly = np.zeros((n_rows, fft_size))
    poly[:, 0] = 1.0
    poly[:, 1:order + 1] = -coeffs
    denom = np.abs(np.fft.rfft(poly, axis=1))
    return gain[:, None] / np.maximum(denom, 1e-12)


def _residual_from_mag(mag: np.ndarray, env_mag: np.ndarray) -> np.ndarray:
    return mag / np.maximum(env_mag, ENVELOPE_EPS)


def residual_spectrum(frame: Frame, env: SpectralEnvelope, fft_size: int) -> np.ndarray:
    """Frame FFT magnitude divided by the envelope: the excitation spectrum."""
    if len(env.magnitudes) != fft_size // 2 + 1:
        raise ValueError("envelope bin count does not match fft_size")
    mag = np.abs(np.fft.rfft(frame.samples, fft_size))
    return _residual_from_mag(mag, env.magnitudes)


def formants_from_poles(model: LpcModel, sample_rate: int) -> list[Formant]:
    """Resonances of the all-pole model, from the roots of A(z).

    Conjugate-pair poles with positive imaginary part and radius above
    ``POLE_RADIUS_MIN`` map to formants:

        frequency = angle(root) * S / (2 pi)
        bandwidth = -ln|root| * S / pi

    Returned sorted ascending by frequency.  Raises DegenerateFrameError if
    the eigenvalue root finder fails to converge.
    """
    poly = np.concatenate(([1.0], -model.coefficients))
    try:
        roots = np.roots(poly)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFrameError(f"root finding failed: {exc}") from exc
    radius = np.abs(roots)
    sel = roots[(roots.imag > 0) & (radius > POLE_RADIUS_MIN)]
    if sel.size == 0:
        return []
    omega = np.angle(sel)
    freqs = omega * sample_rate / (2.0 * np.pi)
    bws = -np.log(np.abs(sel)) * sample_rate / np.pi
    # envelope value exactly at each formant frequency
    phases = np.exp(-1j * omega[:, None] * np.arange(1, model.order + 1))
    denom = np.abs(1.0 - phases @ model.coefficients)
    mags = model.gain / np.maximum(denom, 1e-12)
    order = np.argsort(freqs)
    return [Formant(frequency_hz=float(freqs[i]), bandwidth_hz=float(bws[i]),
                    magnitude=float(mags[i])) for i in order]
