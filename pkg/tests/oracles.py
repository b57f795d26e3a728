"""Independent reference implementations and synthesis used as test oracles.

Nothing here imports the package's own DSP: WAV bytes are packed by hand,
autocorrelation and pre-emphasis are literal loops, the Toeplitz system is
solved densely, and vowels are synthesized by direct-form resonator
recursions.  Tests compare production code against these.
"""

import struct

import numpy as np
import scipy.signal


def wav_bytes(samples, sample_rate=16000, fmt="pcm16", channels=1,
              extra_chunk=None, data_override=None):
    """Pack a WAV file byte string; ``samples`` is (n,) or (n, channels)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1 and channels > 1:
        x = np.tile(x[:, None], (1, channels))
    interleaved = x.reshape(-1)
    if fmt == "pcm16":
        payload = np.clip(np.round(interleaved * 32768.0), -32768, 32767) \
            .astype("<i2").tobytes()
        audio_format, bits = 1, 16
    elif fmt == "float32":
        payload = interleaved.astype("<f4").tobytes()
        audio_format, bits = 3, 32
    else:
        raise ValueError(fmt)
    if data_override is not None:
        payload = data_override
    block = channels * bits // 8
    fmt_chunk = b"fmt " + struct.pack("<IHHIIHH", 16, audio_format, channels,
                                      sample_rate, sample_rate * block, block, bits)
    chunks = fmt_chunk
    if extra_chunk is not None:
        chunks += extra_chunk
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) % 2:
        chunks += b"\x00"
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def write_wav(path, samples, sample_rate=16000, **kw):
    with open(path, "wb") as fh:
        fh.write(wav_bytes(samples, sample_rate, **kw))


def pcm16_raw_bytes(int_samples):
    """Payload from raw int16 values, bypassing float scaling."""
    return np.asarray(int_samples, dtype="<i2").tobytes()


def resonator_coeffs(freq_hz, radius, sample_rate):
    """Denominator [1, -b1, -b2] of one two-pole resonance."""
    theta = 2.0 * np.pi * freq_hz / sample_rate
    return 2.0 * radius * np.cos(theta), -radius * radius


def synth_vowel(resonances, sample_rate=16000, duration_s=0.5, radius=0.97,
                excitation="noise", f0_hz=110.0, seed=0, level=0.3):
    """Drive a cascade of two-pole resonators with noise or an impulse train."""
    n = int(duration_s * sample_rate)
    if excitation == "noise":
        x = np.random.default_rng(seed).standard_normal(n)
    elif excitation == "impulse":
        x = np.zeros(n)
        x[::int(round(sample_rate / f0_hz))] = 1.0
    else:
        raise ValueError(excitation)
    radii = [radius] * len(resonances) if np.isscalar(radius) else radius
    y = x
    for freq, rad in zip(resonances, radii):
        b1, b2 = resonator_coeffs(freq, rad, sample_rate)
        out = np.zeros(n)
        for i in range(n):
            out[i] = y[i]
            if i >= 1:
                out[i] += b1 * out[i - 1]
            if i >= 2:
                out[i] += b2 * out[i - 2]
        y = out
    return y / np.abs(y).max() * level


def cascade_impulse_response(resonances, sample_rate=16000, radius=0.97, n=4000):
    """Exact impulse response of the resonator cascade (decayed by n)."""
    x = np.zeros(n)
    x[0] = 1.0
    return synth_vowel_from_excitation(x, resonances, radius, sample_rate)


def synth_vowel_from_excitation(x, resonances, radius, sample_rate):
    radii = [radius] * len(resonances) if np.isscalar(radius) else radius
    y = np.asarray(x, dtype=np.float64)
    for freq, rad in zip(resonances, radii):
        b1, b2 = resonator_coeffs(freq, rad, sample_rate)
        out = np.zeros(len(y))
        for i in range(len(y)):
            out[i] = y[i]
            if i >= 1:
                out[i] += b1 * out[i - 1]
            if i >= 2:
                out[i] += b2 * out[i - 2]
        y = out
    return y


def synth_vowel_fast(resonances, sample_rate=16000, duration_s=0.5, radius=0.97,
                     seed=0, level=0.3):
    """lfilter-based variant of synth_vowel for building large corpora."""
    n = int(duration_s * sample_rate)
    y = np.random.default_rng(seed).standard_normal(n)
    radii = [radius] * len(resonances) if np.isscalar(radius) else radius
    for freq, rad in zip(resonances, radii):
        b1, b2 = resonator_coeffs(freq, rad, sample_rate)
        y = scipy.signal.lfilter([1.0], [1.0, -b1, -b2], y)
    return y / np.abs(y).max() * level


def autocorr_naive(x, max_lag):
    x = np.asarray(x, dtype=np.float64)
    return np.array([sum(x[n] * x[n + k] for n in range(len(x) - k))
                     for k in range(max_lag + 1)])


def preemph_naive(x, coeff):
    y = [x[0]]
    for n in range(1, len(x)):
        y.append(x[n] - coeff * x[n - 1])
    return np.array(y)


def toeplitz_solve(r, order):
    """Dense solve of the normal equations R a = r[1..p]; no recursion."""
    r = np.asarray(r, dtype=np.float64)
    R = np.empty((order, order))
    for i in range(order):
        for j in range(order):
            R[i, j] = r[abs(i - j)]
    return np.linalg.solve(R, r[1:order + 1])


def random_autocorr(rng, order, n_samples=256):
    """Positive-definite autocorrelation of a random AR-colored signal."""
    x = rng.standard_normal(n_samples)
    # color it a little so the system is not trivially white
    pole = rng.uniform(-0.6, 0.6)
    for i in range(1, n_samples):
        x[i] += pole * x[i - 1]
    full = np.correlate(x, x, mode="full")
    r = full[n_samples - 1:n_samples + order]
    r[0] *= 1.0 + 1e-9  # keep strictly positive definite
    return r


def spectral_flatness(mag):
    power = np.asarray(mag, dtype=np.float64) ** 2 + 1e-30
    return np.exp(np.mean(np.log(power))) / np.mean(power)


def filterbank_naive(spectrum, weights):
    """Double-loop log mel energies."""
    n_filters, n_bins = weights.shape
    out = np.empty(n_filters)
    for i in range(n_filters):
        acc = 0.0
        for k in range(n_bins):
            acc += weights[i, k] * spectrum[k] ** 2
        out[i] = np.log(max(acc, 1e-10))
    return out
