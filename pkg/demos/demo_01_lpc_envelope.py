"""Walk through the LPC front end on a synthetic vowel.

Synthesizes a three-resonator vowel, frames it, fits an 18th-order LPC
model to one frame, and prints the formants the pole analysis finds next
to the resonator frequencies the vowel was built from.  Saves an
envelope-vs-spectrum plot to demos/output/ if matplotlib is importable.

Run:  python demos/demo_01_lpc_envelope.py
"""

import os

import numpy as np

from spectroforge import (AudioClip, envelope, fit_lpc, formants_from_poles,
                          frame_signal, pre_emphasize, residual_spectrum)

SR = 16000
RESONANCES = [(730.0, 0.97), (1090.0, 0.97), (2440.0, 0.97)]


def synth_vowel(duration_s=0.5, seed=3):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(int(duration_s * SR))
    for freq, radius in RESONANCES:
        theta = 2 * np.pi * freq / SR
        b1, b2 = 2 * radius * np.cos(theta), -radius * radius
        out = np.zeros_like(y)
        for n in range(len(y)):
            out[n] = y[n]
            if n >= 1:
                out[n] += b1 * out[n - 1]
            if n >= 2:
                out[n] += b2 * out[n - 2]
        y = out
    return y / np.abs(y).max() * 0.3


def main():
    clip = AudioClip(samples=synth_vowel(), sample_rate=SR, channel_count=1,
                     source_id="demo-vowel")
    clip = pre_emphasize(clip, 0.97)
    frames = frame_signal(clip, 25.0, 10.0, "hamming")
    frame = frames[20]
    print(f"framed {len(frames)} x {len(frame.samples)} samples")

    model = fit_lpc(frame, 18)
    print(f"LPC order {model.order}, gain {model.gain:.4f}, "
          f"prediction error {model.prediction_error:.6f}")

    env = envelope(model, 512, SR)
    residual = residual_spectrum(frame, env, 512)
    raw = np.abs(np.fft.rfft(frame.samples, 512))

    print("\nresonators used for synthesis vs formants found from poles:")
    formants = formants_from_poles(model, SR)
    narrow = [f for f in formants if f.bandwidth_hz < 400]
    for (target, _), found in zip(RESONANCES, narrow):
        print(f"  built {target:7.1f} Hz   found {found.frequency_hz:7.1f} Hz "
              f"(bandwidth {found.bandwidth_hz:5.1f} Hz)")

    flat = lambda m: float(np.exp(np.mean(np.log(m ** 2 + 1e-30))) / np.mean(m ** 2 + 1e-30))
    print(f"\nspectral flatness: raw {flat(raw):.4f} -> residual {flat(residual):.4f} "
          "(higher = whiter)")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping plot")
        return
    freqs = env.frequencies
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(freqs, 20 * np.log10(raw + 1e-12), lw=0.6, label="frame spectrum")
    ax.plot(freqs, 20 * np.log10(env.magnitudes + 1e-12), lw=2, label="LPC envelope")
    for f in narrow:
        ax.axvline(f.frequency_hz, color="k", ls=":", lw=0.8)
    ax.set(xlabel="frequency (Hz)", ylabel="magnitude (dB)",
           title="LPC envelope and pole-derived formants")
    ax.legend()
    os.makedirs(os.path.join(os.path.dirname(__file__), "output"), exist_ok=True)
    out = os.path.join(os.path.dirname(__file__), "output", "lpc_envelope.png")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    print(f"plot saved to {out}")


if __name__ == "__main__":
    main()
