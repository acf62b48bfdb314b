"""
Mixing an event into a base clip
================================

Two synthetic signals, one gain derived from a target SNR, and a check that
the mix really lands at that SNR.
"""

import numpy as np

from acc_forge import AudioClip, MixParams, gain_for_snr, mix, resample, rms

# a half-second hum as the base, sampled at 16 kHz
sr = 16000
t = np.arange(sr // 2) / sr
base = AudioClip(sr, 0.3 * np.sin(2 * np.pi * 220 * t))

# a short chirp recorded at 22.05 kHz, brought to the base rate first
sr_ev = 22050
te = np.arange(int(0.1 * sr_ev)) / sr_ev
event = resample(AudioClip(sr_ev, np.sin(2 * np.pi * 1200 * te) * np.hanning(te.size)), sr)
print("event length after resampling:", len(event), "samples")

# gain so that rms(base) / rms(g * event) corresponds to 5 dB
snr = 5.0
g = gain_for_snr(base, event, snr)
out = mix(base, event, MixParams(offset_seconds=0.2, snr_db=snr, resolved_gain=g))

measured = 20 * np.log10(rms(base) / rms(AudioClip(sr, g * event.samples)))
print(f"gain {g:.4f}, requested {snr:.2f} dB, measured {measured:.6f} dB")

# the event only touches the window starting at the offset
start = int(0.2 * sr)
untouched = np.array_equal(out.samples[:start], base.samples[:start])
print("samples before the offset untouched:", untouched)
print("output length equals base length:", len(out) == len(base))
