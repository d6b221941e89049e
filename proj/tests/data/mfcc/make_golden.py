#!/usr/bin/env python3
# Copyright 2026 The ewer Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Regenerates the MFCC golden fixtures: three seeded 16 kHz PCM16 clips and
# the T x 13 cepstra computed here with numpy/scipy, independently of the C++
# front-end. Run from this directory: python3 make_golden.py
import wave

import numpy as np
from scipy.fft import dct

SR = 16000
FRAME = 400
SHIFT = 160
NFFT = 512
NFILT = 26
NCEP = 13


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def filterbank():
    mels = np.linspace(hz_to_mel(0.0), hz_to_mel(SR / 2), NFILT + 2)
    bins = np.floor((NFFT + 1) * mel_to_hz(mels) / SR).astype(int)
    bins = np.minimum(bins, NFFT // 2)
    fb = np.zeros((NFILT, NFFT // 2 + 1))
    for m in range(NFILT):
        lo, c, hi = bins[m], bins[m + 1], bins[m + 2]
        for k in range(lo, c):
            fb[m, k] = (k - lo) / (c - lo)
        for k in range(c, hi):
            fb[m, k] = (hi - k) / (hi - c)
        fb[m, c] = 1.0
    return fb


def mfcc(x):
    if len(x) < FRAME:
        n_frames = 1
    else:
        n_frames = (len(x) - FRAME) // SHIFT + 1
    padded = np.zeros(max(len(x), FRAME))
    padded[: len(x)] = x
    n = np.arange(FRAME)
    window = 0.54 - 0.46 * np.cos(2 * np.pi * n / (FRAME - 1))
    fb = filterbank()
    out = np.zeros((n_frames, NCEP))
    for t in range(n_frames):
        frame = padded[t * SHIFT: t * SHIFT + FRAME] * window
        power = np.abs(np.fft.rfft(frame, NFFT)) ** 2
        energies = np.log(np.maximum(fb @ power, 1e-10))
        out[t] = dct(energies, type=2, norm="ortho")[:NCEP]
    return out


def write_wav(path, pcm16):
    with wave.open(path, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(SR)
        w.writeframes(pcm16.astype("<i2").tobytes())


def to_pcm16(x):
    return np.clip(np.rint(x * 32768.0), -32768, 32767).astype(np.int16)


def main():
    rng = np.random.default_rng(20240521)
    t1 = np.arange(8000) / SR
    clips = {
        # Half a second of white noise.
        "noise": 0.1 * rng.standard_normal(8000),
        # One second of a 1 kHz tone over weak noise.
        "tone1k": 0.3 * np.sin(2 * np.pi * 1000.0 * np.arange(SR) / SR)
        + 0.01 * rng.standard_normal(SR),
        # Rising chirp, cut short enough to exercise the final-frame rule.
        "chirp": 0.25 * np.sin(2 * np.pi * (200.0 * t1 + 3000.0 * t1 ** 2))[:5123],
    }
    for name, x in clips.items():
        pcm = to_pcm16(x)
        write_wav(f"{name}.wav", pcm)
        m = mfcc(pcm.astype(np.float64) / 32768.0)
        np.savetxt(f"{name}.csv", m, delimiter=",", fmt="%.10e")
        print(name, m.shape)


if __name__ == "__main__":
    main()
