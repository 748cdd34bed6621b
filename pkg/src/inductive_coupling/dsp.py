"""Tone extraction from sampled channel records.

The complex amplitude at the injection frequency is read with a Goertzel
filter over the longest whole-period prefix of the record. Short records
(fewer than five whole periods) fall back to a Hann window, which trades a
bounded scalloping error (about 0.2%) for leakage suppression.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import DeadChannelError, EmptyCandidatesError, FrequencyRangeError

MIN_WHOLE_PERIODS = 5
NOISE_PROBE_BINS = 32
NOISE_PROBE_OFFSET = 4  # nearest probe bin, in bins from the tone
DEAD_CHANNEL_FACTOR = 10.0


@dataclass(frozen=True, eq=False)
class Waveform:
    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.size < 16:
            raise ValueError(f"need at least 16 samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or Inf")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    def scaled(self, factor: float) -> "Waveform":
        return Waveform(self.sample_rate, self.samples * factor)


@dataclass(frozen=True)
class ToneEstimate:
    frequency: float
    phasor: complex
    snr_db: float
    noise_floor: float  # rms phasor magnitude of the probe bins


def _check_frequency(w: Waveform, f: float):
    if not (0 < f < w.sample_rate / 2):
        raise FrequencyRangeError(
            f"frequency {f} Hz outside (0, {w.sample_rate / 2}) Hz"
        )


def analysis_window(w: Waveform, f: float) -> tuple[int, bool]:
    """(number of samples analysed, whether a Hann window is applied)."""
    periods = math.floor(len(w) * f / w.sample_rate + 1e-9)
    if periods >= MIN_WHOLE_PERIODS:
        n = min(len(w), round(periods * w.sample_rate / f))
        return n, False
    return len(w), True


def goertzel(x: np.ndarray, omega: float) -> complex:
    """DFT of ``x`` at normalised angular frequency ``omega`` (rad/sample).

    Returns sum_n x[n] exp(-1j*omega*n); ``omega`` need not fall on a bin.
    """
    n = x.size
    coeff = 2.0 * math.cos(omega)
    s = lfilter([1.0], [1.0, -coeff, 1.0], x)
    s1 = s[-1]
    s2 = s[-2] if n > 1 else 0.0
    y = s1 - np.exp(-1j * omega) * s2
    return complex(y * np.exp(-1j * omega * (n - 1)))


def _noise_floor(x: np.ndarray, k_tone: float) -> float:
    """Median probe-bin power (in phasor units squared) around the tone."""
    n = x.size
    spectrum = np.fft.rfft(x)
    k0 = int(round(k_tone))
    nbins = spectrum.size
    offsets = []
    m = NOISE_PROBE_OFFSET
    # alternate sides until enough bins are collected or both sides run out
    while len(offsets) < NOISE_PROBE_BINS and (k0 - m >= 1 or k0 + m < nbins - 1):
        for k in (k0 - m, k0 + m):
            if 1 <= k < nbins - 1 and len(offsets) < NOISE_PROBE_BINS:
                offsets.append(k)
        m += 1
    if not offsets:
        return 0.0
    power = np.abs(2.0 * spectrum[offsets] / n) ** 2
    return float(np.median(power))


def goertzel_single_bin(w: Waveform, f: float) -> ToneEstimate:
    """Complex amplitude of the ``f`` component of ``w``.

    A pure ``A*cos(2*pi*f*t + phi)`` gives ``phasor == A*exp(1j*phi)`` with
    ``t = n / sample_rate``. ``snr_db`` compares the tone power to the median
    power of nearby DFT bins.
    """
    _check_frequency(w, f)
    n, hann = analysis_window(w, f)
    x = w.samples[:n]
    omega = 2.0 * math.pi * f / w.sample_rate
    if hann:
        win = np.hanning(n)
        xw = x * win
        phasor = 2.0 * goertzel(xw, omega) / win.sum()
        noise = _noise_floor(xw, n * f / w.sample_rate) * (n / win.sum()) ** 2
    else:
        phasor = 2.0 * goertzel(x, omega) / n
        noise = _noise_floor(x, n * f / w.sample_rate)
    sig = abs(phasor) ** 2
    if noise > 0:
        snr_db = 10.0 * math.log10(sig / noise) if sig > 0 else -math.inf
    else:
        snr_db = math.inf if sig > 0 else -math.inf
    return ToneEstimate(f, phasor, snr_db, math.sqrt(noise))


def complex_ratio(w1: Waveform, w2: Waveform, f: float) -> complex:
    """V1/V2 at ``f`` from simultaneously sampled channel records."""
    if w1.sample_rate != w2.sample_rate:
        raise ValueError("channels must share a sample rate")
    if len(w1) != len(w2):
        raise ValueError("channels must have the same length")
    t1 = goertzel_single_bin(w1, f)
    t2 = goertzel_single_bin(w2, f)
    if abs(t2.phasor) == 0 or abs(t2.phasor) < DEAD_CHANNEL_FACTOR * t2.noise_floor:
        raise DeadChannelError(
            f"channel 2 tone {abs(t2.phasor):.3g} V is below "
            f"{DEAD_CHANNEL_FACTOR:g}x its noise floor {t2.noise_floor:.3g} V"
        )
    return t1.phasor / t2.phasor


def scan_injection_frequency(background: Waveform, candidates: Sequence[float]) -> float:
    """Candidate with the least background power; ties go to the lowest."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyCandidatesError("no candidate frequencies given")
    powers = [abs(goertzel_single_bin(background, f).phasor) ** 2 for f in candidates]
    best = min(powers)
    # treat powers within rounding of the minimum as tied
    tol = best * 1e-9 + 1e-30
    return min(f for f, p in zip(candidates, powers) if p <= best + tol)
