"""Forward model of the measurement chain.

SUT impedance models (RLC trees, a lumped stator-winding model with a
turn-to-turn fault knob, fixed/table-driven values), a distance-dependent
probe-to-probe coupling impedance, transformer-model probes and noisy
two-channel waveform synthesis.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .dsp import Waveform
from .errors import FrequencyRangeError, ResonanceError
from .twoport import (
    TerminationConfig,
    TwoPortAbcd,
    cascade,
    forward_ratio,
    from_polar,
    parallel,
    series_impedance_abcd,
    shunt_admittance_abcd,
)

F_SIG = 91.3e3
BASELINE_MAGNITUDE = 6750.0
BASELINE_ANGLE_DEG = -67.9
FAULT_MAGNITUDE = 7036.0


def _omega(f: float) -> float:
    if not f > 0:
        raise FrequencyRangeError(f"frequency must be positive, got {f}")
    return 2.0 * math.pi * f


# --------------------------------------------------------------------- RLC


@dataclass(frozen=True)
class R:
    ohms: float

    def __post_init__(self):
        if not self.ohms >= 0:
            raise ValueError(f"R must be >= 0, got {self.ohms}")


@dataclass(frozen=True)
class L:
    henries: float

    def __post_init__(self):
        if not self.henries >= 0:
            raise ValueError(f"L must be >= 0, got {self.henries}")


@dataclass(frozen=True)
class C:
    farads: float

    def __post_init__(self):
        if not self.farads > 0:
            raise ValueError(f"C must be > 0, got {self.farads}")


@dataclass(frozen=True)
class Series:
    parts: tuple

    def __init__(self, *parts):
        if not parts:
            raise ValueError("SERIES node needs at least one element")
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Parallel:
    parts: tuple

    def __init__(self, *parts):
        if not parts:
            raise ValueError("PARALLEL node needs at least one element")
        object.__setattr__(self, "parts", tuple(parts))


RlcNetwork = Union[R, L, C, Series, Parallel]


def impedance_of_rlc(net: RlcNetwork, f: float) -> complex:
    w = _omega(f)
    if isinstance(net, R):
        return complex(net.ohms)
    if isinstance(net, L):
        return 1j * w * net.henries
    if isinstance(net, C):
        return 1.0 / (1j * w * net.farads)
    if isinstance(net, Series):
        return sum((impedance_of_rlc(p, f) for p in net.parts), 0j)
    if isinstance(net, Parallel):
        z = impedance_of_rlc(net.parts[0], f)
        for p in net.parts[1:]:
            z2 = impedance_of_rlc(p, f)
            s = z + z2
            # sum is rounding noise: lossless branches resonate
            if abs(s) <= 1e-13 * max(abs(z), abs(z2)):
                raise ResonanceError(f"parallel branches cancel at {f} Hz")
            z = z * z2 / s
        return z
    raise TypeError(f"not an RLC network node: {net!r}")


def format_rlc(net: RlcNetwork) -> str:
    """Text form understood by :func:`parse_rlc`, e.g. ``series(R(50),L(0.001))``."""
    if isinstance(net, R):
        return f"R({net.ohms!r})"
    if isinstance(net, L):
        return f"L({net.henries!r})"
    if isinstance(net, C):
        return f"C({net.farads!r})"
    name = "series" if isinstance(net, Series) else "parallel"
    return f"{name}(" + ",".join(format_rlc(p) for p in net.parts) + ")"


def parse_rlc(text: str) -> RlcNetwork:
    src = "".join(text.split())
    pos = 0

    def node():
        nonlocal pos
        start = pos
        while pos < len(src) and src[pos].isalpha():
            pos += 1
        name = src[start:pos]
        if pos >= len(src) or src[pos] != "(":
            raise ValueError(f"expected '(' after {name!r} at column {pos}")
        pos += 1
        if name in ("R", "L", "C"):
            end = src.find(")", pos)
            if end < 0:
                raise ValueError("unterminated element")
            value = float(src[pos:end])
            pos = end + 1
            return {"R": R, "L": L, "C": C}[name](value)
        if name.lower() not in ("series", "parallel"):
            raise ValueError(f"unknown RLC node {name!r}")
        parts = [node()]
        while pos < len(src) and src[pos] == ",":
            pos += 1
            parts.append(node())
        if pos >= len(src) or src[pos] != ")":
            raise ValueError(f"expected ')' at column {pos}")
        pos += 1
        return Series(*parts) if name.lower() == "series" else Parallel(*parts)

    net = node()
    if pos != len(src):
        raise ValueError(f"trailing text after RLC expression: {src[pos:]!r}")
    return net


# Four representative validation networks; component values are illustrative.
RLC_FIXTURES = {
    "rl_series": Series(R(47.0), L(220e-6)),
    "rc_parallel": Parallel(R(10e3), C(470e-12)),
    "tank": Parallel(Series(R(5.0), L(1e-3)), C(2.2e-9)),
    "ladder": Series(R(100.0), Parallel(L(470e-6), Series(R(1e3), C(1e-9))), C(10e-9)),
}


# ------------------------------------------------------------------- motor


@dataclass(frozen=True)
class MotorWindingModel:
    """Lumped stator winding: ``(r_s + jw l_s (1-eta)^2) || (r_p + 1/(jw c_p))``.

    ``fault_fraction`` (eta) is the fraction of shorted turns; the winding
    inductance scales with the square of the remaining turns.
    """

    r_s: float
    l_s: float
    c_p: float
    r_p: float
    fault_fraction: float = 0.0

    def __post_init__(self):
        for name in ("r_s", "l_s", "c_p", "r_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.fault_fraction < 1.0:
            raise ValueError(f"fault_fraction must be in [0, 1), got {self.fault_fraction}")

    def with_fault(self, eta: float) -> "MotorWindingModel":
        return MotorWindingModel(self.r_s, self.l_s, self.c_p, self.r_p, eta)


def motor_impedance(m: MotorWindingModel, f: float) -> complex:
    w = _omega(f)
    winding = m.r_s + 1j * w * m.l_s * (1.0 - m.fault_fraction) ** 2
    parasitic = m.r_p + 1.0 / (1j * w * m.c_p)
    return parallel(winding, parasitic)


@dataclass(frozen=True)
class MotorFit:
    model: MotorWindingModel
    eta_star: float
    f_sig: float


def fit_motor_parameters(
    z_healthy: complex = from_polar(BASELINE_MAGNITUDE, BASELINE_ANGLE_DEG),
    fault_magnitude: float = FAULT_MAGNITUDE,
    f_sig: float = F_SIG,
    r_s: float = 10.0,
    r_p: float = 50.0,
) -> MotorFit:
    """Solve ``l_s`` and ``c_p`` so the healthy model hits ``z_healthy`` exactly,
    then the fault fraction whose magnitude equals ``fault_magnitude``."""
    w = _omega(f_sig)
    y_total = 1.0 / z_healthy

    def winding_resistance_error(x_c):
        y_winding = y_total - 1.0 / (r_p - 1j * x_c)
        return (1.0 / y_winding).real - r_s

    # bracket the capacitive reactance on a log grid, then refine
    grid = np.logspace(-1, 8, 4000)
    vals = np.array([winding_resistance_error(x) for x in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    for i in idx:
        x_c = brentq(winding_resistance_error, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15)
        x_l = (1.0 / (y_total - 1.0 / (r_p - 1j * x_c))).imag
        if x_l > 0:
            break
    else:
        raise ValueError("no passive winding model reproduces the target impedance")
    healthy = MotorWindingModel(r_s, x_l / w, 1.0 / (w * x_c), r_p)

    def magnitude_error(eta):
        return abs(motor_impedance(healthy.with_fault(eta), f_sig)) - fault_magnitude

    # |Z| rises monotonically with eta until the branches resonate
    etas = np.linspace(0.0, 0.999, 2000)
    mags = np.array([magnitude_error(e) for e in etas])
    j = np.nonzero(mags >= 0)[0]
    if mags[0] >= 0 or j.size == 0:
        raise ValueError("fault magnitude not reachable by shorting turns")
    eta_star = brentq(magnitude_error, etas[j[0] - 1], etas[j[0]], xtol=1e-15, rtol=1e-15)
    return MotorFit(healthy, eta_star, f_sig)


def load_motor_fit() -> MotorFit:
    """Fitted parameters committed in ``data/motor_fit.ini``."""
    text = resources.files(__package__).joinpath("data/motor_fit.ini").read_text("utf-8")
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    s = cp["motor_fit"]
    model = MotorWindingModel(
        float(s["r_s"]), float(s["l_s"]), float(s["c_p"]), float(s["r_p"])
    )
    return MotorFit(model, float(s["eta_star"]), float(s["f_sig_hz"]))


def motor_fit_text(fit: MotorFit) -> str:
    m = fit.model
    return (
        "# Lumped winding model fitted to the healthy reference impedance\n"
        "# (6750 ohm, -67.9 deg at 91.3 kHz) and the 7036 ohm faulted reading.\n"
        "# Regenerate with scripts/fit_motor.py.\n"
        "[motor_fit]\n"
        f"f_sig_hz = {fit.f_sig!r}\n"
        f"r_s = {m.r_s!r}\n"
        f"l_s = {m.l_s!r}\n"
        f"c_p = {m.c_p!r}\n"
        f"r_p = {m.r_p!r}\n"
        f"eta_star = {fit.eta_star!r}\n"
    )


# --------------------------------------------------------- table-driven SUT


@dataclass(frozen=True)
class FixedImpedance:
    """Frequency-independent SUT, e.g. a logged field measurement."""

    impedance: complex
    label: str = ""


@dataclass(frozen=True)
class TableImpedance:
    """Impedance known at discrete frequencies, linearly interpolated."""

    frequencies: tuple
    impedances: tuple

    def __post_init__(self):
        if len(self.frequencies) != len(self.impedances) or not self.frequencies:
            raise ValueError("table needs matching, non-empty columns")
        if any(b <= a for a, b in zip(self.frequencies, self.frequencies[1:])):
            raise ValueError("table frequencies must be strictly increasing")


def _table_rows():
    text = resources.files(__package__).joinpath("data/motor_tables.csv").read_text("utf-8")
    rows = []
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        table, label, mag, ang, rpm, vfd, load, reported = line.split(",")
        rows.append(
            dict(
                table=int(table),
                label=label,
                magnitude=float(mag),
                angle_deg=float(ang),
                rpm=float(rpm) if rpm else None,
                vfd_hz=float(vfd) if vfd else None,
                load=load or None,
                reported_pct=float(reported),
            )
        )
    return rows


def measured_motor_table() -> list[dict]:
    """The nine published motor readings (speed, load, rotor/bearing, stator)."""
    return _table_rows()


def measured_motor_suts() -> list[FixedImpedance]:
    return [
        FixedImpedance(from_polar(r["magnitude"], r["angle_deg"]), r["label"])
        for r in _table_rows()
    ]


SutModel = Union[RlcNetwork, MotorWindingModel, FixedImpedance, TableImpedance]


def sut_impedance(sut: SutModel, f: float) -> complex:
    if isinstance(sut, MotorWindingModel):
        return motor_impedance(sut, f)
    if isinstance(sut, FixedImpedance):
        return sut.impedance
    if isinstance(sut, TableImpedance):
        fs = sut.frequencies
        if not fs[0] <= f <= fs[-1]:
            raise FrequencyRangeError(f"{f} Hz outside table range [{fs[0]}, {fs[-1]}]")
        zs = np.asarray(sut.impedances, dtype=complex)
        return complex(np.interp(f, fs, zs.real) + 1j * np.interp(f, fs, zs.imag))
    return impedance_of_rlc(sut, f)


# -------------------------------------------------------------------- PPC


@dataclass(frozen=True)
class PpcModel:
    """Probe-to-probe coupling: ``r_p + jw m0 exp(-d/d0)``."""

    m0: float = 10e-6
    d: float = 0.1
    d0: float = 0.05
    r_p: float = 1.0

    def __post_init__(self):
        if not (self.m0 > 0 and self.d >= 0 and self.d0 > 0 and self.r_p >= 0):
            raise ValueError("need m0 > 0, d >= 0, d0 > 0, r_p >= 0")


def ppc_impedance(p: PpcModel, f: float) -> complex:
    return p.r_p + 1j * _omega(f) * p.m0 * math.exp(-p.d / p.d0)


# ------------------------------------------------------------ probes/ratio


def synthesize_probe_abcd(
    turns_ratio: float, magnetizing_l: float, leakage_l: float, winding_r: float, f: float
) -> TwoPortAbcd:
    """Transformer-model clamp probe: ideal n:1, shunt magnetizing branch, series loss."""
    if not (turns_ratio > 0 and magnetizing_l > 0):
        raise ValueError("turns_ratio and magnetizing_l must be positive")
    if leakage_l < 0 or winding_r < 0:
        raise ValueError("leakage_l and winding_r must be non-negative")
    w = _omega(f)
    ideal = TwoPortAbcd(turns_ratio, 0.0, 0.0, 1.0 / turns_ratio)
    magnetizing = shunt_admittance_abcd(1.0 / (1j * w * magnetizing_l))
    loss = series_impedance_abcd(winding_r + 1j * w * leakage_l)
    return cascade(cascade(ideal, magnetizing), loss)


def simulate_ratio(
    sut_z: complex,
    iip: TwoPortAbcd,
    rip: TwoPortAbcd,
    term: TerminationConfig = TerminationConfig(),
    ppc: Optional[complex] = None,
) -> complex:
    """V1/V2 seen by the acquisition card; ``ppc`` shunts the SUT when given."""
    z = sut_z
    if ppc is not None:
        s = sut_z + ppc
        if s == 0:
            raise ResonanceError("SUT and coupling impedance cancel")
        z = sut_z * ppc / s
    return forward_ratio(iip, z, rip, term)


def simulate_standards(
    iip: TwoPortAbcd,
    rip: TwoPortAbcd,
    term: TerminationConfig = TerminationConfig(),
    ppc: Optional[complex] = None,
    z_load: complex = 50.0,
) -> dict:
    """Ratios of the open/short/load jig. ``open`` is omitted without coupling,
    since the open ratio is then unbounded."""
    out = {
        "short": simulate_ratio(0.0, iip, rip, term, ppc),
        "load": simulate_ratio(z_load, iip, rip, term, ppc),
    }
    if ppc is not None:
        out["open"] = forward_ratio(iip, ppc, rip, term)
    return out


# -------------------------------------------------------------- waveforms


@dataclass(frozen=True)
class NoiseModel:
    """Additive channel noise, referred to a 1 V tone.

    Both channels receive noise scaled by their own tone amplitude so the
    signal-to-noise ratio is the same on C1 and C2.
    """

    white_noise_rms: float = 0.0
    # (frequency Hz, amplitude V, phase deg)
    interference_tones: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.white_noise_rms >= 0:
            raise ValueError("white_noise_rms must be >= 0")
        tones = tuple(tuple(float(v) for v in t) for t in self.interference_tones)
        for f, amp, _ in tones:
            if not f > 0:
                raise ValueError(f"interference frequency must be positive, got {f}")
        object.__setattr__(self, "interference_tones", tones)

    @classmethod
    def default(cls, vfd_hz: float = 20.0, mains_hz: float = 50.0) -> "NoiseModel":
        """1% white noise plus mains and drive tones with five harmonics each at 0.5%."""
        return cls(0.01, default_interference(vfd_hz, mains_hz))

    @classmethod
    def at_snr(cls, snr_db: float, interference_tones=()) -> "NoiseModel":
        """White noise giving ``snr_db`` against a 1 V-amplitude tone (0.5 V^2)."""
        return cls(math.sqrt(0.5 / 10 ** (snr_db / 10)), tuple(interference_tones))


def default_interference(vfd_hz: float = 20.0, mains_hz: float = 50.0, amplitude: float = 0.005):
    tones = []
    for base in (mains_hz, vfd_hz):
        for h in range(1, 6):
            # fixed, spread phases keep the default deterministic
            tones.append((base * h, amplitude, (37.0 * h + base) % 360.0))
    return tuple(tones)


def synthesize_waveforms(
    ratio: complex,
    f_sig: float = F_SIG,
    noise: NoiseModel = NoiseModel(),
    sample_rate: float = 2e6,
    duration: float = 0.01,
    seed: int = 0,
    amplitude: float = 1.0,
) -> tuple[Waveform, Waveform]:
    """(C1, C2) records: C2 carries the reference tone, C1 that tone times ``ratio``."""
    if not f_sig < sample_rate / 2:
        raise FrequencyRangeError(f"f_sig {f_sig} Hz violates Nyquist for {sample_rate} Hz")
    if duration * f_sig < 20 - 1e-9:
        raise ValueError("duration must cover at least 20 periods of f_sig")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    rng = np.random.default_rng(seed)

    def channel(phasor):
        scale = abs(phasor)
        x = scale * np.cos(2 * np.pi * f_sig * t + np.angle(phasor))
        for f, amp, ph in noise.interference_tones:
            x += scale * amp * np.cos(2 * np.pi * f * t + math.radians(ph))
        if noise.white_noise_rms > 0:
            x += scale * noise.white_noise_rms * rng.standard_normal(n)
        return Waveform(sample_rate, x)

    w2 = channel(complex(amplitude))
    w1 = channel(amplitude * complex(ratio))
    return w1, w2
