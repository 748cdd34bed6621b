"""Open/short/load calibration of the probe pair.

With the probe-to-probe coupling modelled as an impedance ``z_ppc`` in
parallel with the SUT, every measured ratio satisfies

    Z || z_ppc = k * ratio + b

so three standards (open, short, known load) fix ``k``, ``b`` and ``z_ppc``.
When the open standard is unavailable the coupling is assumed negligible and
the short/load pair alone fixes ``k`` and ``b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateCalibrationError, OpenIndistinguishableError, ResonanceError

EPS_CAL_REL = 1e-9
# relative floor below which z_total + z_ppc counts as an exact cancellation
PPC_RESONANCE_REL = 1e-12


def eps_cal(r1: complex, r2: complex) -> float:
    """Two ratios closer than this are indistinguishable: 1e-9 of the larger one."""
    return EPS_CAL_REL * max(abs(r1), abs(r2))


def _check_finite(name, z):
    if not (abs(z.real) < float("inf") and abs(z.imag) < float("inf")):
        raise ValueError(f"{name} must be finite, got {z}")


@dataclass(frozen=True)
class CalibrationSet:
    """Ratios measured on the calibration jig at one injection frequency."""

    f_sig: float
    r_short: complex
    r_load: complex
    r_open: Optional[complex] = None
    z_load: complex = 50.0

    def __post_init__(self):
        if not self.f_sig > 0:
            raise ValueError(f"f_sig must be positive, got {self.f_sig}")
        for name in ("r_short", "r_load", "r_open", "z_load"):
            value = getattr(self, name)
            if value is None:
                continue
            value = complex(value)
            _check_finite(name, value)
            object.__setattr__(self, name, value)
        if self.z_load == 0:
            raise ValueError("z_load must be non-zero")
        pairs = [("load", "short", self.r_load, self.r_short)]
        if self.r_open is not None:
            pairs += [
                ("open", "short", self.r_open, self.r_short),
                ("open", "load", self.r_open, self.r_load),
            ]
        for n1, n2, r1, r2 in pairs:
            eps = eps_cal(r1, r2)
            if abs(r1 - r2) <= eps:
                raise DegenerateCalibrationError(
                    f"{n1} and {n2} ratios differ by {abs(r1 - r2):.3g} <= {eps:.3g}"
                )

    @property
    def has_open(self) -> bool:
        return self.r_open is not None



@dataclass(frozen=True)
class CalibrationCoefficients:
    k: complex
    b: complex
    z_ppc: Optional[complex] = None

    def apply(self, ratio: complex) -> complex:
        """``k * ratio + b``: the SUT in parallel with the coupling path."""
        return self.k * ratio + self.b


def solve_osl(cal: CalibrationSet) -> CalibrationCoefficients:
    if cal.r_open is None:
        raise DegenerateCalibrationError("open-standard ratio required for OSL")
    ro, rs, rl, zl = cal.r_open, cal.r_short, cal.r_load, cal.z_load
    k = zl * (ro - rl) / ((ro - rs) * (rl - rs))
    b = -k * rs
    z_ppc = zl * (ro - rl) / (rl - rs)
    return CalibrationCoefficients(k, b, z_ppc)


def solve_two_point(cal: CalibrationSet) -> CalibrationCoefficients:
    """Gain and offset from the short and load standards only."""
    rs, rl = cal.r_short, cal.r_load
    k = cal.z_load / (rl - rs)
    return CalibrationCoefficients(k, -k * rs)


def extract_impedance_osl(ratio: complex, cal: CalibrationSet) -> complex:
    if cal.r_open is None:
        raise DegenerateCalibrationError("open-standard ratio required for OSL")
    ro, rs, rl, zl = cal.r_open, cal.r_short, cal.r_load, cal.z_load
    eps = eps_cal(ro, ratio)
    if abs(ro - ratio) <= eps:
        raise OpenIndistinguishableError(f"ratio {ratio} is within {eps:.3g} of the open standard")
    return zl * (ro - rl) * (ratio - rs) / ((rl - rs) * (ro - ratio))


def extract_impedance_two_point(ratio: complex, cal: CalibrationSet) -> complex:
    return cal.z_load * (ratio - cal.r_short) / (cal.r_load - cal.r_short)


def extract_impedance(ratio: complex, cal: CalibrationSet) -> complex:
    """OSL extraction when the open standard was measured, two-point otherwise."""
    if cal.has_open:
        return extract_impedance_osl(ratio, cal)
    return extract_impedance_two_point(ratio, cal)


def ppc_error(z_total: complex, z_ppc: complex) -> complex:
    """Relative error of an uncorrected reading caused by the coupling path."""
    s = z_total + z_ppc
    if abs(s) <= PPC_RESONANCE_REL * max(abs(z_total), abs(z_ppc)) or s == 0:
        raise ResonanceError(f"z_total + z_ppc cancels ({s})")
    return -z_total / s
