"""ABCD two-port algebra for the probe / SUT / probe cascade.

Impedances and ratios are plain Python ``complex`` values. Angles are in
degrees, normalised to (-180, 180].
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularProbeError

# |A_IIP| and |gamma| below these are treated as singular probes.
A_SINGULAR_TOL = 1e-12
GAMMA_SINGULAR_TOL = 1e-15


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def from_polar(magnitude: float, angle_deg: float) -> complex:
    """Rectangular value from magnitude and angle in degrees."""
    return cmath.rect(magnitude, math.radians(angle_deg))


def angle_deg(z: complex) -> float:
    ang = math.degrees(cmath.phase(z))
    # cmath.phase returns [-pi, pi]; fold -180 onto +180
    if ang <= -180.0:
        ang += 360.0
    return ang


def to_polar(z: complex) -> tuple[float, float]:
    """(magnitude, angle in degrees) of ``z``."""
    return abs(z), angle_deg(z)


def parallel(z1: complex, z2: complex) -> complex:
    return z1 * z2 / (z1 + z2)


@dataclass(frozen=True)
class TwoPortAbcd:
    """2x2 transmission matrix ``[[a, b], [c, d]]``.

    ``a`` and ``d`` are dimensionless, ``b`` is in ohms and ``c`` in siemens.
    Matrices compose with ``@`` (same as :func:`cascade`).
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = complex(getattr(self, name))
            if not _finite(value):
                raise ValueError(f"ABCD entry {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def identity(cls) -> "TwoPortAbcd":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> "TwoPortAbcd":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "TwoPortAbcd") -> "TwoPortAbcd":
        return cascade(self, other)


@dataclass(frozen=True)
class TerminationConfig:
    """Acquisition-channel terminations.

    ``z_c2`` loads the receiving probe and enters the extraction; ``z_c1`` is
    carried for completeness only.
    """

    z_c1: complex = 1e6
    z_c2: complex = 50.0

    def __post_init__(self):
        object.__setattr__(self, "z_c1", complex(self.z_c1))
        object.__setattr__(self, "z_c2", complex(self.z_c2))
        if not (_finite(self.z_c1) and _finite(self.z_c2)):
            raise ValueError("termination impedances must be finite")
        if abs(self.z_c2) == 0:
            raise ValueError("z_c2 must be non-zero")


def cascade(m1: TwoPortAbcd, m2: TwoPortAbcd) -> TwoPortAbcd:
    """Matrix product ``m1 . m2`` (m1 nearer the source)."""
    return TwoPortAbcd(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def series_impedance_abcd(z: complex) -> TwoPortAbcd:
    return TwoPortAbcd(1.0, z, 0.0, 1.0)


def shunt_admittance_abcd(y: complex) -> TwoPortAbcd:
    return TwoPortAbcd(1.0, 0.0, y, 1.0)


def _rip_terms(rip: TwoPortAbcd, term: TerminationConfig) -> tuple[complex, complex]:
    # RIP driven into z_c2: [V; I] = V2 * [alpha; gamma]
    alpha = rip.a + rip.b / term.z_c2
    gamma = rip.c + rip.d / term.z_c2
    return alpha, gamma


def forward_ratio(
    iip: TwoPortAbcd,
    z_total: complex,
    rip: TwoPortAbcd,
    term: TerminationConfig = TerminationConfig(),
) -> complex:
    """V1/V2 produced by a series impedance ``z_total`` between the probes."""
    alpha, gamma = _rip_terms(rip, term)
    if abs(gamma) < GAMMA_SINGULAR_TOL:
        raise SingularProbeError(f"receiving probe gamma is ~0 ({gamma})")
    return iip.a * (alpha + z_total * gamma) + iip.b * gamma


def extraction_coefficients(
    iip: TwoPortAbcd, rip: TwoPortAbcd, term: TerminationConfig = TerminationConfig()
) -> tuple[complex, complex]:
    """Gain ``k`` and offset ``b`` such that ``Z = k * V1/V2 + b``."""
    alpha, gamma = _rip_terms(rip, term)
    if abs(iip.a) < A_SINGULAR_TOL:
        raise SingularProbeError(f"injecting probe A entry is ~0 ({iip.a})")
    if abs(gamma) < GAMMA_SINGULAR_TOL:
        raise SingularProbeError(f"receiving probe gamma is ~0 ({gamma})")
    k = 1.0 / (iip.a * gamma)
    b = -alpha / gamma - iip.b / iip.a
    return k, b


def extract_impedance_direct(
    ratio: complex,
    iip: TwoPortAbcd,
    rip: TwoPortAbcd,
    term: TerminationConfig = TerminationConfig(),
) -> complex:
    """Uncalibrated extraction from pre-characterized probe matrices.

    Does not assume reciprocal probes.
    """
    alpha, gamma = _rip_terms(rip, term)
    if abs(iip.a) < A_SINGULAR_TOL:
        raise SingularProbeError(f"injecting probe A entry is ~0 ({iip.a})")
    if abs(gamma) < GAMMA_SINGULAR_TOL:
        raise SingularProbeError(f"receiving probe gamma is ~0 ({gamma})")
    return ratio / (iip.a * gamma) - alpha / gamma - iip.b / iip.a
