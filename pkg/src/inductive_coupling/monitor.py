"""Baseline comparison and stator-fault classification."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Sequence

from .errors import ZeroBaselineError

# Benign conditions (speed, load, rotor/bearing damage) stay at or below 1.24%;
# the shorted-turn reading sits at 4.237%.
DEFAULT_THRESHOLD_PCT = 2.5


class Classification(str, enum.Enum):
    HEALTHY = "HEALTHY"
    STATOR_FAULT_SUSPECTED = "STATOR_FAULT_SUSPECTED"


@dataclass(frozen=True)
class BaselineRecord:
    impedance: complex
    f_sig: float
    label: str = "healthy"
    captured_at: Optional[datetime] = None

    def __post_init__(self):
        object.__setattr__(self, "impedance", complex(self.impedance))
        if abs(self.impedance) == 0:
            raise ZeroBaselineError("baseline impedance must be non-zero")
        if not self.f_sig > 0:
            raise ValueError("f_sig must be positive")


@dataclass(frozen=True)
class OperatingPoint:
    rpm: Optional[float] = None
    vfd_frequency: Optional[float] = None
    load_label: Optional[str] = None

    def __post_init__(self):
        if self.rpm is not None and self.rpm < 0:
            raise ValueError("rpm must be >= 0")
        if self.vfd_frequency is not None and not self.vfd_frequency > 0:
            raise ValueError("vfd_frequency must be > 0")


@dataclass(frozen=True)
class FaultVerdict:
    relative_change_pct: float
    threshold_pct: float
    classification: Classification
    baseline: BaselineRecord
    measured: complex
    complex_change_pct: float  # diagnostic: |Zb - Zm| / |Zb|

    @property
    def is_fault(self) -> bool:
        return self.classification is Classification.STATOR_FAULT_SUSPECTED


class SweepError(ValueError):
    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"entry {index}: {cause}")


def relative_change(baseline: complex, measured: complex) -> float:
    """Percent change in impedance magnitude against the baseline.

    Magnitudes are compared, not the complex difference: the published
    stator-fault figure (4.237%) is |7036 - 6750| / 6750.
    """
    mb = abs(baseline)
    if mb == 0:
        raise ZeroBaselineError("baseline impedance must be non-zero")
    return abs(mb - abs(measured)) / mb * 100.0


def complex_relative_change(baseline: complex, measured: complex) -> float:
    mb = abs(baseline)
    if mb == 0:
        raise ZeroBaselineError("baseline impedance must be non-zero")
    return abs(baseline - measured) / mb * 100.0


def classify(
    baseline: BaselineRecord, measured: complex, threshold_pct: float = DEFAULT_THRESHOLD_PCT
) -> FaultVerdict:
    if not threshold_pct > 0:
        raise ValueError("threshold_pct must be positive")
    measured = complex(measured)
    change = relative_change(baseline.impedance, measured)
    label = (
        Classification.STATOR_FAULT_SUSPECTED if change > threshold_pct else Classification.HEALTHY
    )
    return FaultVerdict(
        change,
        threshold_pct,
        label,
        baseline,
        measured,
        complex_relative_change(baseline.impedance, measured),
    )


def sweep_report(
    baseline: BaselineRecord,
    series: Sequence[tuple[OperatingPoint, complex]],
    threshold_pct: float = DEFAULT_THRESHOLD_PCT,
) -> list[FaultVerdict]:
    if not series:
        raise ValueError("measurement series is empty")
    verdicts = []
    for i, (_, z) in enumerate(series):
        try:
            verdicts.append(classify(baseline, z, threshold_pct))
        except ValueError as exc:
            raise SweepError(i, exc) from exc
    return verdicts
