"""In-circuit impedance extraction by inductive coupling, with a forward
simulator of the measurement chain and a stator-fault monitor."""

from .calibration import (
    CalibrationCoefficients,
    CalibrationSet,
    extract_impedance,
    extract_impedance_osl,
    extract_impedance_two_point,
    ppc_error,
    solve_osl,
    solve_two_point,
)
from .dsp import ToneEstimate, Waveform, complex_ratio, goertzel_single_bin, scan_injection_frequency
from .monitor import (
    BaselineRecord,
    Classification,
    FaultVerdict,
    OperatingPoint,
    classify,
    relative_change,
    sweep_report,
)
from .twoport import (
    TerminationConfig,
    TwoPortAbcd,
    cascade,
    extract_impedance_direct,
    forward_ratio,
    from_polar,
    series_impedance_abcd,
    to_polar,
)

__version__ = "0.1.0"
