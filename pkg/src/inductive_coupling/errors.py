"""Exception hierarchy. Everything derives from ``ValueError`` so callers can
catch broadly when they only care that the inputs were unusable."""


class InductiveCouplingError(ValueError):
    pass


class SingularProbeError(InductiveCouplingError):
    """Probe characterization cannot be inverted (A_IIP or gamma ~ 0)."""


class DegenerateCalibrationError(InductiveCouplingError):
    """Two calibration standards produced indistinguishable ratios."""


class OpenIndistinguishableError(InductiveCouplingError):
    """Measured ratio coincides with the open-standard ratio."""


class ResonanceError(InductiveCouplingError):
    """A parallel combination cancels to (numerically) zero."""


class FrequencyRangeError(InductiveCouplingError):
    pass


class DeadChannelError(InductiveCouplingError):
    """Reference channel tone is buried in the noise floor."""


class EmptyCandidatesError(InductiveCouplingError):
    pass


class ZeroBaselineError(InductiveCouplingError):
    pass


class ParseError(InductiveCouplingError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class OutOfBandError(InductiveCouplingError):
    """Requested frequency lies outside a probe characterization."""


class LockedError(InductiveCouplingError):
    """Another writer holds the session-document lock."""
