"""Exception hierarchy for the lab.

Every failure mode that a caller can provoke through bad inputs gets its
own class so tests and the CLI can react precisely.  Solver outcomes that
are *expected* in normal operation (iteration budget exhausted, line
search stall) are reported as result flags, not exceptions.
"""


class LabError(Exception):
    """Base class for all errors raised by this package."""


class DivergentIntegral(LabError):
    """The requested weighted integral is infinite (singular weight not
    integrable against the given profile near t = 0)."""


class InvalidSegment(LabError):
    """Affine segment endpoints are out of order or leave [0, 1]."""


class InvalidProfile(LabError):
    """Sawtooth jump list violates ordering / interior constraints."""


class UnclampedProfile(LabError):
    """Profile does not return to zero at t = 1 where the operation
    requires an admissible (clamped) profile."""


class InvalidConfig(LabError):
    """Configuration value out of range or inconsistent."""


class InvalidField(LabError):
    """Nodal field does not match its mesh or violates the zero
    boundary conditions."""


class InvalidSample(LabError):
    """Requested sample location(s) outside the open unit interval or
    not sorted."""


class InvalidMu(LabError):
    """Non-positive transition half-width."""


class MuTooLarge(LabError):
    """Transition half-width so large that neighbouring caps would
    overlap or spill over the domain boundary."""


class InvalidPeriod(LabError):
    """Non-positive period passed to the reference sawtooth."""


class BracketFailure(LabError):
    """Could not bracket a one-dimensional minimum after the allowed
    number of expansions."""


class WindowOutOfDomain(LabError):
    """Rescaled averaging window pokes out of (0, 1)."""


class TooFewOscillations(LabError):
    """Fewer than four slope sign changes inside the measurement
    window; no meaningful period statistic exists."""


class InsufficientData(LabError):
    """Fewer data points than the fit requires."""


class NonPositiveValue(LabError):
    """Log-log fit fed non-positive abscissae or ordinates."""


class UnknownPreset(LabError):
    """Preset name not recognised."""
