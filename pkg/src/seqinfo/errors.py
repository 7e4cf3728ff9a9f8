"""Exception hierarchy shared by all seqinfo modules.

Every error raised by the library derives from SeqinfoError so callers can
catch the whole family at once. Errors that signal bad user input also derive
from ValueError, which keeps `except ValueError` idioms working.
"""

from __future__ import annotations


class SeqinfoError(Exception):
    """Base class for all seqinfo errors."""


class NonConvergence(SeqinfoError):
    """Adaptive quadrature exhausted its subdivision budget before reaching
    the requested tolerance."""


class DegenerateTruncation(SeqinfoError):
    """A truncation interval carries essentially no probability mass, so
    truncated moments are numerically meaningless."""


class InvalidDesign(SeqinfoError, ValueError):
    """A two-stage design description violates its structural invariants
    (non-partition cells, non-finite threshold, bad sample sizes, ...)."""


class DegenerateDecision(SeqinfoError):
    """A conditional quantity was requested for an interim decision whose
    probability is negligible at the given parameter value."""


class ZeroInformation(SeqinfoError):
    """A conditional Fisher information underflowed to zero, so an
    information-normalized bound cannot be formed."""


class InvalidOutcome(SeqinfoError, ValueError):
    """An observed outcome is structurally impossible under the design
    (stage-1 value outside the decision cell, inconsistent estimate, ...)."""


class MismatchedInputs(SeqinfoError, ValueError):
    """Two artifacts that must describe the same experiment (same design and
    parameter value) do not."""
