"""Exception hierarchy.

``ValidationError`` subclasses map to CLI exit code 1, ``NumericalError``
subclasses to exit code 2.
"""


class ValidationError(ValueError):
    """Bad input: unknown key, malformed grid, violated invariant."""


class NumericalError(ArithmeticError):
    """A computation could not produce a trustworthy number."""


class BistableAmbiguity(NumericalError):
    """The steady-state cubic has three real roots; the caller must pick one."""

    def __init__(self, roots):
        self.roots = tuple(roots)
        super().__init__(
            f"three real steady-state branches (effective detunings {self.roots}); "
            "pass branch=<index> to select one"
        )


class DivisionByZeroDrive(ValidationError):
    """A normalized output was requested whose normalizing drive amplitude is zero."""


class ResonanceMismatch(ValidationError):
    """Combined outputs requested while omega_q != delta."""


class PhaseSingularity(NumericalError):
    """|t_pu| vanishes at the evaluation point, so its phase derivative is undefined."""


class DegenerateSideband(NumericalError):
    """The sideband output is too weak for any pump amplitude to cancel the probe output."""


class GridTooNarrow(NumericalError):
    """The grid maximum sits on a boundary, so the true peak may lie outside."""


class NotConverged(NumericalError):
    """Tone amplitudes still drift between the last two extraction windows."""


class Unstable(NumericalError):
    """The integrated state blew up."""


class IncommensurateWindow(NumericalError):
    """No window inside the trajectory aligns all requested tones."""
