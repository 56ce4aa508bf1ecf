"""Exception types shared across the package."""


class PhaseLabError(Exception):
    """Base class for physics and numerics failures raised by this package."""


class ScheduleError(PhaseLabError):
    """A Hamiltonian schedule produced a non-Hermitian operator."""


class CyclicityError(PhaseLabError):
    """An evolution expected to be cyclic did not return to the initial ray."""

    def __init__(self, message, overlap_modulus=None):
        super().__init__(message)
        self.overlap_modulus = overlap_modulus


class DegeneracyError(PhaseLabError):
    """A band gap closed at a sampled parameter point."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class RegimeError(PhaseLabError):
    """Parameters fall outside the validity regime of a closed-form result."""


class RegimeWarning(UserWarning):
    """Parameters are near the edge of a derivation's validity regime."""


class QuadratureError(PhaseLabError):
    """A quadrature or tolerance-refinement self-check failed to converge."""


class GeometryError(PhaseLabError):
    """Input geometry is degenerate for the requested operation."""


class ResolutionError(PhaseLabError):
    """Sampling is too coarse for a reliable answer."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RootNotFoundError(PhaseLabError):
    """No zero of the field pair was found inside the seed box."""


class NonTransversalError(PhaseLabError):
    """The zero set is not a transversally-cut curve at a trace point."""


class StabilityError(PhaseLabError):
    """A time stepper drifted beyond its stability tolerance."""


class IntegratorError(PhaseLabError):
    """An ODE integration failed its conservation self-check."""


class DynamicsError(PhaseLabError):
    """A trajectory left the regime the measurement assumes."""
