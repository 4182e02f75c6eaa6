"""Exception types raised across the package."""


class NoiselessError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(NoiselessError, ValueError):
    pass


class NonHermitian(NoiselessError, ValueError):
    def __init__(self, residual: float):
        super().__init__(f"matrix is not Hermitian: ||A - A^H||_F = {residual:.3e}")
        self.residual = residual


class NoConvergence(NoiselessError, RuntimeError):
    def __init__(self, sweeps: int, off_norm: float):
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e})"
        )
        self.sweeps = sweeps
        self.off_norm = off_norm


class NonlinearMap(NoiselessError, ValueError):
    def __init__(self, residual: float):
        super().__init__(f"map failed the linearity probe (residual {residual:.3e})")
        self.residual = residual


class NotTracePreserving(NoiselessError, ValueError):
    def __init__(self, residual: float):
        super().__init__(
            f"Kraus operators are not trace preserving: "
            f"||sum E_a^H E_a - 1||_F = {residual:.3e}"
        )
        self.residual = residual


class NotCompletelyPositive(NoiselessError, ValueError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(f"Choi matrix has negative eigenvalue {min_eigenvalue:.3e}")
        self.min_eigenvalue = min_eigenvalue


class InvalidProjector(NoiselessError, ValueError):
    pass


class NotInvariant(NoiselessError, ValueError):
    def __init__(self, residual: float):
        super().__init__(
            f"projector fails E(P) = P E(P) P: residual {residual:.3e}"
        )
        self.residual = residual


class DegenerateSample(NoiselessError, RuntimeError):
    """A random central or relative-commutant element failed to separate blocks."""


class StructureInconsistent(NoiselessError, RuntimeError):
    def __init__(self, message: str, residuals: dict | None = None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ReconstructionFailed(NoiselessError, RuntimeError):
    def __init__(self, residual: float):
        super().__init__(f"cofactor reconstruction of E(P) failed: residual {residual:.3e}")
        self.residual = residual


class NotFactorizable(NoiselessError, RuntimeError):
    def __init__(self, residual: float):
        super().__init__(
            f"P_kk E_a P_ll is not proportional to P_kl: residual {residual:.3e}"
        )
        self.residual = residual


class SoundnessError(NoiselessError, RuntimeError):
    """An emitted subsystem or certificate failed its own verification."""


class NotUnital(NoiselessError, ValueError):
    pass


class UnknownExample(NoiselessError, KeyError):
    pass


class BadParameter(NoiselessError, ValueError):
    pass


class ParseError(NoiselessError, ValueError):
    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ValidationError(NoiselessError, ValueError):
    def __init__(self, cause: NoiselessError):
        super().__init__(f"channel failed validation: {cause}")
        self.cause = cause


class CandidateBudgetExceeded(UserWarning):
    """Lattice closure of candidate projectors was truncated at max_candidates."""
