"""Exception hierarchy shared by every module."""


class DistortionLabError(Exception):
    pass


class DomainError(DistortionLabError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DegenerateSpectrum(DomainError):
    """The diagonal map does not have three well separated singular values."""


class NotSymmetric(DistortionLabError, ValueError):
    pass


class SingularMatrix(DistortionLabError, ArithmeticError):
    pass


class NonPositiveJacobian(DistortionLabError, ArithmeticError):
    pass


class BranchError(DistortionLabError, ArithmeticError):
    """The square root sqrt(beta/alpha) has no real branch (alpha*beta <= 0)."""


class ConstraintViolated(DomainError):
    pass


class ComplexLeakage(DistortionLabError, ArithmeticError):
    """Cardano evaluation left a non-negligible imaginary part."""


class Breakpoint(DomainError):
    """The sawtooth derivative is undefined at a kink."""


class TooCoarse(DomainError):
    """Probe radius reaches across a lamination breakpoint plane."""


class ConfigError(DistortionLabError, ValueError):
    """Invalid run configuration (for example a non-positive tolerance)."""
