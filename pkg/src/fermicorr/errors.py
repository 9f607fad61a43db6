"""Exception hierarchy shared by all fermicorr modules."""


class FermicorrError(Exception):
    """Base class for every error raised by this package."""


class HermiticityError(FermicorrError, ValueError):
    pass


class IterationLimitExceeded(FermicorrError, RuntimeError):
    pass


class ZeroDiagonal(FermicorrError, ValueError):
    def __init__(self, index, value=0.0):
        super().__init__(f"diagonal entry {index} is not strictly positive ({value!r}); "
                         "detector is not illuminated")
        self.index = index
        self.value = value


class NotPSD(FermicorrError, ValueError):
    def __init__(self, min_eigenvalue):
        super().__init__(f"matrix is indefinite (min eigenvalue {min_eigenvalue:.6g})")
        self.min_eigenvalue = min_eigenvalue


class DimensionTooLarge(FermicorrError, ValueError):
    pass


class NonPositiveBandwidth(FermicorrError, ValueError):
    pass


class KernelNotPSD(NotPSD):
    pass


class IndexOutOfRange(FermicorrError, IndexError):
    pass


class ProbabilityOverflow(FermicorrError, ValueError):
    pass


class InvalidPartition(FermicorrError, ValueError):
    pass


class TooManyPartitions(FermicorrError, ValueError):
    pass


class SpectrumOutOfRange(FermicorrError, ValueError):
    def __init__(self, max_eigenvalue, message=None):
        if message is None:
            message = (f"sampling kernel spectrum outside [0, 1] (max eigenvalue "
                       f"{max_eigenvalue:.6g}); reduce eta*S*dt or refine the grid")
        super().__init__(message)
        self.max_eigenvalue = max_eigenvalue


class DeflationBreakdown(FermicorrError, ArithmeticError):
    pass
