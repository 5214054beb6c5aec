from typing import Optional


class CapacityError(Exception):
    """Base class for every error raised by the capacity toolkit"""


class ContractViolation(CapacityError):
    """An operation was called outside its precondition"""


class InvalidSpecError(CapacityError, ValueError):
    """A machine description, class or spectrum breaks one of its invariants"""


class UnsupportedClassError(InvalidSpecError):
    """Instruction class shape the counting model does not support"""


class DegenerateSpectrumError(CapacityError):
    """Spectrum with fewer than two instructions; capacity would be <= 0"""


class PeriodMisalignedError(CapacityError):
    def __init__(self, T: int, gcd: int):
        self.T = T
        self.gcd = gcd
        if gcd and T % gcd:
            message = f"N({T}) = 0: T is not a multiple of the latency gcd {gcd}"
        else:
            message = f"N({T}) = 0: no task lasts exactly {T} cycles (latency gcd {gcd})"
        super().__init__(message)


class HorizonTooShortError(CapacityError):
    """Task counts up to T cannot pin down the growth rate yet"""

    def __init__(self, T: int, gcd: int, detail: str):
        self.T = T
        self.gcd = gcd
        super().__init__(f"T = {T} is too short (latency gcd {gcd}): {detail}")


class ModificationError(CapacityError):
    """A what-if edit cannot be applied to the given machine"""


class ConfigError(CapacityError):
    """Bad value in the environment or .env file"""


class ParseError(CapacityError):
    def __init__(self, reason: str, filename: Optional[str] = None, line: Optional[int] = None):
        self.reason = reason
        self.filename = filename or "<input>"
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.filename}: {self.reason}"
        return f"{self.filename}:{self.line}: {self.reason}"
