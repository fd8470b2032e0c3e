"""Exception hierarchy shared by the compiler stages."""


class QallocError(Exception):
    """Base class for every error raised by qalloc."""


class QasmError(QallocError):
    """Malformed OpenQASM source; carries the offending line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class QasmUnsupportedError(QasmError):
    """Well-formed OpenQASM that uses a construct outside the supported subset."""


class CalibrationError(QallocError, ValueError):
    """Invalid calibration document."""


class AllocationError(QallocError, ValueError):
    """Illegal operation on an allocation (non-injective, double mapping)."""


class InfeasibleAllocation(QallocError):
    """No legal full allocation exists (too few qubits or disconnected pairs)."""


class SearchResourceError(QallocError):
    """The search frontier or enumeration exceeded its configured cap."""


class SimulationError(QallocError, ValueError):
    """Compiled circuit cannot be handled by the bit-flip simulator."""
