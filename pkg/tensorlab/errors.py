"""
Exception hierarchy of the laboratory

Every error carries an ``ErrorCode`` so the command line can map it to an
exit status without inspecting messages.
"""

from typing import Any, Dict, Optional

from tensorlab.models import ErrorCode


class LabError(Exception):
    """Base class for all laboratory errors"""

    code: ErrorCode = ErrorCode.INTERNAL_ERROR

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Structured form used in log events"""
        return {"error_code": self.code.value, "message": self.message, "details": self.details}


class InvalidArgumentError(LabError, ValueError):
    """Malformed input: shapes, dimensions, non-unitary or non-PSD data"""
    code = ErrorCode.INVALID_ARGUMENT


class ContractViolationError(LabError):
    """A checked mathematical contract did not hold"""
    code = ErrorCode.CONTRACT_VIOLATION


class UnsupportedParameterError(LabError, ValueError):
    """A parameter outside the supported range (e.g. p not 1 mod 4)"""
    code = ErrorCode.UNSUPPORTED_PARAMETER


class InstanceTooLargeError(LabError):
    """An exhaustive enumeration was refused"""
    code = ErrorCode.INSTANCE_TOO_LARGE


class ReportIOError(LabError):
    """A report could not be written"""
    code = ErrorCode.IO_ERROR
