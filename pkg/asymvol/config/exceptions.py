"""
Custom exceptions for asymvol

Every exception carries the process exit code the CLI reports for it.
"""


class AsymVolError(Exception):
    """Base exception for the asymvol toolkit"""
    def __init__(self, message, exit_code=1, payload=None):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code
        self.payload = payload

    def to_dict(self):
        rv = dict(self.payload or ())
        rv['error'] = self.message
        rv['success'] = False
        return rv


class UsageError(AsymVolError):
    def __init__(self, message, exit_code=2, payload=None):
        super().__init__(message, exit_code, payload)


class ValidationError(UsageError):
    """Invalid configuration values (run config, simulation config)"""


class DataError(AsymVolError):
    def __init__(self, message, exit_code=3, payload=None):
        super().__init__(message, exit_code, payload)


class ParseError(DataError):
    def __init__(self, message, line=None, payload=None):
        payload = dict(payload or ())
        if line is not None:
            payload['line'] = line
            message = f"line {line}: {message}"
        super().__init__(message, payload=payload)
        self.line = line


class InsufficientDataError(DataError):
    pass


class UnavailableFieldError(DataError):
    pass


class RowRejectionError(DataError):
    pass


class UnpairedForecastsError(DataError):
    pass


class NumericalError(AsymVolError):
    def __init__(self, message, exit_code=4, payload=None):
        super().__init__(message, exit_code, payload)


class RankDeficiencyError(NumericalError):
    def __init__(self, message, columns=None, payload=None):
        payload = dict(payload or ())
        payload['columns'] = list(columns or [])
        super().__init__(message, payload=payload)
        self.columns = list(columns or [])


class IdenticalForecastsError(NumericalError):
    pass


class ExplosiveDGPError(NumericalError):
    pass
