"""Exception hierarchy.

Every failure raised by the package derives from :class:`QscError`. Each
subclass carries the process exit code the command-line front end uses for it.
"""


class QscError(Exception):
    exit_code = 1
    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class ConfigError(QscError, ValueError):
    """Invalid configuration value or unknown configuration key."""
    exit_code = 2
    kind = "config_error"


class ShapeError(QscError, ValueError):
    exit_code = 3
    kind = "shape_error"


class DataFormatError(QscError):
    """Malformed or truncated data file.

    ``offset`` is the byte position at which parsing failed, when known.
    """
    exit_code = 3
    kind = "data_format_error"

    def __init__(self, message, offset=None, expected=None, actual=None):
        super().__init__(message)
        self.offset = offset
        self.expected = expected
        self.actual = actual

    def to_dict(self):
        d = super().to_dict()
        for key in ("offset", "expected", "actual"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        return d


class CalibrationError(QscError, ValueError):
    exit_code = 3
    kind = "calibration_error"


class FitError(QscError, ValueError):
    """Discriminant or network initialisation could not be fitted."""
    exit_code = 4
    kind = "fit_error"


class UndefinedFidelityError(QscError, ValueError):
    """A prepared class has no shots, so a fidelity cannot be formed."""
    exit_code = 3
    kind = "undefined_fidelity"
