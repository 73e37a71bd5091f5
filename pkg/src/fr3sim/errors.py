"""Exception hierarchy.

``ConfigError`` covers anything wrong with user input (files, keys, missing
table cells); ``DomainError`` covers calls outside a model's validity range.
The CLI maps them to exit codes 1 and 2.
"""


class Fr3Error(Exception):
    pass


class ConfigError(Fr3Error, ValueError):
    def __init__(self, message, *, key=None, lineno=None):
        self.key = key
        self.lineno = lineno
        parts = []
        if lineno is not None:
            parts.append(f"line {lineno}")
        if key is not None:
            parts.append(f"key '{key}'")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DuplicateKeyError(ConfigError):
    pass


class InvariantError(ConfigError):
    pass


class MissingEntryError(ConfigError, LookupError):
    pass


class DomainError(Fr3Error, ValueError):
    pass


class DegenerateInputError(DomainError):
    pass


class InfeasibleError(Fr3Error):
    def __init__(self, message, best_rate_mbps=None, best_band=None):
        self.best_rate_mbps = best_rate_mbps
        self.best_band = best_band
        super().__init__(message)
