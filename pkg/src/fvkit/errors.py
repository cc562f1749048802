"""Exception types shared across the package (mapped to CLI exit codes)."""


class FvkitError(Exception):
    exit_code = 1


class BoundExceeded(FvkitError):
    """A configured resource bound (enumeration, components, minterms) was hit."""

    exit_code = 3

    def __init__(self, message: str, bound: str = ""):
        super().__init__(message)
        self.bound = bound


class CertificateFailure(FvkitError):
    exit_code = 4


class ProviderError(FvkitError):
    """A user-supplied Kiefe formula broke its asserted contract."""

    exit_code = 5
