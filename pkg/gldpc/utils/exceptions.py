"""Exception hierarchy. Every error carries the exit code the CLI returns for it."""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_INCOMPATIBLE = 5


class GldpcError(Exception):
    """
    Base error of the toolkit.

    Args:
        detail (str): Human readable description of what went wrong.
        exit_code (int, optional): Process exit code used by the CLI. Defaults to the
            class-level code.
    """
    exit_code = EXIT_FAILURE

    def __init__(self, detail: str, exit_code: int = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageError(GldpcError):
    exit_code = EXIT_USAGE


class StorageError(GldpcError):
    exit_code = EXIT_IO


class ChecksumError(StorageError):
    pass


class VersionMismatchError(StorageError):
    pass


class InvalidParameterError(GldpcError):
    exit_code = EXIT_VALIDATION


class AlistFormatError(InvalidParameterError):
    pass


class InfeasibleParametersError(InvalidParameterError):
    pass


class ConstructionError(InvalidParameterError):
    pass


class EmptyTrainingSetError(InvalidParameterError):
    pass


class IncompatibleError(GldpcError):
    exit_code = EXIT_INCOMPATIBLE


class ShapeMismatchError(IncompatibleError):
    pass


class GridMismatchError(IncompatibleError):
    pass


class MissingPolicyError(IncompatibleError):
    pass
