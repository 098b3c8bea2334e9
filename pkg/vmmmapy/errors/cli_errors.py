"""Contains custom exceptions raised while reading configs and driving the CLI."""

__all__: tuple[str, ...] = (
    "VmmmapyException",
    "ConfigError",
    "AlreadyExistsException",
)


class VmmmapyException(Exception):
    pass


class ConfigError(VmmmapyException, ValueError):
    """ConfigError is raised when a config block is unknown, missing or invalid"""

    def __init__(self, message: str, path: str = "") -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class AlreadyExistsException(VmmmapyException):
    pass
