"""Exception types shared by the package; the CLI maps them to exit codes."""


class InputError(ValueError):
    """Malformed or out-of-range input (CLI exit code 2)."""


class ResourceCapError(RuntimeError):
    """A configured size cap would be exceeded (CLI exit code 3)."""
