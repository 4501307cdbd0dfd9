"""Exception hierarchy. Each class carries the CLI exit code for its category."""


class ZetaTmdError(Exception):
    exit_code = 1


class ParseError(ZetaTmdError):
    """Input could not be decoded (bad JSON, wrong shapes)."""

    exit_code = 3


class ValidationError(ZetaTmdError):
    """Input decoded but violates a data invariant."""

    exit_code = 3


class ContractError(ValidationError):
    """A function was called with arguments outside its domain."""


class ResourceError(ZetaTmdError):
    """A configured size budget would be exceeded."""

    exit_code = 4
