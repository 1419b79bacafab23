"""Exception types shared across the package."""


class MerkleProbError(ValueError):
    """Base class for every error raised deliberately by merkleprob."""


class ConfigError(MerkleProbError):
    """Invalid hash or experiment configuration."""


class DomainError(MerkleProbError):
    """Arguments outside an operation's domain."""


class FormatError(MerkleProbError):
    """Malformed serialized input (proof files, CSV documents)."""
