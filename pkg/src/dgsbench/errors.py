"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class BlockCodecError(ValueError):
    """Encoded neighbor block is truncated or malformed."""


class UnsupportedQueryError(RuntimeError):
    """The requested kernel cannot run on this container family."""


class WorkloadMismatchError(ValueError):
    """Two reports being compared were not produced by the same workload."""


class TxnStateError(RuntimeError):
    """Operation applied to a transaction in the wrong state."""
