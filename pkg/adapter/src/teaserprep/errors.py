"""Exception hierarchy; the CLI maps these to exit codes."""


class AdapterError(Exception):
    """Bad input or unusable configuration for an adapter job."""


class ServiceError(AdapterError):
    """A model-service call failed after exhausting retries."""
