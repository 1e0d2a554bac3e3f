"""Exception hierarchy for the adapter."""


class AdapterError(Exception):
    """Base class for all errors this package raises on purpose."""


class ConfigError(AdapterError):
    """A configuration value is out of range or inconsistent."""


class InputError(AdapterError):
    """An input file or text payload cannot be used."""


class ModelError(AdapterError):
    """The requested model cannot be loaded or cannot do the job."""
