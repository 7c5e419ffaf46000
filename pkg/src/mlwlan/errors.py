"""Exception types shared across the package."""


class ConfigError(Exception):
    """Raised when a configuration file or value is invalid."""


class ScenarioError(Exception):
    """Raised when a deployment cannot be generated under the placement rules."""


class InvalidScenarioError(Exception):
    """Raised when a generated deployment violates a coverage requirement,
    e.g. a station with no usable interface."""
