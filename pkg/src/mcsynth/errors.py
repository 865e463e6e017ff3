"""Exception types shared across the package."""


class McsynthError(Exception):
    """Base class for all mcsynth errors."""


class SketchError(McsynthError):
    """A sketch document or specification file is malformed.

    ``location`` names the offending field or state so diagnostics stay
    actionable without a stack trace.
    """

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class PropertyError(SketchError):
    """A property expression does not match the grammar or fails to resolve."""


class ResourceCapError(McsynthError):
    """A configured resource cap was exceeded (member count, actions, sweeps)."""


class ConvergenceError(ResourceCapError):
    """Value iteration hit the sweep cap before reaching the tolerance."""


class InvalidBoundsError(McsynthError):
    """A rerouting vector is inconsistent with the chain it was applied to."""
