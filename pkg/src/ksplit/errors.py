"""Exception hierarchy used across the package."""


class KsplitError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KsplitError):
    """A state violates a model's admissible domain (singularity, branch cut)."""


class ConfigurationError(KsplitError):
    """Inconsistent or invalid configuration (bad scheme, bad model setup, bad CLI args)."""


class IntegrationError(KsplitError):
    """A flow map or time stepper failed mid-run."""

    def __init__(self, message, step=None, flow=None, coordinate=None):
        super().__init__(message)
        self.step = step
        self.flow = flow
        self.coordinate = coordinate


class DiagnosticError(KsplitError):
    """A diagnostic quantity is undefined for the given trajectory."""


# Error codes shared with the compiled kernels.
ERR_OK = 0
ERR_POLE = 1
ERR_ARCCOS_RANGE = 2
ERR_TAN_BLOWUP = 3
ERR_SINGULAR = 4
ERR_NONFINITE = 5

_ERR_REASONS = {
    ERR_POLE: "reciprocal flow crossed its pole (finite-time blowup)",
    ERR_ARCCOS_RANGE: "arccos argument left [-1, 1] beyond tolerance",
    ERR_TAN_BLOWUP: "tangent flow reached its blowup time",
    ERR_SINGULAR: "structure matrix entry is singular at this state",
    ERR_NONFINITE: "non-finite value encountered (domain violation)",
}


def describe_error(code):
    return _ERR_REASONS.get(code, f"unknown kernel error code {code}")
