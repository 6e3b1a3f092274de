"""Exception taxonomy shared across the package.

The CLI maps these onto its exit codes: configuration and input problems
exit with 2, eigensolver problems with 3, variational solver and audit
failures with 4.
"""


class NehariError(Exception):
    """Base class for all package errors."""


class ConfigError(NehariError):
    """Malformed configuration, run file, or input schema violation."""


class GraphError(NehariError):
    """Structurally invalid graph or reference to an unknown vertex."""


class SpectralError(NehariError):
    """Eigensolver failure or an insufficient spectral window."""


class SolverError(NehariError):
    """Variational solver non-convergence or a violated solver contract."""


class AuditError(NehariError):
    """A proven inequality failed numerically; carries a witness."""
