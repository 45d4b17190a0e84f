"""Exception types shared across the package.

The command-line interface maps these onto process exit codes, and the
HTTP service maps them onto response status codes, so every layer reports
the same three failure classes: bad configuration, an infeasible design
problem, and a numerical solver failure.
"""

from __future__ import annotations


class NfisacError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(NfisacError):
    """Invalid or inconsistent configuration input (CLI exit code 2)."""


class InfeasibleError(NfisacError):
    """The requested design problem admits no feasible point (exit code 3)."""


class SolverFailureError(NfisacError):
    """The numerical solver failed to produce a certified solution (exit code 4)."""


#: Process exit codes used by the CLI (0 means success).
EXIT_CODES: dict[type[NfisacError], int] = {
    ConfigError: 2,
    InfeasibleError: 3,
    SolverFailureError: 4,
}


def exit_code_for(exc: BaseException) -> int:
    """Return the CLI exit code for an exception (1 for unexpected errors)."""
    for klass, code in EXIT_CODES.items():
        if isinstance(exc, klass):
            return code
    return 1
