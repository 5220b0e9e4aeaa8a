"""Grid solver for zero-sum differential games with continuous and impulse controls."""

from ._core import (
    ConfigError,
    DomainError,
    SolveResult,
    extract,
    portfolio,
    refine,
    run,
    solve,
    verify,
    __version__,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "SolveResult",
    "extract",
    "portfolio",
    "refine",
    "run",
    "solve",
    "verify",
    "__version__",
]
