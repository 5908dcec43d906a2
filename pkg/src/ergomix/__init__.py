"""Rank-one cutting-and-stacking constructions with stochastic or
primitive-root spacers, plus exact checks and empirical mixing statistics."""

__version__ = "0.1.0"

from ergomix.errors import (
    ConfigError,
    ConstructionTooLarge,
    ErgomixError,
    InvalidModulus,
    NotAGenerator,
    NotAUnit,
    WindowTooLarge,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ConstructionTooLarge",
    "ErgomixError",
    "InvalidModulus",
    "NotAGenerator",
    "NotAUnit",
    "WindowTooLarge",
]
