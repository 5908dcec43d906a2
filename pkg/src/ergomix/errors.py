class ErgomixError(Exception):
    """Base class for all library errors."""


class InvalidModulus(ErgomixError, ValueError):
    pass


class NotAUnit(ErgomixError, ValueError):
    pass


class NotAGenerator(ErgomixError, ValueError):
    pass


class WindowTooLarge(ErgomixError, ValueError):
    pass


class ConstructionTooLarge(ErgomixError):
    """Projected word length exceeds the configured guard."""

    def __init__(self, projected: int, guard: int):
        super().__init__(f"projected word length {projected} exceeds guard {guard}")
        self.projected = projected
        self.guard = guard


class ConfigError(ErgomixError):
    pass
