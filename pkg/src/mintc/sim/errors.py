class NumericsError(RuntimeError):
    """A solve produced non-finite values (bad input or blow-up)."""


class GridRefusalError(ValueError):
    """The requested grid is too coarse for the configured speeds."""


class SizeRefusalError(ValueError):
    """A dense-algebra experiment was asked to exceed its size bound."""


class NoWitnessError(ValueError):
    """No non-observability witness exists for the requested horizon."""
