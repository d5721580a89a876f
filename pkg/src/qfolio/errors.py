"""Exception types raised across the package.

Grouped here because several of them (``LengthMismatch`` in particular) are
shared between the model and simulator layers.
"""


class QfolioError(Exception):
    """Base class for every error raised by qfolio."""


# --- market data ---------------------------------------------------------

class MissingTicker(QfolioError):
    def __init__(self, ticker):
        super().__init__(f"ticker {ticker!r} not present in the price file")
        self.ticker = ticker


class MalformedRow(QfolioError):
    def __init__(self, line_number, reason):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


class EmptyWindow(QfolioError):
    """Fewer than two observations fall inside the requested date window."""


class NoCommonDates(QfolioError):
    """The intersection of the series' date grids is empty."""


class SingleObservation(QfolioError):
    """Too few observations to compute the requested statistic."""


class MissingReturn(QfolioError):
    def __init__(self, ticker):
        super().__init__(f"no return available for ticker {ticker!r}")
        self.ticker = ticker


# --- model ----------------------------------------------------------------

class BudgetOutOfRange(QfolioError):
    """Selection budget must satisfy 1 <= budget <= asset count."""


class NonPositivePenalty(QfolioError):
    """The constraint penalty weight must be strictly positive."""


class LengthMismatch(QfolioError):
    """Bitstring length does not match the problem dimension."""


# --- simulator ------------------------------------------------------------

class TooManyQubits(QfolioError):
    """Dense simulation is capped at 20 qubits."""


class UnboundParameter(QfolioError):
    """A parameterized gate was applied without a bound value."""


class IndexOutOfRange(QfolioError):
    """Gate acts on a qubit index outside the register."""


class DimensionMismatch(QfolioError):
    """State and operator dimensions disagree."""


class ZeroShots(QfolioError):
    """Sampling requires at least one shot."""


# --- engine / oracle ------------------------------------------------------

class ParamLengthMismatch(QfolioError):
    """Parameter vector length does not match the circuit's free parameters."""


class TooLarge(QfolioError):
    """Exhaustive enumeration is capped at 24 variables."""


class MissingArtifact(QfolioError):
    """A run directory lacks an expected result or manifest file."""
