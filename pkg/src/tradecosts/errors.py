"""Exception hierarchy shared by all tradecosts modules.

Three branches map onto the CLI exit-code contract: DataError (bad or
missing input data, exit 1), NumericalError (solver failure, exit 2),
and UsageError (bad invocation, exit 3).
"""

from __future__ import annotations


class TradeCostsError(Exception):
    pass


class DataError(TradeCostsError):
    pass


class NumericalError(TradeCostsError):
    pass


class UsageError(TradeCostsError):
    pass


# --- ingest / panel errors -------------------------------------------------

class RowError(DataError):
    """A row-level problem found while parsing a CSV file.

    Carries the 1-based data row number (header excluded) so reports can
    point at the offending line. The reader collects every row error for
    a file; the raised instance exposes the full list via ``report``.
    """

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row
        self.report: list[RowError] = []


class SchemaMismatch(DataError):
    pass


class UnparsableNumber(RowError):
    pass


class NegativeValue(RowError):
    pass


class NonpositiveValue(DataError):
    pass


class DuplicateKey(RowError):
    pass


class InvalidCountry(RowError):
    pass


class UnknownEnum(RowError):
    pass


class EmptyInput(DataError):
    pass


class ChecksumMismatch(DataError):
    pass


class MissingClassification(DataError):
    def __init__(self, country: str):
        super().__init__(f"no classification entry for partner {country}")
        self.country = country


class MissingHomeSeries(DataError):
    def __init__(self, year: int, what: str):
        super().__init__(f"required series missing for year {year}: {what}")
        self.year = year
        self.what = what


class MissingCell(DataError):
    def __init__(self, country: str, slot: str, year: int):
        super().__init__(f"missing {slot} for {country} in {year}")
        self.country = country
        self.slot = slot
        self.year = year


# --- measure errors ---------------------------------------------------------

class SigmaOutOfRange(DataError):
    def __init__(self, sigma: float):
        super().__init__(f"elasticity of substitution must exceed 1, got {sigma}")
        self.sigma = sigma


class ZeroFlow(DataError):
    pass


class NonpositiveDomestic(DataError):
    pass


class EmptyPartnerSet(DataError):
    pass


class ZeroBaseline(DataError):
    pass


class NonpositiveInput(DataError):
    pass


class EmptyWindow(DataError):
    def __init__(self, variable: str):
        super().__init__(f"no usable observation for {variable} in the base window")
        self.variable = variable


class ZeroGrowth(DataError):
    pass


class WeightMissing(DataError):
    def __init__(self, label: str):
        super().__init__(f"no aggregation weight for {label}")
        self.label = label


# --- solver errors ----------------------------------------------------------

class NoConvergence(NumericalError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"fixed point not converged after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class SingularInput(NumericalError):
    pass
