"""Trade growth accounting: income, trade costs, multilateral resistance.

Between a (smoothed) base period and an end year, the log growth of
two-way trade N = dln(x_ij * x_ji) splits exactly into three shares that
sum to 100%:

    A = 2 dln(y_i y_j / y_w) / N                      income growth
    B = (N - dln(x_ii x_jj)) / N                      bilateral cost decline
    C = -(dln(y_i^2/(y_w x_ii)) + dln(y_j^2/(y_w x_jj))) / N
                                                      multilateral resistance

The same B and C can be reached through the measured tariff equivalents
and the resistance terms they imply; that route carries the elasticity
of substitution which then cancels, so both are computed and compared.
The headline shares are elasticity-free by construction, which makes the
whole decomposition independent of sigma.

A negative C is trade diversion: partners lowering their barriers with
third economies pulls trade away from the pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .costs import check_sigma, geometric_mean_trade
from .errors import (
    EmptyWindow,
    MissingCell,
    NonpositiveValue,
    WeightMissing,
    ZeroGrowth,
)
from .panels import Dataset

VARIABLES = ("x_ij", "x_ji", "x_ii", "x_jj", "y_i", "y_j", "y_w")


@dataclass
class BaseObservation:
    """Period values for the seven decomposition inputs.

    Built either from a multi-year window (arithmetic mean of the levels
    observed in each year, per variable) or from a single year.
    ``contributed`` records how many window years each variable's mean
    actually used.
    """

    x_ij: float
    x_ji: float
    x_ii: float
    x_jj: float
    y_i: float
    y_j: float
    y_w: float
    window: tuple[int, int]
    contributed: dict[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        for name in VARIABLES:
            value = getattr(self, name)
            if value <= 0:
                raise NonpositiveValue(f"{name} must be positive in {self.window}, got {value}")

    def xbar(self) -> float:
        return geometric_mean_trade(self.x_ij, self.x_ji)


def _pair_values(ds: Dataset, i: str, j: str, year: int) -> dict[str, float | None]:
    return {
        "x_ij": ds.x(i, j, year),
        "x_ji": ds.x(j, i, year),
        "x_ii": ds.xd(i, year),
        "x_jj": ds.xd(j, year),
        "y_i": ds.y(i, year),
        "y_j": ds.y(j, year),
        "y_w": ds.yw(year),
    }


def smooth_base(ds: Dataset, i: str, j: str, window: list[int]) -> BaseObservation:
    """Base-period observation: per-variable mean of the levels available
    inside the window. Raises EmptyWindow for a variable with no usable
    year at all."""
    if not window:
        raise EmptyWindow("window")
    sums = {name: 0.0 for name in VARIABLES}
    counts = {name: 0 for name in VARIABLES}
    for year in window:
        values = _pair_values(ds, i, j, year)
        for name in VARIABLES:
            if values[name] is not None:
                sums[name] += values[name]
                counts[name] += 1
    for name in VARIABLES:
        if counts[name] == 0:
            raise EmptyWindow(name)
    means = {name: sums[name] / counts[name] for name in VARIABLES}
    obs = BaseObservation(
        **means, window=(min(window), max(window)), contributed=counts
    )
    obs.validate()
    return obs


def observation_at(ds: Dataset, i: str, j: str, year: int) -> BaseObservation:
    """Single-year observation; any absent cell is an error."""
    values = _pair_values(ds, i, j, year)
    for name in VARIABLES:
        if values[name] is None:
            raise MissingCell(j if name in ("x_ij", "x_ji", "x_jj", "y_j") else i, name, year)
    obs = BaseObservation(
        **values, window=(year, year), contributed={name: 1 for name in VARIABLES}
    )
    obs.validate()
    return obs


@dataclass
class DecompositionRecord:
    """Growth shares for one pair or one aggregated group, in percent.

    a/b/c are the elasticity-free shares; b_via_tau and c_via_mr are the
    same quantities reached through the measured tariff equivalents and
    implied resistance terms, kept for cross-checking (path_discrepancy
    is their largest absolute disagreement).
    """

    scope: str
    label: str
    base_window: tuple[int, int]
    end_year: int
    growth_pct: float
    a_pct: float
    b_pct: float
    c_pct: float
    b_via_tau_pct: float
    c_via_mr_pct: float
    path_discrepancy: float
    flags: str = ""

    @property
    def sum_pct(self) -> float:
        return self.a_pct + self.b_pct + self.c_pct


def trade_growth(base: BaseObservation, end: BaseObservation, definition: str = "geomean") -> float:
    """Percent growth of two-way trade between base and end.

    definition="geomean" grows sqrt(x_ij * x_ji); definition="product"
    grows the raw product x_ij * x_ji.
    """
    if definition == "geomean":
        start, finish = base.xbar(), end.xbar()
    elif definition == "product":
        start, finish = base.x_ij * base.x_ji, end.x_ij * end.x_ji
    else:
        raise ValueError(f"unknown growth definition {definition!r}")
    if start <= 0 or finish <= 0:
        raise NonpositiveValue("two-way trade must be positive at both ends")
    return 100.0 * (finish / start - 1.0)


def decompose_observations(
    base: BaseObservation,
    end: BaseObservation,
    sigma: float,
    scope: str = "pair",
    label: str = "",
    growth_definition: str = "geomean",
) -> DecompositionRecord:
    """Split the pair's trade growth into the three shares.

    The elasticity enters only the cross-check path; the reported shares
    are identical for any sigma > 1.
    """
    check_sigma(sigma)
    base.validate()
    end.validate()

    def dln(name: str) -> float:
        return math.log(getattr(end, name)) - math.log(getattr(base, name))

    n = dln("x_ij") + dln("x_ji")
    if n == 0.0:
        raise ZeroGrowth("two-way trade unchanged; growth shares undefined")

    dln_income = dln("y_i") + dln("y_j") - dln("y_w")
    dln_domestic = dln("x_ii") + dln("x_jj")
    a = 2.0 * dln_income / n
    b = (n - dln_domestic) / n
    # resistance shares, one term per economy: dln((y/y_w) / (x_dom/y))
    c_i = 2.0 * dln("y_i") - dln("y_w") - dln("x_ii")
    c_j = 2.0 * dln("y_j") - dln("y_w") - dln("x_jj")
    c = -(c_i + c_j) / n

    # Cross-check path through the measured tariff equivalent and the
    # implied resistance terms; sigma cancels up to rounding.
    half_inv = 1.0 / (2.0 * (sigma - 1.0))
    dln1p_tau = (
        math.log((end.x_ii * end.x_jj) / (end.x_ij * end.x_ji))
        - math.log((base.x_ii * base.x_jj) / (base.x_ij * base.x_ji))
    ) * half_inv
    b_via_tau = 2.0 * (1.0 - sigma) * dln1p_tau / n

    def ln_phi(x_dom: float, y: float, y_w: float) -> float:
        return math.log((x_dom / y) / (y / y_w)) * half_inv

    dln_phi = (
        ln_phi(end.x_ii, end.y_i, end.y_w)
        + ln_phi(end.x_jj, end.y_j, end.y_w)
        - ln_phi(base.x_ii, base.y_i, base.y_w)
        - ln_phi(base.x_jj, base.y_j, base.y_w)
    )
    c_via_mr = -2.0 * (1.0 - sigma) * dln_phi / n

    flags = "shrinking_trade" if n < 0 else ""
    return DecompositionRecord(
        scope=scope,
        label=label,
        base_window=base.window,
        end_year=end.window[1],
        growth_pct=trade_growth(base, end, growth_definition),
        a_pct=100.0 * a,
        b_pct=100.0 * b,
        c_pct=100.0 * c,
        b_via_tau_pct=100.0 * b_via_tau,
        c_via_mr_pct=100.0 * c_via_mr,
        path_discrepancy=max(abs(100.0 * (b - b_via_tau)), abs(100.0 * (c - c_via_mr))),
        flags=flags,
    )


def decompose_pair(
    ds: Dataset,
    i: str,
    j: str,
    base: BaseObservation,
    end_year: int,
    sigma: float,
    growth_definition: str = "geomean",
) -> DecompositionRecord:
    end = observation_at(ds, i, j, end_year)
    return decompose_observations(
        base, end, sigma, scope="pair", label=f"{i}-{j}", growth_definition=growth_definition
    )


def gdp_pair_weights(ds: Dataset, partners: list[str], year: int) -> dict[str, float]:
    """Pair weights for group aggregation: sum of the two GDPs in ``year``."""
    weights: dict[str, float] = {}
    y_home = ds.y(ds.home, year)
    for partner in partners:
        y_p = ds.y(partner, year)
        if y_home is None or y_p is None:
            continue
        weights[f"{ds.home}-{partner}"] = y_home + y_p
    return weights


def aggregate_decomposition(
    records: list[DecompositionRecord],
    weights: dict[str, float],
    label: str,
) -> DecompositionRecord:
    """Weight-normalized mean of member records.

    Every member share triple sums to 100, so the weighted mean does
    too; growth and the cross-check path aggregate the same way. Member
    records must share the base window and end year.
    """
    if not records:
        raise WeightMissing(label)
    base_windows = {r.base_window for r in records}
    end_years = {r.end_year for r in records}
    if len(base_windows) > 1 or len(end_years) > 1:
        raise ValueError("cannot aggregate records with differing base/end conventions")

    total = 0.0
    for record in records:
        if record.label not in weights:
            raise WeightMissing(record.label)
        if weights[record.label] <= 0:
            raise NonpositiveValue(f"weight for {record.label} must be positive")
        total += weights[record.label]

    def wmean(attr: str) -> float:
        return sum(getattr(r, attr) * weights[r.label] for r in records) / total

    flags = sorted({f for r in records for f in r.flags.split(";") if f})
    return DecompositionRecord(
        scope="group",
        label=label,
        base_window=records[0].base_window,
        end_year=records[0].end_year,
        growth_pct=wmean("growth_pct"),
        a_pct=wmean("a_pct"),
        b_pct=wmean("b_pct"),
        c_pct=wmean("c_pct"),
        b_via_tau_pct=wmean("b_via_tau_pct"),
        c_via_mr_pct=wmean("c_via_mr_pct"),
        path_discrepancy=max(r.path_discrepancy for r in records),
        flags=";".join(flags),
    )
