"""Tariff-equivalent trade cost measures.

The bilateral measure inverts a structural gravity relationship: relative
to the trade both economies do with themselves, thinner two-way trade
implies a thicker cost wedge,

    tau = ((x_ii * x_jj) / (x_ij * x_ji)) ** (1 / (2 * (sigma - 1))) - 1

with sigma the elasticity of substitution between goods. tau is an ad
valorem fraction (0.35 means costs equivalent to a 35% tariff). The
average measure pools a partner set through geometric-mean two-way flows:

    tau_bar = (sum_j xbar_ij / (sqrt(x_ii) * sum_j sqrt(x_jj))) ** (1 / (1 - sigma)) - 1

implemented verbatim in that form, with xbar_ij = sqrt(x_ij * x_ji).

tau can be negative when two-way trade exceeds the domestic benchmark
(entrepot economies); such values are reported as-is and flagged, never
clamped. Zero flows make the measure undefined and yield a flagged gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    EmptyPartnerSet,
    MissingCell,
    NonpositiveDomestic,
    NonpositiveInput,
    SigmaOutOfRange,
    ZeroBaseline,
    ZeroFlow,
)
from .panels import Dataset


def check_sigma(sigma: float) -> float:
    if not sigma > 1:
        raise SigmaOutOfRange(sigma)
    return float(sigma)


def bilateral_tau(x_ij: float, x_ji: float, x_ii: float, x_jj: float, sigma: float) -> float:
    """Tariff-equivalent bilateral trade costs from four trade cells.

    Arguments are the two directed international flows and the two
    domestic flows, all in the same (nominal) units. Negative output is
    legitimate: it means x_ij * x_ji > x_ii * x_jj.
    """
    check_sigma(sigma)
    if x_ii <= 0 or x_jj <= 0:
        raise NonpositiveDomestic(f"domestic trade must be positive, got x_ii={x_ii}, x_jj={x_jj}")
    if x_ij <= 0 or x_ji <= 0:
        raise ZeroFlow(f"international flows must be positive, got x_ij={x_ij}, x_ji={x_ji}")
    ratio = (x_ii * x_jj) / (x_ij * x_ji)
    return ratio ** (1.0 / (2.0 * (sigma - 1.0))) - 1.0


def geometric_mean_trade(x_ij: float, x_ji: float) -> float:
    """Symmetric two-way trade, sqrt(x_ij * x_ji). Zero if either flow is zero."""
    if x_ij < 0 or x_ji < 0:
        raise ValueError(f"flows must be non-negative, got {x_ij}, {x_ji}")
    return math.sqrt(x_ij * x_ji)


def pct_change(start: float, end: float) -> float:
    """Percent change between two levels, 100 * (end - start) / start."""
    if start == 0:
        raise ZeroBaseline("percent change undefined for a zero baseline")
    return 100.0 * (end - start) / start


def annualized_change(start: float, end: float, n_years: int) -> float:
    """Compound annual rate (percent per year) moving start -> end over n_years."""
    if start <= 0 or end <= 0:
        raise NonpositiveInput(f"levels must be positive, got {start}, {end}")
    if n_years < 1:
        raise NonpositiveInput(f"n_years must be >= 1, got {n_years}")
    return 100.0 * ((end / start) ** (1.0 / n_years) - 1.0)


# --- per-pair series --------------------------------------------------------

@dataclass
class TradeCostSeries:
    """tau per year for one pair or partner group at a fixed sigma.

    ``taus`` holds fractions (None where undefined); ``xbars`` keeps the
    geometric-mean two-way flow actually used; ``flags`` carries
    "negative", "missing:..." or "dropped:..." markers per year.
    """

    home: str
    label: str
    sigma: float
    taus: dict[int, float | None] = field(default_factory=dict)
    xbars: dict[int, float | None] = field(default_factory=dict)
    flags: dict[int, str] = field(default_factory=dict)

    @property
    def years(self) -> list[int]:
        return sorted(self.taus)

    def tau_percent(self, year: int) -> float | None:
        tau = self.taus.get(year)
        return None if tau is None else 100.0 * tau

    def first_defined(self, start: int | None = None) -> int | None:
        for year in self.years:
            if self.taus[year] is not None and (start is None or year >= start):
                return year
        return None

    def last_defined(self, end: int | None = None) -> int | None:
        for year in reversed(self.years):
            if self.taus[year] is not None and (end is None or year <= end):
                return year
        return None


def _pair_cells(ds: Dataset, partner: str, year: int) -> dict[str, float | None]:
    return {
        "x_ij": ds.x(ds.home, partner, year),
        "x_ji": ds.x(partner, ds.home, year),
        "x_ii": ds.xd(ds.home, year),
        "x_jj": ds.xd(partner, year),
    }


def pair_series(
    ds: Dataset, partner: str, sigma: float, years: list[int] | None = None
) -> TradeCostSeries:
    """Bilateral tau series between the focal economy and one partner.

    Years with missing cells or zero flows get tau=None and a reason
    flag; negative tau values are kept and flagged.
    """
    check_sigma(sigma)
    series = TradeCostSeries(home=ds.home, label=partner, sigma=sigma)
    for year in years if years is not None else list(ds.years):
        cells = _pair_cells(ds, partner, year)
        gaps = sorted(slot for slot, v in cells.items() if v is None)
        if gaps:
            series.taus[year] = None
            series.xbars[year] = None
            series.flags[year] = "missing:no_data:" + "+".join(gaps)
            continue
        zeros = sorted(slot for slot in ("x_ij", "x_ji") if cells[slot] == 0)
        series.xbars[year] = geometric_mean_trade(cells["x_ij"], cells["x_ji"])
        if zeros:
            series.taus[year] = None
            series.flags[year] = "missing:zero_flow:" + "+".join(zeros)
            continue
        tau = bilateral_tau(cells["x_ij"], cells["x_ji"], cells["x_ii"], cells["x_jj"], sigma)
        series.taus[year] = tau
        series.flags[year] = "negative" if tau < 0 else ""
    return series


# --- pooled average over a partner set --------------------------------------

@dataclass
class AveragePoint:
    year: int
    tau: float | None
    used: list[str]
    dropped: list[str]
    flag: str


def average_tau_point(
    ds: Dataset,
    partners: list[str] | set[str],
    year: int,
    sigma: float,
    strict: bool = True,
) -> AveragePoint:
    """One year of the pooled average measure over a partner set.

    Strict mode raises MissingCell on the first gap; lenient mode drops
    the affected partner and records the drop. Partners with a zero flow
    stay in the pool (their xbar contributes nothing to the numerator,
    which is exactly how the pooled measure prices missing trade).
    """
    check_sigma(sigma)
    members = sorted(set(partners))
    if not members:
        raise EmptyPartnerSet("average requires at least one partner")

    x_ii = ds.xd(ds.home, year)
    if x_ii is None:
        raise MissingCell(ds.home, "x_ii", year)
    if x_ii <= 0:
        raise NonpositiveDomestic(f"domestic trade of {ds.home} in {year} is {x_ii}")

    numerator = 0.0
    denom_sum = 0.0
    used: list[str] = []
    dropped: list[str] = []
    for partner in members:
        cells = _pair_cells(ds, partner, year)
        gap = next((s for s in ("x_ij", "x_ji", "x_jj") if cells[s] is None), None)
        if gap is not None:
            if strict:
                raise MissingCell(partner, gap, year)
            dropped.append(partner)
            continue
        numerator += geometric_mean_trade(cells["x_ij"], cells["x_ji"])
        denom_sum += math.sqrt(cells["x_jj"])
        used.append(partner)

    if not used:
        flag = "missing:no_partner_usable"
        if strict:
            raise EmptyPartnerSet(f"no usable partner in {year}")
        return AveragePoint(year, None, used, dropped, flag)
    if numerator == 0.0:
        if strict:
            raise ZeroFlow(f"all two-way flows zero in {year}; average undefined")
        return AveragePoint(year, None, used, dropped, "missing:zero_flow:all")

    ratio = numerator / (math.sqrt(x_ii) * denom_sum)
    tau = ratio ** (1.0 / (1.0 - sigma)) - 1.0
    flag_parts = []
    if tau < 0:
        flag_parts.append("negative")
    if dropped:
        flag_parts.append("dropped:" + "+".join(dropped))
    return AveragePoint(year, tau, used, dropped, ";".join(flag_parts))


def average_tau(
    ds: Dataset,
    partners: list[str] | set[str],
    year: int,
    sigma: float,
    strict: bool = True,
) -> float:
    point = average_tau_point(ds, partners, year, sigma, strict=strict)
    return point.tau


def average_tau_series(
    ds: Dataset,
    partners: list[str] | set[str],
    years: list[int] | None = None,
    sigma: float = 8.0,
    strict: bool = False,
    label: str = "AVG",
    method: str = "pooled",
) -> TradeCostSeries:
    """Average-cost series over a partner set, one value per year.

    method="pooled" applies the pooled formula to the set (default);
    method="bilateral-mean" instead takes the xbar-weighted mean of the
    members' bilateral tau values, for comparison.
    """
    check_sigma(sigma)
    if method not in ("pooled", "bilateral-mean"):
        raise ValueError(f"unknown averaging method {method!r}")
    members = sorted(set(partners))
    if not members:
        raise EmptyPartnerSet("average requires at least one partner")

    series = TradeCostSeries(home=ds.home, label=label, sigma=sigma)
    for year in years if years is not None else list(ds.years):
        if method == "pooled":
            point = average_tau_point(ds, members, year, sigma, strict=strict)
            series.taus[year] = point.tau
            series.xbars[year] = None
            series.flags[year] = point.flag
        else:
            series_tau, weight_sum, dropped = 0.0, 0.0, []
            for partner in members:
                pair = pair_series(ds, partner, sigma, years=[year])
                tau = pair.taus[year]
                xbar = pair.xbars[year]
                if tau is None or not xbar:
                    dropped.append(partner)
                    continue
                series_tau += xbar * tau
                weight_sum += xbar
            if weight_sum == 0.0:
                if strict:
                    raise EmptyPartnerSet(f"no usable partner in {year}")
                series.taus[year] = None
                series.flags[year] = "missing:no_partner_usable"
            else:
                tau = series_tau / weight_sum
                flag_parts = ["negative"] if tau < 0 else []
                if dropped:
                    flag_parts.append("dropped:" + "+".join(sorted(dropped)))
                series.taus[year] = tau
                series.flags[year] = ";".join(flag_parts)
            series.xbars[year] = None
    return series


def select_partners(
    ds: Dataset,
    region: str | None = None,
    dev_status: str | None = None,
    bri: bool | None = None,
) -> list[str]:
    """Partners of the dataset filtered by classification attributes."""
    selected = []
    for partner in ds.partners:
        cls = ds.classes[partner]
        if region is not None and cls.region != region:
            continue
        if dev_status is not None and cls.dev_status != dev_status:
            continue
        if bri is not None and cls.bri != bri:
            continue
        selected.append(partner)
    return selected


@dataclass
class SeriesSummary:
    start_year: int
    end_year: int
    tau_start: float
    tau_end: float
    pct_change: float | None
    annualized_pct: float | None
    substituted_end: bool


def summarize_series(
    series: TradeCostSeries,
    start: int | None = None,
    end: int | None = None,
    end_override: int | None = None,
) -> SeriesSummary | None:
    """Start/end levels and change metrics for one series.

    Start and end snap to the first/last year with a defined tau inside
    the requested bounds (so a partner observed only from 1995 is
    summarized 1995 onward). ``end_override`` forces a specific end year,
    the usual fix when the final year of a pair is negative or missing.
    """
    first = series.first_defined(start)
    if end_override is not None:
        last = end_override if series.taus.get(end_override) is not None else None
    else:
        last = series.last_defined(end)
    if first is None or last is None or last <= first:
        return None
    tau_start = series.taus[first]
    tau_end = series.taus[last]
    # Negative or zero endpoint levels (entrepot pairs) leave the ratio
    # metrics undefined; the levels themselves are still reported.
    change = pct_change(tau_start, tau_end) if tau_start != 0 else None
    annual = (
        annualized_change(tau_start, tau_end, last - first)
        if tau_start > 0 and tau_end > 0
        else None
    )
    return SeriesSummary(
        start_year=first,
        end_year=last,
        tau_start=tau_start,
        tau_end=tau_end,
        pct_change=change,
        annualized_pct=annual,
        substituted_end=end_override is not None,
    )
