"""Canonical in-memory data model for trade/GDP panels.

Everything downstream (cost measures, growth decomposition, the CLI)
reads from a single immutable ``Dataset`` that joins four panels around
one focal economy:

* ``FlowPanel``      directed bilateral exports X[reporter -> partner, year]
* ``DomesticPanel``  intranational trade X[country -> country, year]
* ``GdpPanel``       nominal income per country-year, plus the WLD aggregate
* ``Classification`` region / development status / BRI membership per country

All values are nominal, in thousands of current US dollars. Missing data
is an absent cell, never a zero: a zero flow is an economic statement
(the cost measure is undefined there), absence means "no data".
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DataError,
    InvalidCountry,
    MissingClassification,
    MissingHomeSeries,
    NegativeValue,
    NonpositiveValue,
)

WORLD = "WLD"

REGIONS = (
    "Southeast Asia",
    "East Asia",
    "South Asia",
    "Oceania",
    "Europe",
    "North America",
)
DEV_STATUSES = ("developed", "developing_emerging")

FlowKey = tuple[str, str, int]   # (reporter, partner, year)
SeriesKey = tuple[str, int]      # (country, year)


def check_code(code: str) -> str:
    if not code or code != code.strip().upper():
        raise InvalidCountry(f"bad country code {code!r}", row=0)
    return code


@dataclass
class FlowPanel:
    """Directed bilateral export values keyed by (reporter, partner, year).

    ``sources`` tags each cell with the id of the source table it came
    from (see ingest.merge_flow_sources).
    """

    values: dict[FlowKey, float] = field(default_factory=dict)
    sources: dict[FlowKey, str] = field(default_factory=dict)
    year_range: tuple[int, int] | None = None

    def get(self, reporter: str, partner: str, year: int) -> float | None:
        return self.values.get((reporter, partner, year))

    def years(self) -> list[int]:
        return sorted({y for _, _, y in self.values})

    def validate(self) -> None:
        for (reporter, partner, year), value in self.values.items():
            if reporter == partner:
                raise DataError(f"flow cell {reporter}->{partner} in {year}: reporter equals partner")
            if WORLD in (reporter, partner):
                raise DataError(f"flow cell {reporter}->{partner} in {year}: {WORLD} is reserved")
            if value < 0:
                raise NegativeValue(f"flow {reporter}->{partner} in {year} is {value}", row=0)
            if self.year_range is not None and not (self.year_range[0] <= year <= self.year_range[1]):
                raise DataError(f"flow year {year} outside declared range {self.year_range}")


@dataclass
class DomesticPanel:
    """Intranational trade values keyed by (country, year). Strictly positive."""

    values: dict[SeriesKey, float] = field(default_factory=dict)

    def get(self, country: str, year: int) -> float | None:
        return self.values.get((country, year))

    def validate(self) -> None:
        for (country, year), value in self.values.items():
            if value <= 0:
                raise NonpositiveValue(f"domestic trade for {country} in {year} is {value}")


@dataclass
class GdpPanel:
    """Nominal income keyed by (country, year); WLD rows hold world income."""

    values: dict[SeriesKey, float] = field(default_factory=dict)

    def get(self, country: str, year: int) -> float | None:
        return self.values.get((country, year))

    def world(self, year: int) -> float | None:
        return self.values.get((WORLD, year))

    def validate(self) -> None:
        for (country, year), value in self.values.items():
            if value <= 0:
                raise NonpositiveValue(f"GDP for {country} in {year} is {value}")


@dataclass(frozen=True)
class CountryClass:
    region: str
    dev_status: str
    bri: bool

    def validate(self) -> None:
        if self.region not in REGIONS:
            raise DataError(f"unknown region {self.region!r}")
        if self.dev_status not in DEV_STATUSES:
            raise DataError(f"unknown dev_status {self.dev_status!r}")


Classification = dict[str, CountryClass]


@dataclass
class Dataset:
    """Immutable star-shaped join of the four panels around ``home``.

    Safe for concurrent reads; never mutate after build_dataset returns.
    """

    flows: FlowPanel
    domestic: DomesticPanel
    gdp: GdpPanel
    classes: Classification
    home: str
    year_range: tuple[int, int]

    @property
    def years(self) -> range:
        return range(self.year_range[0], self.year_range[1] + 1)

    @property
    def partners(self) -> list[str]:
        seen = {r for r, _, _ in self.flows.values} | {p for _, p, _ in self.flows.values}
        seen.discard(self.home)
        return sorted(seen)

    # Cell accessors used throughout costs/decomposition. None means missing.
    def x(self, reporter: str, partner: str, year: int) -> float | None:
        return self.flows.get(reporter, partner, year)

    def xd(self, country: str, year: int) -> float | None:
        return self.domestic.get(country, year)

    def y(self, country: str, year: int) -> float | None:
        return self.gdp.get(country, year)

    def yw(self, year: int) -> float | None:
        return self.gdp.world(year)


def build_dataset(
    flows: FlowPanel,
    domestic: DomesticPanel,
    gdp: GdpPanel,
    classes: Classification,
    home: str,
    year_range: tuple[int, int] | None = None,
) -> Dataset:
    """Join the four panels into a validated Dataset.

    The focal economy must have domestic trade, GDP, and world GDP for
    every year of the panel range; every partner appearing in the flow
    panel must be classified. The range defaults to the span of years
    present in the flow panel.
    """
    check_code(home)
    flows.validate()
    domestic.validate()
    gdp.validate()
    for code, cls in classes.items():
        check_code(code)
        cls.validate()

    if year_range is None:
        flow_years = flows.years()
        if not flow_years:
            raise DataError("flow panel is empty and no year range was declared")
        year_range = (flow_years[0], flow_years[-1])
    if year_range[0] > year_range[1]:
        raise DataError(f"invalid year range {year_range}")

    ds = Dataset(flows, domestic, gdp, classes, home, year_range)

    for year in ds.years:
        if domestic.get(home, year) is None:
            raise MissingHomeSeries(year, f"domestic trade of {home}")
        if gdp.get(home, year) is None:
            raise MissingHomeSeries(year, f"GDP of {home}")
        if gdp.world(year) is None:
            raise MissingHomeSeries(year, f"world GDP ({WORLD} row)")

    for partner in ds.partners:
        if partner not in classes:
            raise MissingClassification(partner)

    # World income must dominate any single economy wherever both exist.
    for (country, year), value in gdp.values.items():
        if country == WORLD:
            continue
        world = gdp.world(year)
        if world is not None and value > world:
            raise DataError(
                f"GDP of {country} in {year} ({value}) exceeds world GDP ({world})"
            )

    return ds


# --- coverage ---------------------------------------------------------------

SLOTS = ("x_ij", "x_ji", "x_ii", "x_jj")


@dataclass
class PartnerCoverage:
    partner: str
    first_complete_year: int | None
    last_complete_year: int | None
    n_missing: int


@dataclass
class CoverageReport:
    partners: list[PartnerCoverage]
    missing: list[tuple[str, int, str]]   # (partner, year, slot)
    n_slots: int
    n_present: int

    @property
    def n_missing(self) -> int:
        return len(self.missing)


def coverage_report(ds: Dataset) -> CoverageReport:
    """Per-partner data coverage over the panel range.

    A partner-year is complete when all four cells needed by the cost
    measure are present: both directed flows, the partner's domestic
    trade, and the focal economy's domestic trade.
    """
    partners = ds.partners
    missing: list[tuple[str, int, str]] = []
    per_partner: list[PartnerCoverage] = []

    for partner in partners:
        complete_years: list[int] = []
        n_miss = 0
        for year in ds.years:
            cells = {
                "x_ij": ds.x(ds.home, partner, year),
                "x_ji": ds.x(partner, ds.home, year),
                "x_ii": ds.xd(ds.home, year),
                "x_jj": ds.xd(partner, year),
            }
            gaps = [slot for slot in SLOTS if cells[slot] is None]
            for slot in gaps:
                missing.append((partner, year, slot))
            n_miss += len(gaps)
            if not gaps:
                complete_years.append(year)
        per_partner.append(
            PartnerCoverage(
                partner=partner,
                first_complete_year=complete_years[0] if complete_years else None,
                last_complete_year=complete_years[-1] if complete_years else None,
                n_missing=n_miss,
            )
        )

    n_slots = len(partners) * len(ds.years) * len(SLOTS)
    return CoverageReport(
        partners=per_partner,
        missing=sorted(missing),
        n_slots=n_slots,
        n_present=n_slots - len(missing),
    )


# --- serialized export ------------------------------------------------------

def _fmt(value: float) -> str:
    # repr gives the shortest string that round-trips the double exactly
    return repr(float(value))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_dataset(ds: Dataset, out_dir: str | Path) -> Path:
    """Export a Dataset as the four canonical CSV files plus a manifest.

    Output is deterministic: fixed row ordering (year, then codes) and
    shortest round-tripping float formatting, so identical datasets
    serialize byte-for-byte identically.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    flow_lines = ["year,reporter,partner,export_fob_kusd,source"]
    for (reporter, partner, year) in sorted(ds.flows.values, key=lambda k: (k[2], k[0], k[1])):
        value = ds.flows.values[(reporter, partner, year)]
        source = ds.flows.sources.get((reporter, partner, year), "")
        flow_lines.append(f"{year},{reporter},{partner},{_fmt(value)},{source}")
    (out / "flows.csv").write_text("\n".join(flow_lines) + "\n", encoding="utf-8")

    dom_lines = ["year,country,domestic_trade_kusd"]
    for (country, year) in sorted(ds.domestic.values, key=lambda k: (k[1], k[0])):
        dom_lines.append(f"{year},{country},{_fmt(ds.domestic.values[(country, year)])}")
    (out / "domestic.csv").write_text("\n".join(dom_lines) + "\n", encoding="utf-8")

    gdp_lines = ["year,country,gdp_kusd"]
    for (country, year) in sorted(ds.gdp.values, key=lambda k: (k[1], k[0])):
        gdp_lines.append(f"{year},{country},{_fmt(ds.gdp.values[(country, year)])}")
    (out / "gdp.csv").write_text("\n".join(gdp_lines) + "\n", encoding="utf-8")

    cls_lines = ["country,region,dev_status,bri"]
    for code in sorted(ds.classes):
        cls = ds.classes[code]
        cls_lines.append(f"{code},{cls.region},{cls.dev_status},{'true' if cls.bri else 'false'}")
    (out / "classification.csv").write_text("\n".join(cls_lines) + "\n", encoding="utf-8")

    manifest = {
        "home": ds.home,
        "year_range": list(ds.year_range),
        "files": {
            name: _sha256(out / name)
            for name in ("flows.csv", "domestic.csv", "gdp.csv", "classification.csv")
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out
