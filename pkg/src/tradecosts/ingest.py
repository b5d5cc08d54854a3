"""Readers for the four canonical CSV formats and the flow-source merge.

Formats (UTF-8, comma-delimited, one header row):

    flows.csv          year,reporter,partner,export_fob_kusd[,source]
    domestic.csv       year,country,domestic_trade_kusd
                       or sectoral: year,country,sector,value_kusd
    gdp.csv            year,country,gdp_kusd          (WLD rows = world total)
    classification.csv country,region,dev_status,bri

Multiple flow sources are merged by priority: the preferred source always
wins, less-preferred sources only fill cells the preferred ones lack, and
every merged cell keeps a tag naming the source it came from. This mirrors
the usual statistics workflow of a primary bilateral-trade database
supplemented by secondary ones.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import (
    ChecksumMismatch,
    DataError,
    DuplicateKey,
    EmptyInput,
    InvalidCountry,
    NegativeValue,
    NonpositiveValue,
    RowError,
    SchemaMismatch,
    UnknownEnum,
    UnparsableNumber,
)
from .panels import (
    DEV_STATUSES,
    REGIONS,
    WORLD,
    Classification,
    CountryClass,
    Dataset,
    DomesticPanel,
    FlowKey,
    FlowPanel,
    GdpPanel,
    build_dataset,
)

FLOW_HEADER = ["year", "reporter", "partner", "export_fob_kusd"]
DOMESTIC_HEADER = ["year", "country", "domestic_trade_kusd"]
DOMESTIC_SECTOR_HEADER = ["year", "country", "sector", "value_kusd"]
GDP_HEADER = ["year", "country", "gdp_kusd"]
CLASS_HEADER = ["country", "region", "dev_status", "bri"]

# Goods sectors aggregated into one domestic-trade figure; services are
# out of scope and silently skipped in sectoral files.
GOODS_SECTORS = ("agriculture", "mining_energy", "manufacturing")
SKIPPED_SECTORS = ("services",)


@dataclass
class SourceTable:
    """One parsed flow source, ready for the priority merge."""

    source_id: str
    priority: int
    values: dict[FlowKey, float] = field(default_factory=dict)
    cell_sources: dict[FlowKey, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)


def _read_rows(path: str | Path, expected_headers: list[list[str]]) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        if header not in expected_headers:
            raise SchemaMismatch(
                f"{path}: header {','.join(header)!r} does not match any of "
                + " | ".join(",".join(h) for h in expected_headers)
            )
        rows = [row for row in reader if row and row != [""]]
    return header, rows


def _number(text: str, row: int, what: str) -> float:
    # Plain decimal only; thousands separators and blanks are rejected so
    # that values round-trip bit-exactly.
    try:
        return float(text)
    except ValueError:
        raise UnparsableNumber(f"cannot parse {what} {text!r}", row=row) from None


def _year(text: str, row: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise UnparsableNumber(f"cannot parse year {text!r}", row=row) from None


def _code(text: str, row: int) -> str:
    code = text.strip()
    if not code or code != code.upper():
        raise InvalidCountry(f"bad country code {text!r}", row=row)
    return code


def _finish(errors: list[RowError], collect: bool) -> list[RowError]:
    if errors and not collect:
        first = errors[0]
        first.report = errors
        raise first
    return errors


def read_flows(
    path: str | Path,
    source_id: str | None = None,
    priority: int = 0,
    collect_errors: bool = False,
) -> SourceTable:
    """Parse one bilateral flow file into a SourceTable.

    The whole file is parsed and every malformed row is recorded; unless
    ``collect_errors`` is set the first row error is raised with the full
    report attached. An optional trailing ``source`` column (written by
    dataset export) carries per-cell provenance through round trips.
    """
    header, rows = _read_rows(path, [FLOW_HEADER, FLOW_HEADER + ["source"]])
    has_source_col = len(header) == 5
    if source_id is None:
        source_id = Path(path).stem

    table = SourceTable(source_id=source_id, priority=priority)
    errors: list[RowError] = []
    for i, row in enumerate(rows, start=1):
        try:
            if len(row) != len(header):
                raise UnparsableNumber(f"expected {len(header)} fields, got {len(row)}", row=i)
            year = _year(row[0], i)
            reporter = _code(row[1], i)
            partner = _code(row[2], i)
            value = _number(row[3], i, "export value")
            if reporter == partner:
                raise InvalidCountry(f"reporter equals partner ({reporter})", row=i)
            if WORLD in (reporter, partner):
                raise InvalidCountry(f"{WORLD} cannot appear in flows", row=i)
            if value < 0:
                raise NegativeValue(f"negative export value {row[3]}", row=i)
            key = (reporter, partner, year)
            if key in table.values:
                raise DuplicateKey(f"duplicate flow cell {reporter}->{partner} in {year}", row=i)
            table.values[key] = value
            cell_src = row[4].strip() if has_source_col and row[4].strip() else source_id
            table.cell_sources[key] = cell_src
        except RowError as err:
            errors.append(err)
    table.parse_errors = _finish(errors, collect_errors)  # type: ignore[attr-defined]
    return table


def merge_flow_sources(tables: list[SourceTable]) -> FlowPanel:
    """Merge flow sources by priority (lower number preferred).

    For every (reporter, partner, year) the value comes from the most
    preferred table containing that key; a cell present in a preferred
    source is never overwritten by a less preferred one. Each cell is
    tagged with the winning source id.
    """
    if not tables:
        raise EmptyInput("no flow sources to merge")
    priorities = [t.priority for t in tables]
    if len(set(priorities)) != len(priorities):
        raise DataError(f"source priorities must be distinct, got {priorities}")

    panel = FlowPanel()
    # Apply least-preferred first so later (preferred) sources overwrite.
    for table in sorted(tables, key=lambda t: t.priority, reverse=True):
        panel.values.update(table.values)
        panel.sources.update(table.cell_sources)
    return panel


def read_domestic(path: str | Path, collect_errors: bool = False) -> DomesticPanel:
    """Parse domestic trade, either pre-aggregated or by goods sector.

    Sectoral files are summed over the goods sectors (agriculture,
    mining_energy, manufacturing) per country-year; services rows are
    skipped.
    """
    header, rows = _read_rows(path, [DOMESTIC_HEADER, DOMESTIC_SECTOR_HEADER])
    sectoral = header == DOMESTIC_SECTOR_HEADER

    panel = DomesticPanel()
    seen: set[tuple] = set()
    errors: list[RowError] = []
    for i, row in enumerate(rows, start=1):
        try:
            if len(row) != len(header):
                raise UnparsableNumber(f"expected {len(header)} fields, got {len(row)}", row=i)
            year = _year(row[0], i)
            country = _code(row[1], i)
            if sectoral:
                sector = row[2].strip()
                value = _number(row[3], i, "sector value")
                if sector in SKIPPED_SECTORS:
                    continue
                if sector not in GOODS_SECTORS:
                    raise UnknownEnum(f"unknown sector {sector!r}", row=i)
                dup_key = (country, year, sector)
                if dup_key in seen:
                    raise DuplicateKey(f"duplicate sector row {country}/{sector} in {year}", row=i)
                seen.add(dup_key)
                if value < 0:
                    raise NegativeValue(f"negative sector value {row[3]}", row=i)
                key = (country, year)
                panel.values[key] = panel.values.get(key, 0.0) + value
            else:
                value = _number(row[2], i, "domestic trade")
                key = (country, year)
                if key in seen:
                    raise DuplicateKey(f"duplicate domestic row {country} in {year}", row=i)
                seen.add(key)
                if value <= 0:
                    raise NegativeValue(f"domestic trade must be positive, got {row[2]}", row=i)
                panel.values[key] = value
        except RowError as err:
            errors.append(err)
    _finish(errors, collect_errors)
    return panel


def read_gdp(path: str | Path, collect_errors: bool = False) -> GdpPanel:
    """Parse nominal GDP. WLD rows are ordinary rows here; their presence
    for every panel year is enforced later, at dataset build time."""
    _, rows = _read_rows(path, [GDP_HEADER])
    panel = GdpPanel()
    errors: list[RowError] = []
    for i, row in enumerate(rows, start=1):
        try:
            if len(row) != 3:
                raise UnparsableNumber(f"expected 3 fields, got {len(row)}", row=i)
            year = _year(row[0], i)
            country = _code(row[1], i)
            value = _number(row[2], i, "GDP")
            if value <= 0:
                raise NegativeValue(f"GDP must be positive, got {row[2]}", row=i)
            key = (country, year)
            if key in panel.values:
                raise DuplicateKey(f"duplicate GDP row {country} in {year}", row=i)
            panel.values[key] = value
        except RowError as err:
            errors.append(err)
    _finish(errors, collect_errors)
    return panel


def read_classification(path: str | Path, collect_errors: bool = False) -> Classification:
    _, rows = _read_rows(path, [CLASS_HEADER])
    classes: Classification = {}
    errors: list[RowError] = []
    for i, row in enumerate(rows, start=1):
        try:
            if len(row) != 4:
                raise UnparsableNumber(f"expected 4 fields, got {len(row)}", row=i)
            country = _code(row[0], i)
            region, dev_status, bri = row[1].strip(), row[2].strip(), row[3].strip()
            if region not in REGIONS:
                raise UnknownEnum(f"unknown region {region!r}", row=i)
            if dev_status not in DEV_STATUSES:
                raise UnknownEnum(f"unknown dev_status {dev_status!r}", row=i)
            if bri not in ("true", "false"):
                raise UnknownEnum(f"bri must be true or false, got {bri!r}", row=i)
            if country in classes:
                raise DuplicateKey(f"duplicate classification for {country}", row=i)
            classes[country] = CountryClass(region=region, dev_status=dev_status, bri=bri == "true")
        except RowError as err:
            errors.append(err)
    _finish(errors, collect_errors)
    return classes


def bundled_classification() -> Classification:
    """The classification shipped with the package: a 31-economy sample
    (one Southeast Asian focal economy plus its 30 major partners) with
    the six-region layout, 7/23 development split, and 12/18 BRI split."""
    ref = resources.files("tradecosts").joinpath("data/classification.csv")
    with resources.as_file(ref) as path:
        return read_classification(path)


# --- dataset directory ------------------------------------------------------

def _flow_sources_in(data_dir: Path) -> list[tuple[Path, str, int]]:
    """Flow files in priority order: flows.csv first (priority 0), then
    supplements named flows.<k>.<SOURCE>.csv with k = 1, 2, ..."""
    main = data_dir / "flows.csv"
    found: list[tuple[Path, str, int]] = []
    if main.exists():
        found.append((main, "flows", 0))
    for path in sorted(data_dir.glob("flows.*.csv")):
        parts = path.name[: -len(".csv")].split(".")
        if len(parts) != 3:
            raise SchemaMismatch(
                f"{path.name}: supplemental flow files must be named flows.<k>.<SOURCE>.csv"
            )
        try:
            prio = int(parts[1])
        except ValueError:
            raise SchemaMismatch(f"{path.name}: priority {parts[1]!r} is not an integer") from None
        found.append((path, parts[2], prio))
    if not found:
        raise DataError(f"no flows.csv in {data_dir}")
    return found


def read_dataset(
    data_dir: str | Path,
    home: str | None = None,
    year_range: tuple[int, int] | None = None,
) -> Dataset:
    """Load a canonical dataset directory and build a validated Dataset.

    If a manifest.json is present (written by dataset export) it supplies
    the focal economy and year range and its checksums are verified.
    classification.csv falls back to the bundled default when absent.
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")

    manifest_path = data_dir / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        for name, expected in manifest.get("files", {}).items():
            actual = hashlib.sha256((data_dir / name).read_bytes()).hexdigest()
            if actual != expected:
                raise ChecksumMismatch(
                    f"{name} does not match manifest checksum; refresh or delete manifest.json"
                )
        home = home or manifest.get("home")
        if year_range is None and manifest.get("year_range"):
            year_range = tuple(manifest["year_range"])  # type: ignore[assignment]

    if home is None:
        raise DataError("focal economy not given and no manifest.json to supply it")

    tables = [
        read_flows(path, source_id=sid, priority=prio)
        for path, sid, prio in _flow_sources_in(data_dir)
    ]
    flows = merge_flow_sources(tables)
    domestic = read_domestic(data_dir / "domestic.csv")
    gdp = read_gdp(data_dir / "gdp.csv")
    cls_path = data_dir / "classification.csv"
    classes = read_classification(cls_path) if cls_path.exists() else bundled_classification()

    return build_dataset(flows, domestic, gdp, classes, home, year_range)
