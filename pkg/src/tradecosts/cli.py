"""Command-line interface.

Subcommands:

    validate    build the dataset and report per-partner coverage
    costs       bilateral / pooled-average / group tariff-equivalent series
    decompose   growth decomposition per pair and per group
    synth       generate a synthetic world as a canonical dataset directory
    selftest    run the gravity recovery suite (exit 0 iff it passes)
    replicate   full reference pipeline (focal KHM, sigma 8, base 1993-1995)

Every flag can be set through an environment variable with the
TRADECOSTS_ prefix (e.g. TRADECOSTS_DATA, TRADECOSTS_SIGMA=5,8).
Data goes to stdout (or --out), diagnostics to stderr. Exit codes:
0 ok, 1 data/validation error, 2 numerical failure, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import costs as tc
from . import decomposition as dc
from .errors import DataError, NumericalError, TradeCostsError, UsageError
from .gravity import ScenarioConfig, run_recovery_suite, synth_world, world_to_dataset
from .ingest import read_dataset
from .panels import (
    DEV_STATUSES,
    REGIONS,
    Dataset,
    coverage_report,
    write_dataset,
)

ENV_PREFIX = "TRADECOSTS_"
FORMATS = ("text", "csv", "json")
SWEEP_SIGMAS = (5.0, 8.0, 10.0)
RECOVERY_THRESHOLD = 1e-9


def _env(name: str, default: str | None = None) -> str | None:
    return os.environ.get(ENV_PREFIX + name, default)


@dataclass
class RunConfig:
    data_dir: Path | None
    home: str | None
    sigmas: list[float]
    start: int | None
    end: int | None
    base_window: tuple[int, int]
    fmt: str
    strict: bool
    jobs: int
    out: Path | None

    def validate(self) -> None:
        for sigma in self.sigmas:
            if not sigma > 1:
                raise UsageError(f"--sigma must be > 1, got {sigma}")
        if self.fmt not in FORMATS:
            raise UsageError(f"--format must be one of {FORMATS}")
        if self.base_window[0] > self.base_window[1]:
            raise UsageError(f"--base-window start exceeds end: {self.base_window}")
        if self.jobs < 1:
            raise UsageError(f"--jobs must be >= 1, got {self.jobs}")

    def check_window_in_range(self, ds: Dataset) -> None:
        lo, hi = ds.year_range
        if self.base_window[0] < lo or self.base_window[1] > hi:
            raise UsageError(
                f"base window {self.base_window} outside dataset years {lo}-{hi}"
            )


def _parse_base_window(text: str) -> tuple[int, int]:
    try:
        first, last = text.split(":")
        return int(first), int(last)
    except ValueError:
        raise UsageError(f"--base-window must look like 1993:1995, got {text!r}") from None


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    sigmas = list(args.sigma) if args.sigma else []
    if not sigmas:
        env_sigma = _env("SIGMA")
        if env_sigma:
            sigmas = [float(s) for s in env_sigma.split(",") if s]
    if getattr(args, "sweep", False):
        sigmas = list(SWEEP_SIGMAS)
    if not sigmas:
        sigmas = [8.0]

    config = RunConfig(
        data_dir=Path(args.data) if args.data else None,
        home=args.home,
        sigmas=sigmas,
        start=args.start,
        end=args.end,
        base_window=_parse_base_window(args.base_window),
        fmt=args.format,
        strict=args.strict,
        jobs=args.jobs,
        out=Path(args.out) if args.out else None,
    )
    config.validate()
    return config


def _load(config: RunConfig) -> Dataset:
    if config.data_dir is None:
        raise UsageError("--data is required for this subcommand")
    return read_dataset(config.data_dir, home=config.home)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _parallel(fn, items, jobs: int) -> list:
    # ThreadPoolExecutor.map preserves submission order, so output is the
    # same regardless of worker count.
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _fmt_full(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _fmt_2dp(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


# --- validate -----------------------------------------------------------------

def cmd_validate(config: RunConfig, args: argparse.Namespace) -> int:
    ds = _load(config)
    report = coverage_report(ds)

    source_counts: dict[str, int] = {}
    for source in ds.flows.sources.values():
        source_counts[source] = source_counts.get(source, 0) + 1

    missing_by_partner: dict[str, list[str]] = {}
    for partner, year, slot in report.missing:
        missing_by_partner.setdefault(partner, []).append(f"{slot}@{year}")

    if config.fmt == "json":
        payload = {
            "home": ds.home,
            "year_range": list(ds.year_range),
            "partners": [
                {
                    "partner": pc.partner,
                    "first_complete_year": pc.first_complete_year,
                    "last_complete_year": pc.last_complete_year,
                    "n_missing": pc.n_missing,
                    "missing_cells": missing_by_partner.get(pc.partner, []),
                }
                for pc in report.partners
            ],
            "n_slots": report.n_slots,
            "n_present": report.n_present,
            "n_missing": report.n_missing,
            "flow_sources": source_counts,
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", config.out)
    elif config.fmt == "csv":
        lines = ["partner,first_complete_year,last_complete_year,n_missing,missing_cells"]
        for pc in report.partners:
            cells = "+".join(missing_by_partner.get(pc.partner, []))
            first = "" if pc.first_complete_year is None else pc.first_complete_year
            last = "" if pc.last_complete_year is None else pc.last_complete_year
            lines.append(f"{pc.partner},{first},{last},{pc.n_missing},{cells}")
        _emit("\n".join(lines) + "\n", config.out)
    else:
        lines = [
            f"dataset: home={ds.home} years={ds.year_range[0]}-{ds.year_range[1]} "
            f"partners={len(ds.partners)}",
            "flow sources: "
            + ", ".join(f"{src}={n}" for src, n in sorted(source_counts.items())),
            f"coverage: {report.n_present} of {report.n_slots} slots present, "
            f"{report.n_missing} missing cells",
        ]
        for pc in report.partners:
            if pc.first_complete_year is None:
                lines.append(f"  {pc.partner}: no complete year")
            else:
                lines.append(
                    f"  {pc.partner}: complete {pc.first_complete_year}-"
                    f"{pc.last_complete_year}, {pc.n_missing} missing"
                )
        for partner, year, slot in report.missing:
            lines.append(f"  missing {partner} {year} {slot}")
        _emit("\n".join(lines) + "\n", config.out)
    return 0


# --- costs ----------------------------------------------------------------------

GROUP_FAMILIES = (
    ("bri", dict(bri=True)),
    ("non-bri", dict(bri=False)),
    ("dev:developed", dict(dev_status="developed")),
    ("dev:developing_emerging", dict(dev_status="developing_emerging")),
)


def _parse_group_spec(ds: Dataset, spec: str) -> tuple[str, list[str]]:
    if spec == "all":
        return "all", ds.partners
    if spec == "bri":
        return "bri", tc.select_partners(ds, bri=True)
    if spec == "non-bri":
        return "non-bri", tc.select_partners(ds, bri=False)
    if spec.startswith("region:"):
        region = spec[len("region:"):]
        if region not in REGIONS:
            raise UsageError(f"unknown region {region!r}; choose from {REGIONS}")
        return spec, tc.select_partners(ds, region=region)
    if spec.startswith("dev:"):
        status = spec[len("dev:"):]
        if status not in DEV_STATUSES:
            raise UsageError(f"unknown dev status {status!r}; choose from {DEV_STATUSES}")
        return spec, tc.select_partners(ds, dev_status=status)
    raise UsageError(
        f"bad group spec {spec!r}; use all, bri, non-bri, region:<name> or dev:<status>"
    )


def _parse_pair(ds: Dataset, text: str) -> str:
    codes = [c.strip() for c in text.split(",")]
    if len(codes) != 2:
        raise UsageError(f"--pair needs two codes like KHM,THA, got {text!r}")
    if ds.home not in codes:
        raise UsageError(f"one side of --pair must be the focal economy {ds.home}")
    partner = codes[1] if codes[0] == ds.home else codes[0]
    if partner not in ds.partners:
        raise DataError(f"unknown partner {partner}")
    return partner


def _parse_overrides(specs: list[str]) -> dict[str, int]:
    overrides: dict[str, int] = {}
    for spec in specs:
        try:
            code, year = spec.split("=")
            overrides[code.strip()] = int(year)
        except ValueError:
            raise UsageError(f"--end-override must look like HKG=2016, got {spec!r}") from None
    return overrides


def cmd_costs(config: RunConfig, args: argparse.Namespace) -> int:
    ds = _load(config)
    years = [y for y in ds.years if (config.start is None or y >= config.start)
             and (config.end is None or y <= config.end)]
    if not years:
        raise UsageError("no years left after --start/--end filtering")
    overrides = _parse_overrides(args.end_override or [])

    # Resolve scope into (label, kind, payload) work items.
    items: list[tuple[str, str, object]] = []
    if args.pair:
        for text in args.pair:
            partner = _parse_pair(ds, text)
            items.append((partner, "pair", partner))
    if args.all_pairs:
        for partner in ds.partners:
            items.append((partner, "pair", partner))
    for spec in args.group or []:
        label, members = _parse_group_spec(ds, spec)
        items.append((label, "group", members))
    if args.average and not args.group:
        items.append(("AVG", "group", ds.partners))
    if not items:
        raise UsageError("choose a scope: --pair, --all-pairs, --average or --group")

    def compute(task: tuple[float, tuple[str, str, object]]) -> tc.TradeCostSeries:
        sigma, (label, kind, payload) = task
        if kind == "pair":
            return tc.pair_series(ds, payload, sigma, years=years)
        return tc.average_tau_series(
            ds, payload, years=years, sigma=sigma, strict=config.strict,
            label=label, method=args.group_method,
        )

    tasks = [(sigma, item) for sigma in config.sigmas for item in items]
    all_series = _parallel(compute, tasks, config.jobs)

    rows: list[dict] = []
    summaries: list[dict] = []
    for (sigma, (label, kind, _)), series in zip(tasks, all_series):
        for year in series.years:
            rows.append(
                {
                    "year": year,
                    "i": ds.home,
                    "j_or_group": label,
                    "sigma": sigma,
                    "tau_percent": series.tau_percent(year),
                    "flag": series.flags.get(year, ""),
                }
            )
        summary = tc.summarize_series(
            series, start=config.start, end=config.end,
            end_override=overrides.get(label),
        )
        if summary is not None:
            summaries.append(
                {
                    "j_or_group": label,
                    "sigma": sigma,
                    "start_year": summary.start_year,
                    "end_year": summary.end_year,
                    "tau_start_percent": 100.0 * summary.tau_start,
                    "tau_end_percent": 100.0 * summary.tau_end,
                    "pct_change": summary.pct_change,
                    "annualized_pct": summary.annualized_pct,
                    "end_substituted": summary.substituted_end,
                }
            )

    rows.sort(key=lambda r: (r["sigma"], r["year"], r["j_or_group"]))
    summaries.sort(key=lambda s: (s["sigma"], s["j_or_group"]))

    if config.fmt == "json":
        _emit(json.dumps({"rows": rows, "summaries": summaries}, indent=2, sort_keys=True) + "\n",
              config.out)
        return 0

    lines = ["year,i,j_or_group,sigma,tau_percent,tau_percent_2dp,flag"]
    for row in rows:
        lines.append(
            f"{row['year']},{row['i']},{row['j_or_group']},{_fmt_full(row['sigma'])},"
            f"{_fmt_full(row['tau_percent'])},{_fmt_2dp(row['tau_percent'])},{row['flag']}"
        )
    for s in summaries:
        lines.append(
            f"# summary,{s['j_or_group']},sigma={_fmt_full(s['sigma'])},"
            f"start={s['start_year']}:{_fmt_2dp(s['tau_start_percent'])},"
            f"end={s['end_year']}:{_fmt_2dp(s['tau_end_percent'])},"
            f"pct_change={_fmt_2dp(s['pct_change'])},"
            f"annualized={_fmt_2dp(s['annualized_pct'])}"
            + (",end_substituted" if s["end_substituted"] else "")
        )
    _emit("\n".join(lines) + "\n", config.out)
    return 0


# --- decompose -------------------------------------------------------------------

def _decomposition_rows(
    ds: Dataset,
    config: RunConfig,
    partners: list[str],
    end_year: int,
    growth_definition: str,
    with_groups: bool,
) -> list[dc.DecompositionRecord]:
    window = list(range(config.base_window[0], config.base_window[1] + 1))
    sigma = config.sigmas[0]

    def compute(partner: str) -> dc.DecompositionRecord | Exception:
        try:
            base = dc.smooth_base(ds, ds.home, partner, window)
            return dc.decompose_pair(
                ds, ds.home, partner, base, end_year, sigma,
                growth_definition=growth_definition,
            )
        except TradeCostsError as err:
            return err

    results = _parallel(compute, partners, config.jobs)
    records: list[dc.DecompositionRecord] = []
    for partner, result in zip(partners, results):
        if isinstance(result, Exception):
            if config.strict:
                raise result
            print(f"decompose: skipping {ds.home}-{partner}: {result}", file=sys.stderr)
        else:
            records.append(result)

    rows = list(records)
    if with_groups and records:
        by_label = {r.label: r for r in records}
        weights = dc.gdp_pair_weights(ds, [r.label.split("-", 1)[1] for r in records], end_year)

        def group_rows() -> list[tuple[str, list[dc.DecompositionRecord]]]:
            groups: list[tuple[str, list[dc.DecompositionRecord]]] = []
            for region in REGIONS:
                members = tc.select_partners(ds, region=region)
                groups.append((f"region:{region}", members))
            for label, kwargs in GROUP_FAMILIES:
                groups.append((label, tc.select_partners(ds, **kwargs)))
            groups.append(("all", ds.partners))
            return [
                (label, [by_label[f"{ds.home}-{p}"] for p in members
                         if f"{ds.home}-{p}" in by_label])
                for label, members in groups
            ]

        for label, members in group_rows():
            if not members:
                continue
            usable, missing_weight = [], []
            for record in members:
                (usable if record.label in weights else missing_weight).append(record)
            if missing_weight:
                names = "+".join(r.label for r in missing_weight)
                if config.strict:
                    raise dc.WeightMissing(names)
                print(f"decompose: no weight for {names}; dropped from {label}",
                      file=sys.stderr)
            if usable:
                rows.append(dc.aggregate_decomposition(usable, weights, label))
    return rows


def _emit_decomposition(rows: list[dc.DecompositionRecord], config: RunConfig) -> None:
    if config.fmt == "json":
        payload = [
            {
                "scope": r.scope,
                "pair_or_group": r.label,
                "base_window": f"{r.base_window[0]}:{r.base_window[1]}",
                "end_year": r.end_year,
                "growth_pct": r.growth_pct,
                "A_pct": r.a_pct,
                "B_pct": r.b_pct,
                "C_pct": r.c_pct,
                "sum_pct": round(r.sum_pct, 2),
                "flags": r.flags,
            }
            for r in rows
        ]
        _emit(json.dumps({"rows": payload}, indent=2, sort_keys=True) + "\n", config.out)
        return
    lines = ["scope,pair_or_group,base_window,end_year,growth_pct,A_pct,B_pct,C_pct,sum_pct,flags"]
    for r in rows:
        lines.append(
            f"{r.scope},{r.label},{r.base_window[0]}:{r.base_window[1]},{r.end_year},"
            f"{_fmt_full(r.growth_pct)},{_fmt_full(r.a_pct)},{_fmt_full(r.b_pct)},"
            f"{_fmt_full(r.c_pct)},{_fmt_2dp(r.sum_pct)},{r.flags}"
        )
    _emit("\n".join(lines) + "\n", config.out)


def cmd_decompose(config: RunConfig, args: argparse.Namespace) -> int:
    ds = _load(config)
    config.check_window_in_range(ds)
    end_year = config.end if config.end is not None else ds.year_range[1]

    if args.pair:
        partners = [_parse_pair(ds, text) for text in args.pair]
        with_groups = False
    else:
        partners = ds.partners
        with_groups = True

    rows = _decomposition_rows(
        ds, config, partners, end_year, args.growth_def, with_groups
    )
    _emit_decomposition(rows, config)
    return 0


# --- synth / selftest ---------------------------------------------------------------

def cmd_synth(config: RunConfig, args: argparse.Namespace) -> int:
    scenario = ScenarioConfig.from_file(args.scenario)
    world = synth_world(scenario)
    ds = world_to_dataset(world)
    if config.out is None:
        raise UsageError("synth needs --out DIR for the dataset directory")
    write_dataset(ds, config.out)
    sys.stdout.write(
        f"wrote synthetic dataset: n={scenario.n} years={world.years[0]}-{world.years[-1]} "
        f"seed={scenario.seed} sigma={_fmt_full(scenario.sigma)} dir={config.out}\n"
    )
    return 0


def cmd_selftest(config: RunConfig, args: argparse.Namespace) -> int:
    report = run_recovery_suite(n_worlds=args.worlds, sigma=config.sigmas[0])
    ok = report.passed(RECOVERY_THRESHOLD)
    sys.stdout.write(
        f"recovery suite: worlds={report.n_worlds} sigma={_fmt_full(report.sigma)} "
        f"max_error={report.max_error:.3e} threshold={RECOVERY_THRESHOLD:.0e} "
        f"{'PASS' if ok else 'FAIL'}\n"
    )
    print(f"selftest elapsed: {report.elapsed_s:.2f}s worst_seed={report.worst_seed}",
          file=sys.stderr)
    return 0 if ok else 2


# --- replicate ---------------------------------------------------------------------

def cmd_replicate(config: RunConfig, args: argparse.Namespace) -> int:
    """Reference pipeline: bilateral + average + group series and the full
    decomposition at the standard configuration, written as CSV files."""
    if config.out is None:
        raise UsageError("replicate needs --out DIR")
    ds = _load(config)
    config.check_window_in_range(ds)
    sigma = config.sigmas[0]
    end_year = config.end if config.end is not None else ds.year_range[1]
    overrides = _parse_overrides(args.end_override or [])
    out = config.out
    out.mkdir(parents=True, exist_ok=True)

    series_by_partner = {
        partner: tc.pair_series(ds, partner, sigma) for partner in ds.partners
    }

    lines = ["region,partner,start_year,end_year,tau_start_pct,tau_end_pct,pct_change,"
             "tau_start_2dp,tau_end_2dp,pct_change_2dp,flags"]
    for partner in sorted(ds.partners, key=lambda p: (ds.classes[p].region, p)):
        summary = tc.summarize_series(
            series_by_partner[partner], end=end_year, end_override=overrides.get(partner)
        )
        if summary is None:
            lines.append(f"{ds.classes[partner].region},{partner},,,,,,,,,no_usable_years")
            continue
        flags = "end_substituted" if summary.substituted_end else ""
        lines.append(
            f"{ds.classes[partner].region},{partner},{summary.start_year},{summary.end_year},"
            f"{_fmt_full(100 * summary.tau_start)},{_fmt_full(100 * summary.tau_end)},"
            f"{_fmt_full(summary.pct_change)},{_fmt_2dp(100 * summary.tau_start)},"
            f"{_fmt_2dp(100 * summary.tau_end)},{_fmt_2dp(summary.pct_change)},{flags}"
        )
    (out / "bilateral_costs.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    avg = tc.average_tau_series(ds, ds.partners, sigma=sigma, label="AVG")
    lines = ["year,tau_pct,tau_pct_2dp,flag"]
    for year in avg.years:
        tau = avg.tau_percent(year)
        lines.append(f"{year},{_fmt_full(tau)},{_fmt_2dp(tau)},{avg.flags.get(year, '')}")
    (out / "average_costs.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["year,group,tau_pct,tau_pct_2dp,flag"]
    group_series = []
    for label, kwargs in GROUP_FAMILIES:
        members = tc.select_partners(ds, **kwargs)
        if members:
            group_series.append(tc.average_tau_series(ds, members, sigma=sigma, label=label))
    for series in group_series:
        for year in series.years:
            tau = series.tau_percent(year)
            lines.append(
                f"{year},{series.label},{_fmt_full(tau)},{_fmt_2dp(tau)},"
                f"{series.flags.get(year, '')}"
            )
    (out / "group_costs.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # Decomposition with both growth definitions side by side, so a user
    # can see which one matches an external benchmark.
    rows_geo = _decomposition_rows(ds, config, ds.partners, end_year, "geomean", True)
    rows_prod = _decomposition_rows(ds, config, ds.partners, end_year, "product", False)
    growth_prod = {r.label: r.growth_pct for r in rows_prod}
    lines = ["scope,pair_or_group,base_window,end_year,growth_geomean_pct,growth_product_pct,"
             "A_pct,B_pct,C_pct,sum_pct,flags"]
    for r in rows_geo:
        prod = growth_prod.get(r.label)
        lines.append(
            f"{r.scope},{r.label},{r.base_window[0]}:{r.base_window[1]},{r.end_year},"
            f"{_fmt_full(r.growth_pct)},{_fmt_full(prod)},{_fmt_full(r.a_pct)},"
            f"{_fmt_full(r.b_pct)},{_fmt_full(r.c_pct)},{_fmt_2dp(r.sum_pct)},{r.flags}"
        )
    (out / "decomposition.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    sys.stdout.write(
        f"replicate: home={ds.home} sigma={_fmt_full(sigma)} "
        f"base={config.base_window[0]}:{config.base_window[1]} end={end_year} "
        f"partners={len(ds.partners)} wrote 4 files to {out}\n"
    )
    return 0


# --- parser / dispatch ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):          # usage errors exit with 3
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", default=_env("DATA"), help="dataset directory")
    parser.add_argument("--home", default=_env("HOME_CODE"), help="focal economy code")
    parser.add_argument("--sigma", type=float, action="append",
                        help="elasticity of substitution; repeat for a sweep (default 8)")
    parser.add_argument("--start", type=int,
                        default=int(_env("START")) if _env("START") else None)
    parser.add_argument("--end", type=int,
                        default=int(_env("END")) if _env("END") else None)
    parser.add_argument("--base-window", default=_env("BASE_WINDOW", "1993:1995"),
                        help="base period for decomposition, e.g. 1993:1995")
    parser.add_argument("--format", choices=FORMATS, default=_env("FORMAT", "csv"))
    parser.add_argument("--strict", action="store_true",
                        default=_env("STRICT", "") in ("1", "true"),
                        help="abort on missing cells instead of dropping/flagging")
    parser.add_argument("--jobs", type=int, default=int(_env("JOBS", "1")))
    parser.add_argument("--out", default=_env("OUT"), help="output file (or directory)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tradecosts", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="build the dataset and report coverage")
    _add_common(p)
    p.set_defaults(func=cmd_validate, format_default="text")

    p = sub.add_parser("costs", help="tariff-equivalent cost series")
    _add_common(p)
    p.add_argument("--pair", action="append", help="pair like KHM,THA (repeatable)")
    p.add_argument("--all-pairs", action="store_true", help="every partner")
    p.add_argument("--average", action="store_true", help="pooled average over all partners")
    p.add_argument("--group", action="append",
                   help="pooled average over a group: all, bri, non-bri, "
                        "region:<name>, dev:<status> (repeatable)")
    p.add_argument("--group-method", choices=("pooled", "bilateral-mean"), default="pooled",
                   help="group series: pooled formula or xbar-weighted mean of bilateral tau")
    p.add_argument("--sweep", action="store_true", help="sigma sensitivity sweep at 5, 8, 10")
    p.add_argument("--end-override", action="append",
                   help="alternate end year per partner, e.g. HKG=2016 (repeatable)")
    p.set_defaults(func=cmd_costs)

    p = sub.add_parser("decompose", help="growth decomposition")
    _add_common(p)
    p.add_argument("--pair", action="append", help="pair like KHM,CHN (repeatable)")
    p.add_argument("--growth-def", choices=("geomean", "product"), default="geomean",
                   help="growth of sqrt(x_ij*x_ji) or of the product")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("synth", help="write a synthetic dataset directory")
    _add_common(p)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("selftest", help="gravity recovery suite")
    _add_common(p)
    p.add_argument("--worlds", type=int, default=100)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("replicate", help="full reference pipeline to an output directory")
    _add_common(p)
    p.add_argument("--end-override", action="append", default=["HKG=2016"],
                   help="alternate end year per partner (default HKG=2016)")
    p.set_defaults(func=cmd_replicate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "validate" and args.format == "csv" and _env("FORMAT") is None:
            # validate defaults to the human-readable report
            if "--format" not in (argv if argv is not None else sys.argv):
                config.fmt = "text"
        return args.func(config, args)
    except UsageError as err:
        print(f"tradecosts: usage error: {err}", file=sys.stderr)
        return 3
    except NumericalError as err:
        print(f"tradecosts: numerical failure: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"tradecosts: data error: {err}", file=sys.stderr)
        return 1
    except TradeCostsError as err:
        print(f"tradecosts: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
