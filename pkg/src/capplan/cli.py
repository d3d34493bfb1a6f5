"""Command-line interface.

Subcommands: synth, ingest, demand, trend, scale, scenario, pipeline.
Every subcommand accepts ``--config FILE`` (TOML); values in the section named
after the subcommand become flag defaults, and explicit flags win. The
environment variable ``CAPPLAN_CONFIG`` supplies a default config path.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import demand, growth, ingest, report, scaling, scenario, synth
from .errors import CapPlanError, DomainError

CONFIG_ENV = "CAPPLAN_CONFIG"


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


def _names(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return tuple(text)
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _date(text):
    if text is None or isinstance(text, date):
        return text
    return date.fromisoformat(str(text))


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


# -- column mapping shared by ingest and demand ------------------------------

def _add_mapping_flags(p):
    p.add_argument("--input", required=False, help="metric CSV file")
    p.add_argument("--timestamp-col", default="timestamp")
    p.add_argument("--util-col", default="U")
    p.add_argument("--regressors", default=None, help="comma-separated regressor columns")
    p.add_argument("--ignore", default="", help="comma-separated columns to skip")
    p.add_argument("--window", type=float, default=None,
                   help="aggregation window in minutes (omit to use samples as-is)")


def _mapping(args) -> ingest.ColumnMapping:
    return ingest.ColumnMapping(args.timestamp_col, args.util_col, _names(args.regressors),
                                _names(args.ignore) or ())


def _read_series(args) -> ingest.MetricSeries:
    if not args.input:
        raise DomainError("--input is required")
    with open(args.input, newline="") as fh:
        series = ingest.parse_metric_csv(fh, _mapping(args))
    if args.window:
        series = ingest.aggregate_window(series, timedelta(minutes=args.window))
    return series


# -- subcommands --------------------------------------------------------------

def cmd_synth(args, out: Path):
    days = synth.generate_days(
        args.days, _date(args.start), args.scale, args.rate, args.seed,
        coefficients=_floats(args.coefficients), noise=args.noise,
        regressor_noise=args.regressor_noise, sample_minutes=args.sample_minutes,
    )
    series, truth = synth.concat_days(days)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(ingest.write_metric_csv(series))
    (out / "truth.csv").write_text(synth.truth_csv(series.timestamps, truth))
    print(f"wrote {len(series)} samples to {out / 'metrics.csv'}")


def cmd_ingest(args, out: Path):
    series = _read_series(args)
    checked = ingest.validate_series(series)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ingested.csv").write_text(ingest.write_metric_csv(series))
    report.write_json(out / "validation.json", {"rows": len(series), **checked.to_dict()})
    print(f"{len(series)} rows, {checked.findings} findings")


def run_demand(series, threshold, start, scope):
    if scope == "all":
        model = demand.fit_demand_model(series, threshold)
        points = demand.effective_demand_series(model, series)
        models = {"all": model}
    else:
        points, models = demand.daily_effective_demand(series, threshold)
    peaks = demand.weekly_peaks(points, start)
    summary = {
        "threshold": threshold,
        "scope": scope,
        "clamped_negative": sum(p.clamped for p in points),
        "models": {str(k): m.to_dict() for k, m in models.items()},
    }
    return points, peaks, summary


def cmd_demand(args, out: Path):
    series = _read_series(args)
    points, peaks, summary = run_demand(series, args.threshold, _date(args.start), args.scope)
    report.write_csv(out / "demand.csv", report.demand_rows(points))
    report.write_csv(out / "peaks.csv", report.peak_rows(peaks))
    report.write_json(out / "demand.json", summary)
    print(f"{len(points)} demand points, {len(peaks)} weekly peaks")


def run_trend(peaks, pin_u0, horizon):
    model = growth.fit_exponential(peaks, pin_u0=pin_u0)
    rows = [["week", "projected_percent"]]
    rows += [[str(w), f"{v:.4f}"] for w, v in growth.projection_table(model, range(horizon + 1))]
    return model, rows


def cmd_trend(args, out: Path):
    if not args.peaks:
        raise DomainError("--peaks is required")
    model, rows = run_trend(report.read_peaks(args.peaks), args.pin_u0, args.horizon)
    report.write_json(out / "growth.json", growth.growth_report(model))
    report.write_csv(out / "projection.csv", rows)
    print(f"U0={model.u0:.4f} b={model.b:.6f}")


def _read_vendor(path) -> scaling.ScalingTable:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = rows[0]
    cols = header[1:]
    labels, cells = [], []
    for r in rows[1:]:
        labels.append(r[0])
        cells.append([float(v.replace(",", "")) for v in r[1:1 + len(cols)]])
    return scaling.vendor_table(cells, labels, cols)


def run_scale(sigma, lam, p_list, reference, ref_p=None):
    """Model table from per-clock throughputs measured at ``ref_p`` CPUs."""
    ref_p = ref_p or p_list[0]
    models = scaling.calibrated_models(ref_p, reference, sigma, lam)
    configs = [scaling.CpuConfig(p) for p in p_list]
    table = scaling.build_scaling_table(models, configs)
    table.meta["reference_p"] = ref_p
    return table


def cmd_scale(args, out: Path):
    if args.vendor:
        table = _read_vendor(args.vendor)
    else:
        clocks = _names(args.clocks)
        xs = [x for x in (args.x_base, args.x_hi) if x is not None]
        if not xs:
            raise DomainError("give --x52 (and optionally --x52-hi) or --vendor")
        table = run_scale(args.sigma, args.lam, _ints(args.p), dict(zip(clocks, xs)), args.ref_p)
    report.write_csv(out / "scaling_table.csv", table.to_rows())
    report.write_json(out / "scaling_table.json", table.to_dict())
    for row in table.to_rows():
        print("\t".join(row))


def _parse_cell(text):
    row, sep, col = str(text).partition(":")
    if not sep:
        raise DomainError(f"cell must be ROW:COLUMN, got {text!r}")
    return row, col


def cmd_scenario(args, out: Path):
    if args.growth:
        g = json.loads(Path(args.growth).read_text())
        model = growth.GrowthModel(float(g["U0"]), float(g["b"]))
    elif args.u0 is not None and args.b is not None:
        model = growth.GrowthModel(args.u0, args.b)
    else:
        raise DomainError("give --growth growth.json or both --u0 and --b")

    defs = []
    for entry in args.scenario or []:
        name, sep, value = entry.partition("=")
        if not sep:
            raise DomainError(f"scenario must be NAME=DELTA, got {entry!r}")
        defs.append((name, float(value)))
    if args.table:
        table = scaling.ScalingTable.from_dict(json.loads(Path(args.table).read_text()))
        if not (args.from_cell and args.to_cell):
            raise DomainError("--table needs --from and --to cells")
        delta = scenario.clock_delta_from_table(table, _parse_cell(args.from_cell), _parse_cell(args.to_cell))
        defs.append((args.name or "table", delta))
    if not defs:
        defs = [("baseline", 0.0)]
    for name, delta in defs:
        rep = scenario.run_scenario(
            scenario.UpgradeScenario(name, model, delta, tuple(_floats(args.thresholds))),
            args.horizon, _date(args.start_date),
        )
        _write_scenario(out, rep)


def _week_text(w: float) -> str:
    if math.isinf(w):
        return "never"
    return f"{w:.2f}" + (" (already past)" if w < 0 else "")


def _write_scenario(out: Path, rep: scenario.ScenarioReport):
    report.write_csv(out / f"scenario_{rep.name}.csv", rep.to_rows())
    report.write_json(out / f"scenario_{rep.name}.json", rep.to_dict())
    cross = ", ".join(f"{t:g}%: {_week_text(w)}" for t, w in rep.crossings.items())
    print(f"{rep.name}: delta={rep.delta:.4f} crossings {cross}")


# -- pipeline -----------------------------------------------------------------

@dataclass
class RunConfig:
    """Declarative description of an end-to-end run."""

    inputs: list[Path] = field(default_factory=list)
    mapping: ingest.ColumnMapping = field(default_factory=ingest.ColumnMapping)
    window_minutes: float | None = 15.0
    threshold: float = demand.DEFAULT_THRESHOLD
    analysis_start: date | None = None
    scope: str = "day"
    pin_u0: bool = False
    horizon: int = 26
    thresholds: tuple[float, ...] = scenario.DEFAULT_THRESHOLDS
    sigma: float = scaling.DEFAULT_SIGMA
    lam: float = scaling.DEFAULT_LAMBDA
    cpus: list[int] = field(default_factory=lambda: [52, 64])
    reference: dict = field(default_factory=dict)
    reference_p: int | None = None
    vendor: dict | None = None
    scenarios: list[dict] = field(default_factory=list)
    synth: dict | None = None
    seed: int | None = None
    out: Path = Path("out")

    def __post_init__(self):
        if self.sigma < 0 or self.lam < 0:
            raise DomainError("sigma and lambda must be non-negative")
        for p in self.inputs:
            if not Path(p).exists():
                raise DomainError(f"input file {p} does not exist")
        if not self.inputs and self.synth is None:
            raise DomainError("config needs [input] paths or a [synth] section")

    @classmethod
    def from_dict(cls, cfg: dict, base: Path = Path(".")) -> "RunConfig":
        run = cfg.get("run", {})
        inp = cfg.get("input", {})
        ing = cfg.get("ingest", {})
        dem = cfg.get("demand", {})
        trd = cfg.get("trend", {})
        scl = cfg.get("scale", {})
        mapping = ingest.ColumnMapping(
            ing.get("timestamp_col", "timestamp"), ing.get("util_col", "U"),
            _names(ing.get("regressors")), _names(ing.get("ignore")) or (),
        )
        return cls(
            inputs=[base / p for p in inp.get("paths", [])],
            mapping=mapping,
            window_minutes=ing.get("window_minutes", 15.0) or None,
            threshold=float(dem.get("threshold", demand.DEFAULT_THRESHOLD)),
            analysis_start=_date(dem.get("analysis_start", run.get("analysis_start"))),
            scope=dem.get("scope", "day"),
            pin_u0=bool(trd.get("pin_u0", False)),
            horizon=int(trd.get("horizon", 26)),
            thresholds=tuple(_floats(trd.get("thresholds", list(scenario.DEFAULT_THRESHOLDS)))),
            sigma=float(scl.get("sigma", scaling.DEFAULT_SIGMA)),
            lam=float(scl.get("lambda", scaling.DEFAULT_LAMBDA)),
            cpus=_ints(scl.get("p", [52, 64])),
            reference={k: float(v) for k, v in scl.get("reference", {}).items()},
            reference_p=scl.get("reference_p"),
            vendor=scl.get("vendor"),
            scenarios=list(cfg.get("scenario", [])),
            synth=cfg.get("synth"),
            seed=run.get("seed"),
            out=base / run.get("out", "out"),
        )


def _scenario_delta(entry: dict, tables: dict) -> float:
    if "delta" in entry:
        return float(entry["delta"])
    table = tables.get(entry.get("table", "model"))
    if table is None:
        raise DomainError(f"scenario {entry.get('name')!r} refers to missing table {entry.get('table')!r}")
    return scenario.clock_delta_from_table(table, tuple(entry["from"]), tuple(entry["to"]))


def run_pipeline(cfg: RunConfig, out: Path, seed=None) -> dict:
    seed = cfg.seed if seed is None else seed
    out.mkdir(parents=True, exist_ok=True)

    if cfg.inputs:
        parts = []
        for p in cfg.inputs:
            with open(p, newline="") as fh:
                parts.append(ingest.parse_metric_csv(fh, cfg.mapping))
        samples = sorted((s for part in parts for s in part.samples), key=lambda s: s.timestamp)
        series = ingest.MetricSeries(samples, parts[0].sample_interval, parts[0].regressor_names)
    else:
        sy = dict(cfg.synth)
        days = synth.generate_days(
            int(sy.get("days", 56)), _date(sy.get("start", synth.DEFAULT_DAY)),
            float(sy.get("scale", 80.62)), float(sy.get("rate", 0.0309)), seed,
            coefficients=_floats(sy.get("coefficients", list(synth.DEFAULT_COEFFICIENTS))),
            noise=float(sy.get("noise", 2.0)),
            regressor_noise=float(sy.get("regressor_noise", 0.0)),
            sample_minutes=float(sy.get("sample_minutes", synth.RAW_SAMPLE_MINUTES)),
        )
        series, truth = synth.concat_days(days)
        (out / "metrics.csv").write_text(ingest.write_metric_csv(series))
        (out / "truth.csv").write_text(synth.truth_csv(series.timestamps, truth))

    checked = ingest.validate_series(series)
    if cfg.window_minutes:
        series = ingest.aggregate_window(series, timedelta(minutes=cfg.window_minutes))

    points, peaks, dsum = run_demand(series, cfg.threshold, cfg.analysis_start, cfg.scope)
    report.write_csv(out / "demand.csv", report.demand_rows(points))
    report.write_csv(out / "peaks.csv", report.peak_rows(peaks))
    report.write_json(out / "demand.json", dsum)

    gmodel, proj = run_trend(peaks, cfg.pin_u0, cfg.horizon)
    greport = growth.growth_report(gmodel)
    report.write_json(out / "growth.json", greport)
    report.write_csv(out / "projection.csv", proj)

    tables = {}
    if cfg.reference:
        tables["model"] = run_scale(cfg.sigma, cfg.lam, cfg.cpus, cfg.reference, cfg.reference_p)
        report.write_csv(out / "scaling_table.csv", tables["model"].to_rows())
        report.write_json(out / "scaling_table.json", tables["model"].to_dict())
    if cfg.vendor:
        tables["vendor"] = scaling.vendor_table(cfg.vendor["cells"], cfg.vendor["rows"], cfg.vendor["columns"])
        report.write_csv(out / "vendor_table.csv", tables["vendor"].to_rows())
        report.write_json(out / "vendor_table.json", tables["vendor"].to_dict())

    entries = cfg.scenarios or [{"name": "baseline", "delta": 0.0}]
    crossings = {}
    for entry in entries:
        sc = scenario.UpgradeScenario(entry["name"], gmodel, _scenario_delta(entry, tables), cfg.thresholds)
        rep = scenario.run_scenario(sc, cfg.horizon, cfg.analysis_start)
        _write_scenario(out, rep)
        crossings[sc.name] = rep.to_dict()["crossings"]

    summary = {
        "seed": seed,
        "rows": len(series),
        "validation_findings": checked.findings,
        "weekly_peaks": [[p.week, p.peak_demand] for p in peaks],
        "growth": greport,
        "scenarios": crossings,
    }
    report.write_json(out / "pipeline.json", summary)
    return summary


def cmd_pipeline(args, out: Path):
    if not args.config:
        raise DomainError("pipeline needs --config (or CAPPLAN_CONFIG)")
    path = Path(args.config)
    cfg = RunConfig.from_dict(load_config(path), path.parent)
    out = Path(args.out) if args.out else cfg.out
    summary = run_pipeline(cfg, out, args.seed)
    g = summary["growth"]
    print(f"U0={g['U0']:.4f} b={g['b']:.6f} doubling={g['doubling_weeks']} weeks -> {out}")


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capplan", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=os.environ.get(CONFIG_ENV), help="TOML config file")
    common.add_argument("--out", default=None, help="output directory (default .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic metric days")
    p.add_argument("--days", type=int, default=1)
    p.add_argument("--start", default=synth.DEFAULT_DAY.isoformat())
    p.add_argument("--scale", type=float, default=90.0, help="demand scale in percent")
    p.add_argument("--rate", type=float, default=0.0, help="weekly exponential growth rate")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--regressor-noise", type=float, default=0.0)
    p.add_argument("--coefficients", default=",".join(map(str, synth.DEFAULT_COEFFICIENTS)))
    p.add_argument("--sample-minutes", type=float, default=synth.RAW_SAMPLE_MINUTES)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=[common], help="parse, aggregate and validate metrics")
    _add_mapping_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("demand", parents=[common], help="effective demand and weekly peaks")
    _add_mapping_flags(p)
    p.add_argument("--threshold", type=float, default=demand.DEFAULT_THRESHOLD)
    p.add_argument("--start", default=None, help="analysis start date (YYYY-MM-DD)")
    p.add_argument("--scope", choices=("day", "all"), default="day",
                   help="fit one model per UTC day or one for the whole input")
    p.set_defaults(func=cmd_demand)

    p = sub.add_parser("trend", parents=[common], help="exponential growth fit")
    p.add_argument("--peaks", default=None, help="CSV with columns week, peak_demand")
    p.add_argument("--pin-u0", action="store_true", help="fix U0 to the week-0 peak")
    p.add_argument("--horizon", type=int, default=26)
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("scale", parents=[common], help="super-serial scaling table")
    p.add_argument("--sigma", type=float, default=scaling.DEFAULT_SIGMA)
    p.add_argument("--lambda", dest="lam", type=float, default=scaling.DEFAULT_LAMBDA)
    p.add_argument("--p", default="52,64", help="CPU counts, first is the reference")
    p.add_argument("--x52", "--x-base", dest="x_base", type=float, default=None,
                   help="base-clock throughput (tpm) at the reference CPU count")
    p.add_argument("--x52-hi", "--x-hi", dest="x_hi", type=float, default=None,
                   help="upgraded-clock throughput (tpm) at the reference CPU count")
    p.add_argument("--ref-p", type=int, default=None)
    p.add_argument("--clocks", default="333/4,400/8")
    p.add_argument("--vendor", default=None, help="CSV of vendor throughputs (no model)")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("scenario", parents=[common], help="upgrade what-if projections")
    p.add_argument("--growth", default=None, help="growth.json from trend")
    p.add_argument("--u0", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--scenario", action="append", help="NAME=DELTA (repeatable)")
    p.add_argument("--table", default=None, help="scaling_table.json")
    p.add_argument("--from", dest="from_cell", default=None, help="ROW:COLUMN base cell")
    p.add_argument("--to", dest="to_cell", default=None, help="ROW:COLUMN target cell")
    p.add_argument("--name", default=None)
    p.add_argument("--horizon", type=int, default=26)
    p.add_argument("--thresholds", default="100,200")
    p.add_argument("--start-date", default=None, help="calendar date of week 0")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("pipeline", parents=[common], help="run the full workflow from a config")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_pipeline)
    return parser


def _flag_defaults(section: dict) -> dict:
    return {k.replace("-", "_"): v for k, v in section.items() if not isinstance(v, dict)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config and args.command != "pipeline":
        try:
            section = load_config(args.config).get(args.command, {})
        except (OSError, tomllib.TOMLDecodeError) as exc:
            print(f"capplan: error: cannot read config: {exc}", file=sys.stderr)
            return 1
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**_flag_defaults(section))
        args = parser.parse_args(argv)
    out = Path(args.out) if args.out else Path(".")
    try:
        args.func(args, out)
    except (CapPlanError, OSError, KeyError) as exc:
        print(f"capplan {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
