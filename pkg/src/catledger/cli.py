"""Batch command-line interface: run, compare, sweep, plot, check-laws.

The canonical trace format is CSV with a fixed column order (period, the
17 period metrics, the 20 accounts, the 6 invariance values).  Every run
echoes its fully resolved parameter set as leading `#` comment lines so a
trace file is reproducible on its own.  JSON output adds the per-booking
ledger log for audits.

Exit codes: 0 success, 1 configuration or validation error, 2 invariance
breach, 3 engine divergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .catcore import (
    FinSetMap,
    FiniteCategory,
    Functor,
    check_functor_laws,
    finset_pullback,
    finset_pushout,
    verify_pullback_universal,
    verify_pushout_universal,
)
from .decisions import METRIC_COLUMNS, Parameters, metrics_as_row
from .evolution import (
    EngineKind,
    Trace,
    run,
    stability_report,
)
from .ledger import ACCOUNT_NAMES, LedgerError

INVARIANCE_COLUMNS: tuple[str, ...] = (
    "I_Lab_B",
    "I_Res_B",
    "I_Cap_B",
    "I_Com_B",
    "I_Com_L",
    "I_Mac",
)

TRACE_COLUMNS: tuple[str, ...] = (
    ("period",) + METRIC_COLUMNS + ACCOUNT_NAMES + INVARIANCE_COLUMNS
)

INVARIANCE_TOLERANCE = 1e-9
DIVERGENCE_TOLERANCE = 1e-12

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANCE = 2
EXIT_DIVERGENCE = 3

# config-file key -> Parameters field
PARAM_KEYS: dict[str, str] = {
    "tau": "tau",
    "lambda": "lam",
    "sig_a": "sig_a",
    "sig_b": "sig_b",
    "sig_c": "sig_c",
    "rho_r": "rho_r",
    "rho_l": "rho_l",
    "rho_c": "rho_c",
    "mu": "mu",
    "omega": "omega",
    "delta_c": "delta_c",
    "delta_b": "delta_b",
    "p_r": "p_r",
    "p_l": "p_l",
    "p_0": "p_0",
    "gamma": "gamma",
    "alpha": "alpha",
    "beta_l": "beta_l",
    "beta_r": "beta_r",
    "beta_c": "beta_c",
    "nu_l": "nu_l",
    "nu_r": "nu_r",
    "com_lab_0": "com_lab_0",
    "com_res_0": "com_res_0",
    "horizon": "horizon",
}

_INT_FIELDS = {"tau", "horizon"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: Parameters = field(default_factory=Parameters)
    engine: EngineKind = EngineKind.RECURSIVE


def _parse_value(key: str, raw: str) -> int | float:
    field_name = PARAM_KEYS[key]
    try:
        if field_name in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for key {key!r}") from None


def apply_setting(config: RunConfig, key: str, raw: str) -> None:
    key = key.strip()
    raw = raw.strip()
    if key == "engine":
        try:
            config.engine = EngineKind(raw)
        except ValueError:
            raise ConfigError(f"unknown engine {raw!r}") from None
        return
    if key not in PARAM_KEYS:
        raise ConfigError(f"unknown configuration key {key!r}")
    config.params = replace(config.params, **{PARAM_KEYS[key]: _parse_value(key, raw)})


def load_config(path: str | Path | None, overrides: Sequence[str] = ()) -> RunConfig:
    """Build a RunConfig from an optional key=value file plus --set overrides."""
    config = RunConfig()
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = stripped.split("=", 1)
            apply_setting(config, key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        apply_setting(config, key, raw)
    config.params.validate()
    return config


def config_echo(config: RunConfig) -> list[str]:
    """The fully resolved settings, one 'key = value' line per entry."""
    lines = []
    for key, field_name in PARAM_KEYS.items():
        lines.append(f"{key} = {getattr(config.params, field_name)!r}")
    lines.append(f"engine = {config.engine.value}")
    return lines


# ---------------------------------------------------------------------------
# Trace serialization.
# ---------------------------------------------------------------------------


def trace_table(trace: Trace) -> list[dict[str, float]]:
    """The trace as one flat dict per row, keyed by TRACE_COLUMNS."""
    table = []
    for row in trace.rows:
        record: dict[str, float] = {"period": row.period}
        record.update(metrics_as_row(row.metrics))
        for name in ACCOUNT_NAMES:
            record[name] = row.accounts[name]
        record.update(dict(zip(INVARIANCE_COLUMNS, row.invariances.as_tuple())))
        table.append(record)
    return table


def _format_cell(value: float) -> str:
    # repr round-trips doubles exactly and always carries >= 6 significant digits
    return repr(int(value)) if value == int(value) and abs(value) < 1e15 else repr(value)


def write_trace_csv(trace: Trace, path: str | Path, config: RunConfig) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for line in config_echo(config):
            handle.write(f"# {line}\n")
        writer = csv.writer(handle)
        writer.writerow(TRACE_COLUMNS)
        for record in trace_table(trace):
            writer.writerow(_format_cell(record[col]) for col in TRACE_COLUMNS)


def read_trace_csv(path: str | Path) -> tuple[dict[str, str], list[dict[str, float]]]:
    """Parse a trace CSV back into (echoed config, rows)."""
    meta: dict[str, str] = {}
    rows: list[dict[str, float]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        data_lines = []
        for line in handle:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, raw = body.split("=", 1)
                    meta[key.strip()] = raw.strip()
                continue
            data_lines.append(line)
    if not data_lines:
        raise ConfigError(f"trace file {path} holds no table")
    reader = csv.reader(data_lines)
    header = next(reader)
    if tuple(header) != TRACE_COLUMNS:
        raise ConfigError(f"trace file {path} has an unexpected header")
    for parts in reader:
        if not parts:
            continue
        rows.append({col: float(cell) for col, cell in zip(header, parts)})
    if not rows:
        raise ConfigError(f"trace file {path} holds no rows")
    return meta, rows


def write_trace_json(trace: Trace, path: str | Path, config: RunConfig) -> None:
    payload = {
        "config": {line.split(" = ")[0]: line.split(" = ")[1] for line in config_echo(config)},
        "columns": list(TRACE_COLUMNS),
        "rows": [[record[col] for col in TRACE_COLUMNS] for record in trace_table(trace)],
        "bookings": [
            [
                {
                    "id": booking.id,
                    "description": booking.description,
                    "legs": [
                        {
                            "account": leg.account,
                            "direction": leg.direction.value,
                            "amount": leg.amount,
                            "unit": leg.unit.value,
                        }
                        for leg in booking.legs
                    ],
                }
                for booking in period
            ]
            for period in trace.bookings
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_run(config: RunConfig, out: str | None, json_out: str | None) -> int:
    try:
        trace = run(config.params, engine=config.engine)
    except LedgerError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if out:
        write_trace_csv(trace, out, config)
    if json_out:
        write_trace_json(trace, json_out, config)
    print(f"rows: {len(trace.rows)}")
    for index, column in enumerate(INVARIANCE_COLUMNS):
        peak = max(abs(row.invariances.as_tuple()[index]) for row in trace.rows)
        print(f"max |{column}|: {peak:.3e}")
    worst = max(row.invariances.max_abs() for row in trace.rows)
    if worst > INVARIANCE_TOLERANCE:
        print("invariance breach", file=sys.stderr)
        return EXIT_INVARIANCE
    return EXIT_OK


def cmd_compare(config: RunConfig) -> int:
    try:
        recursive = run(config.params, engine=EngineKind.RECURSIVE)
        categorical = run(config.params, engine=EngineKind.CATEGORICAL)
    except LedgerError as exc:
        print(f"compare failed: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    divergence = max(
        abs(a - b) for a, b in zip(recursive.flat_values(), categorical.flat_values())
    )
    print(f"max divergence: {divergence:.3e}")
    if divergence > DIVERGENCE_TOLERANCE:
        print("engines diverge", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


def _sweep_one(config: RunConfig, key: str, raw: str) -> dict[str, str]:
    summary = {"param": key, "value": raw}
    try:
        local = RunConfig(params=config.params, engine=config.engine)
        apply_setting(local, key, raw)
        local.params.validate()
        trace = run(local.params, engine=local.engine)
        report = stability_report(trace)
        worst = max(row.invariances.max_abs() for row in trace.rows)
        summary.update(
            status="ok",
            bounded=str(report.bounded),
            good_price_drift=repr(report.drift["GoodPrice"]),
            final_good_price=repr(trace.rows[-1].metrics.good_price),
            max_invariance=repr(worst),
        )
    except Exception as exc:  # a failing value must only mark its own row
        summary.update(status=f"error: {exc}")
    return summary


SWEEP_COLUMNS = (
    "param",
    "value",
    "status",
    "bounded",
    "good_price_drift",
    "final_good_price",
    "max_invariance",
)


def cmd_sweep(config: RunConfig, key: str, values: Iterable[str], jobs: int) -> int:
    if key != "engine" and key not in PARAM_KEYS:
        print(f"unknown parameter {key!r}", file=sys.stderr)
        return EXIT_CONFIG
    values = list(values)
    summaries: list[dict[str, str]] = []
    if values:
        # one isolated run per value; a failing value only marks its own row
        with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            futures = [pool.submit(_sweep_one, config, key, raw) for raw in values]
            summaries = [f.result() for f in futures]
    writer = csv.DictWriter(sys.stdout, fieldnames=SWEEP_COLUMNS, restval="")
    writer.writeheader()
    for summary in summaries:
        writer.writerow(summary)
    return EXIT_OK


_PLOT_PANELS: dict[str, tuple[str, ...]] = {
    "accounts": ACCOUNT_NAMES,
    "invariances": INVARIANCE_COLUMNS,
    "price": ("GoodPrice",),
    "investment": ("Investment",),
}

_PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Renders the panel data files written next to this script (not run by the
# trace tool itself; requires matplotlib).
import matplotlib.pyplot as plt
from pathlib import Path

here = Path(__file__).parent
fig, axes = plt.subplots(2, 2, figsize=(12, 8))
for ax, name in zip(axes.flat, ("accounts", "invariances", "price", "investment")):
    header, *lines = (here / f"{name}.dat").read_text().splitlines()
    columns = header.lstrip("#").split()
    data = [list(map(float, line.split())) for line in lines]
    for idx, label in enumerate(columns[1:], start=1):
        ax.plot([r[0] for r in data], [r[idx] for r in data], label=label)
    ax.set_title(name)
    ax.set_xlabel(columns[0])
    if len(columns) <= 8:
        ax.legend(fontsize="x-small")
fig.tight_layout()
fig.savefig(here / "panels.png", dpi=150)
print(here / "panels.png")
"""


def cmd_plot(trace_path: str, outdir: str) -> int:
    try:
        _, rows = read_trace_csv(trace_path)
    except (OSError, ValueError) as exc:
        print(f"cannot parse trace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    directory = Path(outdir)
    directory.mkdir(parents=True, exist_ok=True)
    for panel, columns in _PLOT_PANELS.items():
        lines = ["# period " + " ".join(columns)]
        for record in rows:
            lines.append(
                " ".join([_format_cell(record["period"])] + [repr(record[c]) for c in columns])
            )
        (directory / f"{panel}.dat").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (directory / "plot.py").write_text(_PLOT_SCRIPT, encoding="utf-8")
    print(f"wrote {len(_PLOT_PANELS)} panel files + plot.py to {directory}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Law fixtures for `check-laws`.
# ---------------------------------------------------------------------------


def _triangle_category() -> FiniteCategory:
    cat = FiniteCategory("triangle")
    x = cat.add_object("X")
    y = cat.add_object("Y")
    z = cat.add_object("Z")
    cat.add_morphism(x, y, label="a")
    cat.add_morphism(y, z, label="b")
    cat.add_morphism(x, z, label="c")
    return cat


def run_law_fixtures() -> list[tuple[str, bool]]:
    """Self-contained law suite; returns (name, passed) pairs."""
    results: list[tuple[str, bool]] = []

    cat = _triangle_category()
    identity = Functor.identity(cat)
    results.append(("identity functor passes", check_functor_laws(identity).ok))

    corrupted = Functor.identity(cat)
    corrupted.morphism_map[1] = 2  # a: X->Y now maps to b: Y->Z
    results.append(("corrupted functor fails", not check_functor_laws(corrupted).ok))

    set_a = ("a", "b")
    set_b = ("x", "y", "z")
    set_c = ("t", "f")
    f = FinSetMap(set_a, set_c, {"a": "t", "b": "f"})
    g = FinSetMap(set_b, set_c, {"x": "t", "y": "t", "z": "f"})
    apex, p_a, p_b = finset_pullback(f, g)
    results.append(("pullback apex", apex == (("a", "x"), ("a", "y"), ("b", "z"))))
    results.append(
        ("pullback universal property", verify_pullback_universal(f, g, apex, p_a, p_b))
    )

    fc = FinSetMap(("t",), ("a", "b"), {"t": "a"})
    gc = FinSetMap(("t",), ("x", "y"), {"t": "x"})
    classes, i_a, i_b = finset_pushout(fc, gc)
    results.append(("pushout class count", len(classes) == 3))
    results.append(
        ("pushout universal property", verify_pushout_universal(fc, gc, classes, i_a, i_b))
    )

    # the categorical engine must accept its own period constructions
    try:
        trace = run(Parameters(horizon=5), engine=EngineKind.CATEGORICAL)
        results.append(("engine periods law-check", len(trace.rows) == 6))
    except Exception:
        results.append(("engine periods law-check", False))
    return results


def cmd_check_laws() -> int:
    results = run_law_fixtures()
    ok = True
    for name, passed in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_CONFIG


# ---------------------------------------------------------------------------
# Argument parsing.
# ---------------------------------------------------------------------------


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one setting (repeatable)",
    )
    parser.add_argument("--horizon", type=int, help="number of periods to simulate")
    parser.add_argument(
        "--engine", choices=[e.value for e in EngineKind], help="engine to run"
    )


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = list(args.overrides)
    if getattr(args, "horizon", None) is not None:
        overrides.append(f"horizon={args.horizon}")
    if getattr(args, "engine", None):
        overrides.append(f"engine={args.engine}")
    return load_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catledger",
        description="Five-sector monetary economy simulator with a ledger and a categorical engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate and write the trace")
    _add_config_arguments(p_run)
    p_run.add_argument("--out", help="trace CSV path")
    p_run.add_argument("--json", dest="json_out", help="trace JSON path (with booking log)")

    p_cmp = sub.add_parser("compare", help="run both engines and compare traces")
    _add_config_arguments(p_cmp)

    p_sweep = sub.add_parser("sweep", help="stability summaries over parameter values")
    _add_config_arguments(p_sweep)
    p_sweep.add_argument("--param", required=True, help="configuration key to vary")
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated list of values (may be empty)"
    )
    p_sweep.add_argument("--jobs", type=int, default=4, help="concurrent runs")

    p_plot = sub.add_parser("plot", help="emit panel data files and a plot script")
    p_plot.add_argument("trace", help="trace CSV produced by `run`")
    p_plot.add_argument("--outdir", default="plots", help="output directory")

    sub.add_parser("check-laws", help="run the categorical law fixtures")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_config_from_args(args), args.out, args.json_out)
        if args.command == "compare":
            return cmd_compare(_config_from_args(args))
        if args.command == "sweep":
            values = [v for v in args.values.split(",") if v != ""]
            return cmd_sweep(_config_from_args(args), args.param, values, args.jobs)
        if args.command == "plot":
            return cmd_plot(args.trace, args.outdir)
        if args.command == "check-laws":
            return cmd_check_laws()
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
