"""Command-line client for the portfolio service.

Each subcommand builds a request, posts it to the service, and renders
the response into report files. By default the request is dispatched in
process against the bundled FastAPI app; with --server it goes over the
network to a running instance, so the CLI stays a thin client either way.

Exit codes: 0 success, 2 config or validation error, 3 numerical failure
(stage-tagged message on stderr), 1 transport failure.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import sys
from pathlib import Path

import httpx

from . import __version__

DEFAULTS = {
    "out": ".",
    "format": "csv",
    "grid": (2, 41),
    "max_lag": 12,
    "pade": (0, 1, 11),
    "trunc": 256,
    "gamma": 0.5,
    "sum_to_one": False,
    "threshold": 2.0,
    "window": 36,
    "fit_once": False,
    "seed": 42,
    "n_dates": 500,
    "months": 42,
    "decay": 0.9,
    "shock_vol": 0.0015,
    "level": 0.03,
    "slope": 0.02,
}

_PATHS = {
    "generate": "/generate",
    "estimate": "/estimate",
    "fit": "/fit",
    "factorize": "/factorize",
    "optimize": "/optimize",
    "check-arbitrage": "/check-arbitrage",
    "backtest": "/backtest",
    "pipeline": "/pipeline",
}


class ConfigError(Exception):
    """Bad flags, bad config file, or unreadable referenced files."""


def _parse_grid(value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return int(value[0]), int(value[1])
    left, sep, right = str(value).partition("..")
    if not sep:
        raise ConfigError(f"grid must look like START..END, got {value!r}")
    try:
        return int(left), int(right)
    except ValueError as exc:
        raise ConfigError(f"grid bounds must be integers, got {value!r}") from exc


def _parse_pade(value):
    parts = value if isinstance(value, (list, tuple)) else str(value).split(",")
    if len(parts) != 3:
        raise ConfigError(f"pade must be three integers M,N,K, got {value!r}")
    try:
        return tuple(int(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"pade must be three integers M,N,K, got {value!r}") from exc


def _load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _resolve(args, config):
    """Merge defaults, config-file values, and explicit flags (flags win)."""
    known = set(DEFAULTS) | {"input", "server", "model"}
    unknown = sorted(set(config) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    merged = dict(DEFAULTS, input=None, server=None, model=None)
    merged.update(config)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = value
    merged["grid"] = _parse_grid(merged["grid"])
    merged["pade"] = _parse_pade(merged["pade"])
    if merged["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {merged['format']!r}")
    return merged


def _curves_text(cfg, command):
    if cfg["input"] is None:
        raise ConfigError(f"{command} needs --input (or 'input' in the config)")
    try:
        return Path(cfg["input"]).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read input {cfg['input']}: {exc}") from exc


def _payload(command, cfg):
    if command == "generate":
        keys = ("seed", "n_dates", "months", "decay", "shock_vol", "level",
                "slope")
        return {key: cfg[key] for key in keys}
    if command == "pipeline" and cfg["model"] is not None:
        return {
            "model": cfg["model"],
            "grid": list(cfg["grid"]),
            "max_lag": cfg["max_lag"],
            "trunc": cfg["trunc"],
            "gamma": cfg["gamma"],
            "sum_to_one": cfg["sum_to_one"],
            "threshold": cfg["threshold"],
        }
    body = {
        "curves_csv": _curves_text(cfg, command),
        "grid": list(cfg["grid"]),
        "max_lag": cfg["max_lag"],
    }
    m, n, k = cfg["pade"]
    if command != "estimate":
        body["pade"] = {"m": m, "n": n, "k": k}
    if command in ("factorize", "optimize", "check-arbitrage", "backtest",
                   "pipeline"):
        body["trunc"] = cfg["trunc"]
    if command in ("optimize", "pipeline"):
        body["gamma"] = cfg["gamma"]
        body["sum_to_one"] = cfg["sum_to_one"]
    if command in ("check-arbitrage", "pipeline"):
        body["threshold"] = cfg["threshold"]
    if command in ("backtest", "pipeline"):
        body["window"] = cfg["window"]
        body["fit_once"] = cfg["fit_once"]
    return body


def _send(path, payload, server):
    if server is None:
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app())
        base_url = "http://bondopt.internal"
    else:
        transport = None
        base_url = server

    async def go():
        async with httpx.AsyncClient(
            transport=transport, base_url=base_url, timeout=600.0
        ) as client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()

    return asyncio.run(go())


def _print_validation_errors(command, detail):
    entries = detail if isinstance(detail, list) else [detail]
    for entry in entries:
        loc = ".".join(str(p) for p in entry.get("loc", []) if p != "body")
        where = f" {loc}:" if loc else ""
        print(f"bondopt {command}: invalid request:{where} "
              f"{entry.get('msg', entry)}", file=sys.stderr)


def _fail(command, status, body):
    detail = body.get("detail") if isinstance(body, dict) else None
    if status == 422:
        _print_validation_errors(command, detail or [])
        return 2
    if status == 400 and isinstance(detail, dict):
        print(f"bondopt {command}: {detail.get('message', 'request failed')}",
              file=sys.stderr)
        return 2 if detail.get("kind") == "validation" else 3
    print(f"bondopt {command}: unexpected HTTP status {status}",
          file=sys.stderr)
    return 1


def _csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _correlation_rows(table):
    header = ["lag", "actual"]
    columns = [table["lags"], table["actual"]]
    if table.get("pair_counts") is not None:
        header.append("pair_count")
        columns.append(table["pair_counts"])
    if table.get("fitted") is not None:
        header.append("fitted")
        columns.append(table["fitted"])
    if table.get("residuals") is not None:
        header.append("residual")
        columns.append(table["residuals"])
    return header, list(zip(*columns))


def _write_reports(command, report, cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    fmt = cfg["format"]
    written = []

    def emit(name, text):
        (out / name).write_text(text)
        written.append(name)

    def emit_json(name, obj):
        emit(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def emit_table(stem, header, rows, obj):
        if fmt == "csv":
            emit(stem + ".csv", _csv_text(header, rows))
        else:
            emit_json(stem + ".json", obj)

    if command == "generate":
        emit("curves.csv", report["csv"])
    else:
        emit_json("report.json", report)
    if report.get("correlation") is not None:
        header, rows = _correlation_rows(report["correlation"])
        emit_table("correlation", header, rows, report["correlation"])
    if report.get("fit") is not None:
        emit_json("fit.json", report["fit"])
    if report.get("symbol") is not None:
        emit_json("symbol.json", report["symbol"])
    if report.get("factorization") is not None:
        emit_json("factorization.json", report["factorization"])
    if report.get("expectations") is not None:
        table = report["expectations"]
        emit_table(
            "expectations",
            ["month", "expected_return", "variance"],
            list(zip(table["months"], table["expected_returns"],
                     table["variances"])),
            table,
        )
    for name in ("allocation", "benchmark"):
        if report.get(name) is not None:
            table = report[name]
            emit_table(
                name,
                ["month", "raw_holding", "normalized_weight"],
                list(zip(table["months"], table["raw"], table["normalized"])),
                table,
            )
    if report.get("arbitrage") is not None:
        emit_json("arbitrage.json", report["arbitrage"])
    backtest = report if command == "backtest" else report.get("backtest")
    if backtest is not None and backtest.get("dates") is not None:
        emit_table(
            "backtest",
            ["date", "optimal_return_annualized", "benchmark_return_annualized"],
            list(zip(backtest["dates"],
                     backtest["optimal_returns_annualized"],
                     backtest["benchmark_returns_annualized"])),
            {key: backtest[key] for key in
             ("mode", "window", "dates", "optimal_returns_annualized",
              "benchmark_returns_annualized")},
        )
        emit_json("backtest_summary.json", backtest["summary"])

    public = {key: value for key, value in sorted(cfg.items())
              if value is not None}
    emit_json("manifest.json", {
        "version": __version__,
        "command": command,
        "config": public,
        "artifacts": sorted(written) + ["manifest.json"],
    })
    return written


def _add_common(parser):
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config file; flags override its values")
    parser.add_argument("--out", metavar="DIR",
                        help="directory for report artifacts (default .)")
    parser.add_argument("--format", choices=("csv", "json"),
                        help="tabular artifact format (default csv)")
    parser.add_argument("--server", metavar="URL",
                        help="POST to a running service instead of in-process")


def _add_data(parser):
    parser.add_argument("--input", metavar="PATH", help="yield-curve CSV")
    parser.add_argument("--grid", metavar="START..END",
                        help="maturity grid in months (default 2..41)")
    parser.add_argument("--max-lag", dest="max_lag", type=int, metavar="L",
                        help="largest correlation lag (default 12)")


def _add_pade(parser):
    parser.add_argument("--pade", metavar="M,N,K",
                        help="rational fit orders (default 0,1,11)")


def _add_trunc(parser):
    parser.add_argument("--trunc", type=int, metavar="T",
                        help="series truncation depth (default 256)")


def _add_objective(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--gamma", type=float, metavar="G",
                       help="risk aversion (default 0.5)")
    group.add_argument("--sum-to-one", dest="sum_to_one", action="store_true",
                       default=None, help="rescale holdings to net one")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bondopt",
        description="Optimal bond portfolios from maturity-difference "
                    "return correlations.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    generate = sub.add_parser("generate",
                              help="write a synthetic yield-curve panel")
    _add_common(generate)
    generate.add_argument("--seed", type=int, metavar="S",
                          help="RNG seed (default 42)")
    generate.add_argument("--n-dates", dest="n_dates", type=int, metavar="D",
                          help="number of monthly curve dates (default 500)")
    generate.add_argument("--months", type=int, metavar="M",
                          help="quoted maturities in months (default 42)")
    generate.add_argument("--decay", type=float, metavar="A",
                          help="correlation decay per lag (default 0.9)")

    estimate = sub.add_parser("estimate",
                              help="estimate maturity-difference correlations")
    _add_common(estimate)
    _add_data(estimate)

    fit = sub.add_parser("fit", help="fit a rational correlation model")
    _add_common(fit)
    _add_data(fit)
    _add_pade(fit)

    factorize = sub.add_parser(
        "factorize", help="build and factorize the covariance symbol")
    _add_common(factorize)
    _add_data(factorize)
    _add_pade(factorize)
    _add_trunc(factorize)

    optimize = sub.add_parser("optimize", help="compute optimal holdings")
    _add_common(optimize)
    _add_data(optimize)
    _add_pade(optimize)
    _add_trunc(optimize)
    _add_objective(optimize)

    arbitrage = sub.add_parser(
        "check-arbitrage", help="run classical and near-arbitrage checks")
    _add_common(arbitrage)
    _add_data(arbitrage)
    _add_pade(arbitrage)
    _add_trunc(arbitrage)
    arbitrage.add_argument("--threshold", type=float, metavar="C",
                           help="near-arbitrage threshold (default 2.0)")

    backtest = sub.add_parser(
        "backtest", help="walk-forward backtest of optimal vs benchmark")
    _add_common(backtest)
    _add_data(backtest)
    _add_pade(backtest)
    _add_trunc(backtest)
    backtest.add_argument("--window", type=int, metavar="W",
                          help="trailing fit window in months (default 36)")
    backtest.add_argument("--fit-once", dest="fit_once", action="store_true",
                          default=None,
                          help="fit once on the whole panel (in-sample)")

    pipeline = sub.add_parser(
        "pipeline", help="full run: estimate through backtest and reports")
    _add_common(pipeline)
    _add_data(pipeline)
    _add_pade(pipeline)
    _add_trunc(pipeline)
    _add_objective(pipeline)
    pipeline.add_argument("--threshold", type=float, metavar="C",
                          help="near-arbitrage threshold (default 2.0)")
    pipeline.add_argument("--window", type=int, metavar="W",
                          help="trailing fit window in months (default 36)")
    pipeline.add_argument("--fit-once", dest="fit_once", action="store_true",
                          default=None,
                          help="fit once on the whole panel (in-sample)")

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config) if args.config else {}
        cfg = _resolve(args, config)
        payload = _payload(args.command, cfg)
    except ConfigError as exc:
        print(f"bondopt: {exc}", file=sys.stderr)
        return 2
    try:
        status, body = _send(_PATHS[args.command], payload, cfg["server"])
    except httpx.HTTPError as exc:
        print(f"bondopt: transport failure: {exc}", file=sys.stderr)
        return 1
    if status != 200:
        return _fail(args.command, status, body)
    try:
        written = _write_reports(args.command, body, cfg)
    except OSError as exc:
        print(f"bondopt: cannot write reports: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: wrote {', '.join(written)} to {cfg['out']}")
    return 0


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    sys.exit(main())
