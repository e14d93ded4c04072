"""Command-line front end.

Settings are resolved in layers, later ones winning: preset, ``--config``
file (``key = value`` lines), ``INZSMF_<KEY>`` environment variables,
command-line flags. Keys are :class:`~inzsmf.bench.ExperimentConfig` field
names; ``reps`` and dashed spellings are accepted too.

    inzsmf run --preset table1-row6 --filter inzsmf --gain fradius
    inzsmf compare --preset table2
    inzsmf matrix --gain fradius --out results/
    inzsmf selftest
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import __version__, bench, selftest
from .bench import ConfigError, ExperimentConfig
from .zonotope import RANKINGS

ENV_PREFIX = "INZSMF_"
ALIASES = {"reps": "repetitions"}
_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_EXTRA_KEYS = ("preset", "out", "workers")


@dataclass
class RunManifest:
    command: str
    configs: list
    out_dir: Path
    seed: int
    workers: int = 1


def _canonical(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return ALIASES.get(key, key)


def _convert(name: str, raw):
    if name in ("preset", "out"):
        return str(raw)
    if name == "workers":
        return int(raw)
    default = _FIELDS[name].default
    try:
        if isinstance(default, bool):
            text = str(raw).strip().lower()
            if text not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return text in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            if isinstance(raw, (tuple, list)):
                return tuple(float(v) for v in raw)
            return tuple(float(v) for v in str(raw).split(",") if v.strip())
    except ValueError:
        raise ConfigError(name, f"cannot parse {raw!r}") from None
    return str(raw)


def _set(settings: dict, key: str, raw, source: str) -> None:
    name = _canonical(key)
    if name not in _FIELDS and name not in _EXTRA_KEYS:
        raise ConfigError(name, f"unknown setting (from {source})")
    settings[name] = _convert(name, raw)


def read_config_file(path) -> dict:
    settings: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        _set(settings, key, value.strip(), f"{path}:{lineno}")
    return settings


def read_environment(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    settings: dict = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX) and len(key) > len(ENV_PREFIX):
            _set(settings, key[len(ENV_PREFIX):], value, key)
    return settings


_FLAG_KEYS = ("preset", "filter", "gain", "side", "innovation", "steps", "reps", "seed",
              "out", "poles", "h0", "reduction_order", "reduction_ranking", "workers")


def read_flags(args: argparse.Namespace) -> dict:
    settings: dict = {}
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            _set(settings, key, value, "command line")
    if getattr(args, "no_containment", False):
        settings["check_containment"] = False
    return settings


def resolve_settings(args: argparse.Namespace, environ=None) -> dict:
    settings: dict = {}
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    settings.update(read_environment(environ))
    settings.update(read_flags(args))
    return settings


def build_config(settings: dict, preset_name: str | None = None) -> ExperimentConfig:
    name = preset_name if preset_name is not None else settings.get("preset")
    overrides = {k: v for k, v in settings.items() if k in _FIELDS and k != "name"}
    if name:
        config = bench.preset(name, **overrides)
    else:
        config = replace(ExperimentConfig(), **overrides)
    return config.validate()


# -- commands -----------------------------------------------------------------


def _out_dir(settings: dict) -> Path:
    out = Path(settings.get("out", "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tag(config: ExperimentConfig) -> str:
    return f"{config.name}_{config.filter}_{config.gain}"


def _write_logs(out: Path, config: ExperimentConfig, reps) -> None:
    for rep in reps:
        bench.write_run_csv(out / f"run_{_tag(config)}_rep{rep.index}.csv", rep.trajectory, rep.log)


def _report_errors(report) -> None:
    for err in report.errors:
        print(f"warning: repetition aborted: {err}", file=sys.stderr)


def cmd_run(manifest: RunManifest) -> int:
    (config,) = manifest.configs
    reps = bench.run_repetitions(config)
    report = bench.aggregate(reps)
    out = manifest.out_dir
    _write_logs(out, config, reps)
    bench.write_metrics_csv(out / "metrics.csv", [bench.metrics_row(config, report)])
    bench.write_metadata(out / "metadata.json", config, command="run", version=__version__)
    _report_errors(report)
    print(_format_report(config, report))
    return 0 if report.repetitions else 1


def _format_report(config: ExperimentConfig, report) -> str:
    return (f"{_tag(config)}: RMSE(theta)={report.rmse_theta:.4f} RMSE(x)={report.rmse_x:.4f} "
            f"AAR(theta)={report.aar_theta:.4f} AAR(x)={report.aar_x:.4f} "
            f"ART={report.art_seconds * 1e3:.3f}ms containment={report.containment_rate:.3f} "
            f"reps={report.repetitions}/{report.repetitions + report.failed_repetitions}")


COMPARE_METRICS = ("rmse_theta", "rmse_x", "aar_theta", "aar_x", "art_seconds")


def comparison_rows(pairs, names=("zsmf", "inzsmf")) -> list[dict]:
    """Comparison rows: both metric values and the improvement of the
    second filter over the first, per metric."""
    rows = []
    for base_cfg, base, cand_cfg, cand in pairs:
        row = {"config": base_cfg.name, "gain": base_cfg.gain,
               "est_init": ",".join(bench.fmt(v) for v in base_cfg.est_init)}
        for metric in COMPARE_METRICS:
            row[f"{names[0]}_{metric}"] = getattr(base, metric)
            row[f"{names[1]}_{metric}"] = getattr(cand, metric)
            try:
                row[f"improvement_{metric}_pct"] = bench.improvement(getattr(base, metric),
                                                                     getattr(cand, metric))
            except ValueError:
                row[f"improvement_{metric}_pct"] = float("nan")
        rows.append(row)
    return rows


def write_comparison_csv(path, rows) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: bench.fmt(v) for k, v in row.items()})


def _print_comparison(rows, names) -> None:
    header = f"{'config':<13} {'gain':<8}" + "".join(
        f" {m:>22}" for m in ("RMSE(theta)", "RMSE(x)", "AAR(theta)", "AAR(x)"))
    print(header)
    for row in rows:
        cells = []
        for metric in COMPARE_METRICS[:4]:
            a, b = row[f"{names[0]}_{metric}"], row[f"{names[1]}_{metric}"]
            cells.append(f" {a:7.4f}/{b:7.4f} {row[f'improvement_{metric}_pct']:+6.1f}%")
        print(f"{row['config']:<13} {row['gain']:<8}" + "".join(cells))
    print(f"(values are {names[0]}/{names[1]}; percentages are the improvement of {names[1]})")


def cmd_compare(manifest: RunManifest, names=("zsmf", "inzsmf"), logs: bool = False) -> int:
    configs = [replace(c, filter=f) for c in manifest.configs for f in names]
    results = bench.run_many_logged(configs, manifest.workers)
    out = manifest.out_dir
    metrics, pairs = [], []
    for i in range(0, len(configs), 2):
        reports = []
        for cfg, reps in zip(configs[i:i + 2], results[i:i + 2]):
            report = bench.aggregate(reps)
            _report_errors(report)
            if logs:
                _write_logs(out, cfg, reps)
            metrics.append(bench.metrics_row(cfg, report))
            reports.append(report)
        pairs.append((configs[i], reports[0], configs[i + 1], reports[1]))
    rows = comparison_rows(pairs, names)
    bench.write_metrics_csv(out / "metrics.csv", metrics)
    write_comparison_csv(out / "comparison.csv", rows)
    bench.write_metadata(out / "metadata.json", manifest.configs[0], command=manifest.command,
                         version=__version__, compared_filters=list(names),
                         configs=[c.name + ":" + c.gain for c in manifest.configs])
    _print_comparison(rows, names)
    return 0


def cmd_selftest(seed: int) -> int:
    results = selftest.run_checks(seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:<24} {r.detail} ({r.seconds:.2f}s)")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


# -- argument parsing ---------------------------------------------------------


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value settings file")
    parser.add_argument("--preset", help="table1-row1 .. table1-row8, table2 (compare also takes table1)")
    parser.add_argument("--filter", choices=bench.FILTERS)
    parser.add_argument("--gain", choices=bench.GAINS)
    parser.add_argument("--side", choices=("left", "right"))
    parser.add_argument("--innovation", choices=("standard", "alternative"))
    parser.add_argument("--steps", type=int)
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory (default: results)")
    parser.add_argument("--poles", help="comma separated, e.g. 0.95,0.98,0.98")
    parser.add_argument("--h0", help="initial generator diagonal d1,d2,d3")
    parser.add_argument("--reduction-order", dest="reduction_order", type=int)
    parser.add_argument("--reduction-ranking", dest="reduction_ranking", choices=RANKINGS)
    parser.add_argument("--workers", type=int, help="parallel experiments (compare/matrix)")
    parser.add_argument("--no-containment", action="store_true",
                        help="skip the per-step containment test")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inzsmf", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one filter configuration")
    _common(p)
    p = sub.add_parser("compare", help="run two filters on shared noise realizations")
    _common(p)
    p.add_argument("--filters", default="zsmf,inzsmf", help="baseline,candidate")
    p.add_argument("--logs", action="store_true", help="also write per-run CSV logs")
    p = sub.add_parser("matrix", help="all eight table1 presets, ZSMF vs InZSMF")
    _common(p)
    p.add_argument("--logs", action="store_true", help="also write per-run CSV logs")
    p = sub.add_parser("selftest", help="quick numerical self checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _compare_configs(settings: dict) -> list[ExperimentConfig]:
    name = settings.get("preset")
    if name == "table1":
        return [build_config(settings, f"table1-row{k}") for k in range(1, 9)]
    if name == "table2" and "gain" not in settings:
        return [build_config({**settings, "gain": g}) for g in ("poles", "fradius")]
    return [build_config(settings)]


def _parse_filters(parser, text: str) -> tuple[str, str]:
    names = tuple(t.strip() for t in text.split(","))
    if len(names) != 2 or names[0] == names[1] or any(n not in bench.FILTERS for n in names):
        parser.error(f"--filters expects two distinct names from {bench.FILTERS}, got {text!r}")
    return names


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args.seed)
    names = _parse_filters(parser, args.filters) if args.command == "compare" else None
    try:
        settings = resolve_settings(args, environ)
        workers = settings.pop("workers", 1)
        if args.command == "run":
            configs = [build_config(settings)]
        elif args.command == "matrix":
            configs = [build_config(settings, f"table1-row{k}") for k in range(1, 9)]
        else:
            configs = _compare_configs(settings)
    except ConfigError as exc:
        print(f"error: invalid setting '{exc.field_name}': {exc.message}", file=sys.stderr)
        return 2
    manifest = RunManifest(args.command, configs, _out_dir(settings), configs[0].seed, workers)
    if args.command == "run":
        return cmd_run(manifest)
    if args.command == "matrix":
        return cmd_compare(manifest, logs=args.logs)
    return cmd_compare(manifest, names, logs=args.logs)


if __name__ == "__main__":
    sys.exit(main())
