"""Command-line batch front end.

Examples::

    partialvar simulate --out study/ --seed 7
    partialvar all --config study/config.yaml --out results/
    partialvar fevd --config study/config.yaml --out results/ --lag bic:3 --format json

Config files are YAML with an optional ``run`` block (lag, ordering, horizon,
fevd_horizons, aggregation, thresholds, seed, data_dir, out) and the
``countries`` block read by :func:`ingestion.load_country_configs`. Command-line
flags take precedence over the ``run`` block. The output directory is, in
order: ``--out``, ``$PARTIALVAR_OUT``, ``run.out``, ``./partialvar_out``.

Exit status: 0 on success, 1 when some countries failed (the rest are still
written, with ``failures.json`` listing the errors), 2 on configuration errors
(nothing is written).
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .design import CRITERIA, build_system, select_lag_order
from .dynamics import (
    DEFAULT_HORIZON,
    IRFBundle,
    Thresholds,
    changes_sign,
    classify_sensitivity,
    compute_irfs,
    irf_csv,
    ya_policy_metrics,
)
from .errors import ConfigError, PartialVarError
from .estimation import SystemEstimate, sur_estimate
from .fevd import REPORT_HORIZONS, FEVDTable, fevd, fevd_report, partvep
from .identification import StructuralFactor, cholesky_identify
from .ingestion import (
    AnnualPanel,
    CountryConfig,
    apply_transforms,
    build_euro_aggregate,
    load_country_configs,
    load_panel,
)
from .report import CountryResult, SummaryReport, summary_report
from .roles import DEFAULT_ORDER, POLM, YA, parse_ordering

EXIT_OK = 0
EXIT_COUNTRY_FAILURES = 1
EXIT_CONFIG_ERROR = 2

RUN_KEYS = {"lag", "ordering", "horizon", "fevd_horizons", "aggregation", "thresholds", "seed", "data_dir", "out"}


@dataclass(frozen=True)
class LagPolicy:
    """Either a fixed order (``criterion is None``) or selection up to ``p`` by a criterion."""

    p: int = 2
    criterion: str | None = None

    @classmethod
    def parse(cls, text: str) -> "LagPolicy":
        kind, _, value = str(text).partition(":")
        kind = kind.strip().lower()
        try:
            p = int(value)
        except ValueError:
            raise ConfigError(f"lag policy {text!r}: expected fixed:<p> or <criterion>:<max_p>") from None
        if p < 1:
            raise ConfigError(f"lag policy {text!r}: order must be >= 1")
        if kind == "fixed":
            return cls(p)
        if kind.upper() in CRITERIA:
            return cls(p, kind.upper())
        raise ConfigError(f"lag policy {text!r}: unknown kind {kind!r}")

    def __str__(self) -> str:
        return f"fixed:{self.p}" if self.criterion is None else f"{self.criterion.lower()}:{self.p}"


@dataclass(frozen=True)
class RunConfig:
    data_dir: Path
    countries: tuple[CountryConfig, ...]
    out_dir: Path
    lag: LagPolicy = LagPolicy()
    ordering: tuple[str, ...] = DEFAULT_ORDER
    horizon: int = DEFAULT_HORIZON
    fevd_horizons: tuple[int, ...] = REPORT_HORIZONS
    aggregation: str = "exclude_self"
    thresholds: Thresholds = Thresholds()
    seed: int = 0
    fmt: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.fevd_horizons or min(self.fevd_horizons) < 1:
            raise ConfigError("fevd_horizons must be positive")
        if max(self.fevd_horizons) > self.horizon:
            raise ConfigError(
                f"horizon {self.horizon} is shorter than the largest FEVD horizon {max(self.fevd_horizons)}"
            )
        if self.aggregation not in ("exclude_self", "include_self"):
            raise ConfigError(f"unknown aggregation {self.aggregation!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        ids = [c.country_id for c in self.countries]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate country ids")
        for c in self.countries:
            if not self.data_file(c).is_file():
                raise ConfigError(f"{c.country_id}: data file {self.data_file(c)} not found")

    def data_file(self, country: CountryConfig) -> Path:
        return self.data_dir / (country.file or f"{country.country_id}.csv")

    def to_dict(self) -> dict:
        return {
            "lag": str(self.lag),
            "ordering": [r.lower() for r in self.ordering],
            "horizon": self.horizon,
            "fevd_horizons": list(self.fevd_horizons),
            "aggregation": self.aggregation,
            "thresholds": self.thresholds.to_dict(),
            "seed": self.seed,
            "countries": [c.country_id for c in self.countries],
        }


def bundled_config_path() -> Path:
    return Path(str(resources.files("partialvar.data").joinpath("study", "config.yaml")))


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge the YAML config with command-line overrides; any problem raises ConfigError."""
    path = Path(args.config) if args.config else bundled_config_path()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping")
    run = doc.get("run") or {}
    unknown = set(run) - RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown run keys {sorted(unknown)}")
    countries = tuple(load_country_configs(doc))

    def pick(flag, key, default):
        return flag if flag is not None else run.get(key, default)

    out = args.out or os.environ.get("PARTIALVAR_OUT") or run.get("out") or "partialvar_out"
    data_dir = Path(run.get("data_dir", "."))
    if not data_dir.is_absolute():
        data_dir = path.parent / data_dir
    try:
        ordering = parse_ordering(pick(args.ordering, "ordering", ",".join(DEFAULT_ORDER)))
        return RunConfig(
            data_dir=data_dir,
            countries=countries,
            out_dir=Path(out),
            lag=LagPolicy.parse(pick(args.lag, "lag", "fixed:2")),
            ordering=ordering,
            horizon=int(pick(args.horizon, "horizon", DEFAULT_HORIZON)),
            fevd_horizons=tuple(int(q) for q in run.get("fevd_horizons", REPORT_HORIZONS)),
            aggregation=run.get("aggregation", "exclude_self"),
            thresholds=Thresholds.from_dict(run.get("thresholds")),
            seed=int(pick(args.seed, "seed", 0)),
            fmt=args.format,
            jobs=max(1, int(args.jobs)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# per-country pipeline


@dataclass
class CountryRun:
    country_id: str
    lag_order: int
    estimate: SystemEstimate
    factor: StructuralFactor
    irfs: IRFBundle
    fevd: FEVDTable
    result: CountryResult


def analyse_country(
    config: RunConfig,
    country: CountryConfig,
    panel: AnnualPanel,
    yaeur: np.ndarray,
) -> CountryRun:
    """Design, SUR, identification, responses, FEVD and metrics for one prepared panel."""
    if config.lag.criterion is None:
        p = config.lag.p
    else:
        p = select_lag_order(panel, yaeur, config.lag.p, config.lag.criterion, config.ordering)
    estimate = sur_estimate(build_system(panel, yaeur, p, config.ordering))
    factor = cholesky_identify(estimate.sigma_u, config.ordering, estimate.variables)
    irfs = compute_irfs(estimate, factor, config.horizon, signs={POLM: country.shock_sign})
    table = fevd(irfs.phi, factor.b0, max(config.fevd_horizons), factor.ordering)
    metrics = ya_policy_metrics(irfs)
    stability = estimate.stability()
    result = CountryResult(
        country_id=country.country_id,
        metrics=metrics,
        partvep={q: partvep(table, q) for q in config.fevd_horizons},
        moduli=tuple(float(m) for m in stability.moduli),
        classification=classify_sensitivity(metrics, config.thresholds),
        atypical=changes_sign(irfs.path(POLM, YA), start=1),
        lag_order=p,
        stable=bool(stability.stable),
    )
    return CountryRun(country.country_id, p, estimate, factor, irfs, table, result)


def _failure(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def run_countries(config: RunConfig) -> tuple[dict[str, CountryRun], dict[str, dict]]:
    """Run every country; errors are collected per country, never raised."""
    failures: dict[str, dict] = {}
    prepared: dict[str, AnnualPanel] = {}
    for country in config.countries:
        try:
            panel = load_panel(config.data_file(country), country)
            prepared[country.country_id] = apply_transforms(panel, country)
        except PartialVarError as exc:
            failures[country.country_id] = _failure(exc)

    by_id = {c.country_id: c for c in config.countries}

    def work(cid: str):
        try:
            yaeur = build_euro_aggregate(prepared.values(), cid, config.aggregation)
            return analyse_country(config, by_id[cid], prepared[cid], yaeur)
        except (PartialVarError, np.linalg.LinAlgError) as exc:
            return exc

    ids = list(prepared)
    if config.jobs > 1 and len(ids) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(work, ids))
    else:
        outcomes = [work(cid) for cid in ids]

    runs = {}
    for cid, outcome in zip(ids, outcomes):
        if isinstance(outcome, Exception):
            failures[cid] = _failure(outcome)
        else:
            runs[cid] = outcome
    order = [c.country_id for c in config.countries]
    failures = {cid: failures[cid] for cid in order if cid in failures}
    return runs, failures


# ---------------------------------------------------------------------------
# artifacts


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _estimate_csv(run: CountryRun) -> str:
    lines = ["equation,regressor,estimate,std_error"]
    est = run.estimate
    for eq in est.variables:
        for lab, c, s in zip(est.labels[eq], est.coefficients[eq], est.std_errors[eq]):
            lines.append(f"{eq},{lab},{float(c)!r},{float(s)!r}")
    return "\n".join(lines) + "\n"


def _estimate_doc(run: CountryRun) -> dict:
    doc = run.estimate.to_dict()
    doc["country"] = run.country_id
    doc["identification"] = {"ordering": list(run.factor.ordering), "b0": run.factor.b0.tolist()}
    return doc


def _fevd_csv(run: CountryRun) -> str:
    table = run.fevd
    lines = ["variable,shock,horizon,share"]
    shares = table.shares
    for i, var in enumerate(table.variables):
        for j, shock in enumerate(table.shocks):
            for q in table.horizons:
                lines.append(f"{var},{shock},{q},{float(shares[q - 1, i, j])!r}")
    return "\n".join(lines) + "\n"


def _irf_doc(run: CountryRun) -> dict:
    b = run.irfs
    return {
        "country": run.country_id,
        "variables": list(b.variables),
        "signs": dict(b.signs),
        "responses": {s: b.responses[s].tolist() for s in b.variables},
        "cumulative": {s: b.cumulative[s].tolist() for s in b.variables},
    }


def country_artifacts(run: CountryRun, artifacts: Sequence[str], fmt: str) -> dict[str, str]:
    """File name to content for one country, named ``{country}_{artifact}.{ext}``."""
    cid = run.country_id
    files = {}
    if "estimate" in artifacts:
        if fmt == "json":
            files[f"{cid}_estimate.json"] = _json(_estimate_doc(run))
        else:
            files[f"{cid}_estimate.csv"] = _estimate_csv(run)
            files[f"{cid}_identification.json"] = _json(_estimate_doc(run))
    if "irf" in artifacts:
        if fmt == "json":
            files[f"{cid}_irf.json"] = _json(_irf_doc(run))
        else:
            files[f"{cid}_irf.csv"] = irf_csv({cid: run.irfs})
    if "fevd" in artifacts:
        if fmt == "json":
            files[f"{cid}_fevd.json"] = _json({"country": cid, **run.fevd.to_dict()})
        else:
            files[f"{cid}_fevd.csv"] = _fevd_csv(run)
    if "metrics" in artifacts:
        files[f"{cid}_metrics.json"] = _json(run.result.to_dict())
    return files


def study_artifacts(summary: SummaryReport, fmt: str) -> dict[str, str]:
    files = {"summary.txt": summary.to_text()}
    if fmt == "json":
        files["summary.json"] = summary.to_json()
    else:
        files["summary.csv"] = summary.to_csv()
        if summary.fevd is not None:
            files["fevd_table.csv"] = summary.fevd.to_csv()
        lines = ["key,rank,country"]
        for key, order in summary.rankings.items():
            lines += [f"{key},{i},{cid}" for i, cid in enumerate(order, start=1)]
        files["ranking.csv"] = "\n".join(lines) + "\n"
    return files


def write_tree(out_dir: Path, files: dict[str, str]) -> None:
    """Write every file to a temporary sibling directory first, then move them into place."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.", dir=out_dir.parent))
    try:
        for name in sorted(files):
            (tmp / name).write_text(files[name], encoding="utf-8")
        out_dir.mkdir(exist_ok=True)
        for name in sorted(files):
            os.replace(tmp / name, out_dir / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


COMMAND_ARTIFACTS = {
    "estimate": ("estimate",),
    "irf": ("estimate", "irf"),
    "fevd": ("estimate", "fevd"),
    "rank": ("metrics",),
    "all": ("estimate", "irf", "fevd", "metrics"),
}


def run_pipeline(config: RunConfig, command: str = "all") -> int:
    """Run the batch for ``command`` and write its artifacts; returns the exit status."""
    runs, failures = run_countries(config)
    files: dict[str, str] = {}
    for run in runs.values():
        files.update(country_artifacts(run, COMMAND_ARTIFACTS[command], config.fmt))
    summary = None
    if runs and command in ("rank", "all"):
        results = [run.result for run in runs.values()]
        report = fevd_report({cid: run.fevd for cid, run in runs.items()}, config.fevd_horizons)
        summary = summary_report(results, report, rank_q=max(config.fevd_horizons), failures={
            cid: f"{f['error']}: {f['message']}" for cid, f in failures.items()
        })
        files.update(study_artifacts(summary, config.fmt))
    files["run.json"] = _json(config.to_dict())
    if failures:
        files["failures.json"] = _json(failures)
    write_tree(config.out_dir, files)

    if summary is not None and command == "rank":
        for key, order in summary.rankings.items():
            print(f"{key}: {' > '.join(order)}")
    for cid, f in failures.items():
        print(f"{cid}: {f['error']}: {f['message']}", file=sys.stderr)
    return EXIT_COUNTRY_FAILURES if failures else EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partialvar",
        description="Partial VAR analysis of monetary policy transmission to sector output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run config (default: the bundled synthetic study)")
    common.add_argument("--out", help="output directory (overrides $PARTIALVAR_OUT)")
    common.add_argument("--horizon", type=int, help=f"response horizon in years (default {DEFAULT_HORIZON})")
    common.add_argument("--ordering", help="Cholesky ordering, e.g. price,polm,ya")
    common.add_argument("--lag", help="fixed:<p> or <aic|bic|hq>:<max_p> (default fixed:2)")
    common.add_argument("--seed", type=int, help="random seed recorded with the run")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=1, help="countries analysed in parallel")

    for name, text in (
        ("estimate", "SUR estimates and identification"),
        ("irf", "impulse responses"),
        ("fevd", "variance decompositions"),
        ("rank", "metrics, classes and rankings"),
        ("all", "the full pipeline"),
    ):
        sub.add_parser(name, parents=[common], help=text)

    sim = sub.add_parser("simulate", help="write the synthetic multi-country study")
    sim.add_argument("--out", help="output directory (overrides $PARTIALVAR_OUT)")
    sim.add_argument("--seed", type=int, help="simulation seed (default: the preset seed)")
    sim.add_argument("--years", type=int, help="sample length per country")
    sim.add_argument("--presets", help="preset YAML (default: the bundled presets)")
    return parser


def _simulate(args: argparse.Namespace) -> int:
    from .synthetic import load_presets, write_study

    out = Path(args.out or os.environ.get("PARTIALVAR_OUT") or "partialvar_study")
    presets = load_presets(args.presets)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        write_study(tmp, seed=args.seed, n_years=args.years, presets=presets)
        write_tree(out, {f.name: f.read_text(encoding="utf-8") for f in sorted(tmp.iterdir())})
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        config = load_run_config(args)
    except (ConfigError, OSError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return run_pipeline(config, args.command)


if __name__ == "__main__":
    sys.exit(main())
