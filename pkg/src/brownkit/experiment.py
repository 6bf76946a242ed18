"""Batch experiments: JSON configs, deterministic runs and law tables.

A config names a generator, a replication count, the functionals to record
and the statistical tests to apply to them. Running it writes a manifest,
a per-path functionals CSV, one JSON report per test and a summary CSV.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import pathlib
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from brownkit import laws, stats
from brownkit.errors import BrownkitError, ConfigError
from brownkit.functionals import MAYBE_MISSING, Functional
from brownkit.generators import GeneratorSpec
from brownkit.paths import Ensemble, write_path_csv

SCHEMA = "brownkit.experiment/1"
TEST_KINDS = ("ks", "probability", "mean")
_OPS = {
    ">": np.greater, ">=": np.greater_equal, "<": np.less, "<=": np.less_equal,
}


@dataclass(frozen=True)
class FunctionalRef:
    """A functional recorded under a short id, e.g. ``max1``."""

    id: str
    functional: Functional


@dataclass(frozen=True)
class TestSpec:
    """One statistical test over recorded functionals.

    ``kind`` is one of:

    ``ks``
        KS test of functional ``of`` against ``law`` with free argument
        ``variable``; ``censor_horizon`` switches to the censored statistic.
    ``probability``
        Fraction of paths meeting every condition in ``event`` compared with
        ``law`` (or a numeric ``target``) within ``tolerance``.
    ``mean``
        Sample mean of ``of`` compared with ``law`` or ``target``.
    """

    __test__ = False

    name: str
    kind: str
    law: str | None = None
    params: dict = field(default_factory=dict)
    of: str | None = None
    variable: str | None = None
    event: tuple = ()
    target: float | None = None
    alpha: float | None = None
    tolerance: float | None = None
    censor_horizon: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_name: str
    generator: GeneratorSpec
    replications: int
    master_seed: int
    functionals: tuple[FunctionalRef, ...] = ()
    tests: tuple[TestSpec, ...] = ()
    output_dir: str = "out"

    def __post_init__(self):
        if isinstance(self.replications, bool) or not isinstance(self.replications, int) \
                or self.replications < 1:
            raise ConfigError("must be a positive integer", "replications")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("must be an unsigned 64-bit integer", "master_seed")
        ids = [f.id for f in self.functionals]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate functional ids", "functionals")
        for i, f in enumerate(self.functionals):
            try:
                f.functional.row(self.generator.grid, self.generator.start_value)
            except BrownkitError as exc:
                raise ConfigError(str(exc), f"functionals[{i}]") from None
        for i, t in enumerate(self.tests):
            _check_test(t, set(ids), f"tests[{i}]")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(self.experiment_name, self.generator, self.replications, seed,
                                self.functionals, self.tests, self.output_dir)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "experiment_name": self.experiment_name,
            "generator": self.generator.to_dict(),
            "replications": self.replications,
            "master_seed": self.master_seed,
            "functionals": [{"id": f.id, "name": f.functional.name,
                             "params": dict(f.functional.params)} for f in self.functionals],
            "tests": [_test_dict(t) for t in self.tests],
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if d.get("schema") != SCHEMA:
            raise ConfigError(f"expected {SCHEMA!r}, got {d.get('schema')!r}", "schema")
        for key in ("experiment_name", "generator", "replications", "master_seed"):
            if key not in d:
                raise ConfigError("missing", key)
        try:
            gen = GeneratorSpec.from_dict(d["generator"])
        except BrownkitError as exc:
            raise ConfigError(str(exc), "generator") from None
        refs = []
        for i, f in enumerate(d.get("functionals", [])):
            key = f"functionals[{i}]"
            if not isinstance(f, dict) or "id" not in f or "name" not in f:
                raise ConfigError("needs 'id' and 'name'", key)
            try:
                refs.append(FunctionalRef(f["id"], Functional(f["name"], dict(f.get("params", {})))))
            except BrownkitError as exc:
                raise ConfigError(str(exc), f"{key}.name") from None
        tests = []
        for i, t in enumerate(d.get("tests", [])):
            try:
                tests.append(TestSpec(**{**t, "event": tuple(tuple(e) for e in t.get("event", ()))}))
            except TypeError as exc:
                raise ConfigError(str(exc), f"tests[{i}]") from None
        return cls(d["experiment_name"], gen, d["replications"], d["master_seed"],
                   tuple(refs), tuple(tests), d.get("output_dir", "out"))


def _test_dict(t: TestSpec) -> dict:
    d = {"name": t.name, "kind": t.kind}
    for key in ("law", "of", "variable", "target", "alpha", "tolerance", "censor_horizon"):
        if getattr(t, key) is not None:
            d[key] = getattr(t, key)
    if t.params:
        d["params"] = dict(t.params)
    if t.event:
        d["event"] = [list(e) for e in t.event]
    return d


def _check_test(t: TestSpec, ids: set, key: str):
    if t.kind not in TEST_KINDS:
        raise ConfigError(f"unknown test kind {t.kind!r}", f"{key}.kind")
    if t.law is not None and t.law not in laws.REGISTRY:
        raise ConfigError(f"unknown law {t.law!r}", f"{key}.law")
    if t.kind in ("ks", "mean") and t.of not in ids:
        raise ConfigError(f"unknown functional id {t.of!r}", f"{key}.of")
    if t.kind == "ks":
        if t.law is None or t.variable is None:
            raise ConfigError("ks tests need 'law' and 'variable'", key)
        if t.alpha not in stats.KS_CRITICAL:
            raise ConfigError(f"alpha must be one of {sorted(stats.KS_CRITICAL)}", f"{key}.alpha")
    else:
        if t.tolerance is None or not t.tolerance >= 0:
            raise ConfigError("needs a nonnegative tolerance", f"{key}.tolerance")
        if (t.law is None) == (t.target is None):
            raise ConfigError("give exactly one of 'law' and 'target'", key)
    if t.kind == "probability":
        if not t.event:
            raise ConfigError("probability tests need an event", f"{key}.event")
        for j, cond in enumerate(t.event):
            if len(cond) != 3 or cond[0] not in ids or cond[1] not in _OPS:
                raise ConfigError("conditions are [id, op, value]", f"{key}.event[{j}]")


def load_config(source) -> ExperimentConfig:
    """Read a config from a path, or by name from the shipped configs."""
    path = pathlib.Path(source)
    if path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        name = path.name if path.suffix else f"{path.name}.json"
        shipped = resources.files("brownkit") / "configs" / name
        if not shipped.is_file():
            raise ConfigError(f"no such config {str(source)!r}", "config")
        text = shipped.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "config") from None
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------- running

def _fmt(x: float) -> str:
    # shortest round-trip repr, with integral values written without ".0"
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def _law_target(t: TestSpec) -> float:
    return laws.evaluate(t.law, **t.params).value if t.law else float(t.target)


def run_test(t: TestSpec, columns: dict, config: ExperimentConfig) -> stats.TestReport:
    meta = {"master_seed": config.master_seed, "generator_spec": config.generator.to_dict()}
    if t.kind == "ks":
        fn, _, _ = laws.REGISTRY[t.law]

        def cdf(x):
            return fn(**{**t.params, t.variable: x})

        sample = columns[t.of]
        if t.censor_horizon is not None:
            d, rate = stats.censored_ks_statistic(sample, cdf, t.censor_horizon)
            observed = int(np.sum(~np.isnan(sample)))
            threshold = stats.ks_threshold(observed, t.alpha)
            return stats.TestReport(t.name, observed, d, threshold, d <= threshold,
                                    notes={"alpha": t.alpha, "censoring_rate": rate}, **meta)
        return stats.ks_test(sample, cdf, t.alpha, t.name, **meta)
    if t.kind == "probability":
        hit = np.ones(config.replications, dtype=bool)
        for fid, op, value in t.event:
            col = columns[fid]
            hit &= ~np.isnan(col) & _OPS[op](np.nan_to_num(col), float(value))
        return stats.moment_test(float(hit.mean()), _law_target(t), t.tolerance, t.name,
                                 config.replications, **meta)
    sample = columns[t.of]
    return stats.moment_test(float(np.mean(sample)), _law_target(t), t.tolerance, t.name,
                             int(sample.size), **meta)


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int = 1,
                   write_paths: int = 0) -> list[stats.TestReport]:
    """Run ``config`` and write its artifacts to ``out_dir``.

    Files: ``manifest.json``, ``functionals.csv`` (one row per path and
    functional, CENSORED for missing hitting times), ``reports.jsonl`` (one
    line per test, flushed as each test finishes), ``summary.csv`` and,
    if ``write_paths`` is positive, ``paths/path_<i>.csv`` for the first few
    paths. Outputs depend only on the config and seed.
    """
    out = pathlib.Path(out_dir if out_dir is not None else config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")

    ens = Ensemble(config.generator, config.master_seed, config.replications)
    manifest = {**ens.manifest(), "experiment": config.to_dict()}
    _write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    for i in range(min(write_paths, config.replications)):
        (out / "paths").mkdir(exist_ok=True)
        write_path_csv(ens.path(i), out / "paths" / f"path_{i:05d}.csv")

    refs = config.functionals
    values = ens.evaluate([r.functional for r in refs], workers) if refs else \
        np.empty((config.replications, 0))
    columns = {r.id: values[:, j] for j, r in enumerate(refs)}
    if refs:
        _write_functionals(out / "functionals.csv", refs, values)

    reports = []
    with open(out / "reports.jsonl", "w", encoding="utf-8", newline="") as fh:
        for t in config.tests:
            report = run_test(t, columns, config)
            reports.append(report)
            fh.write(report.to_json() + "\n")
            fh.flush()
    _write_text(out / "summary.csv", stats.summary_csv(reports))
    return reports


def _write_text(path: pathlib.Path, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_functionals(path, refs: Sequence[FunctionalRef], values: np.ndarray):
    labels = [(r.functional.name, r.functional.label(), r.functional.name in MAYBE_MISSING)
              for r in refs]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("path_index,functional,params,value\n")
        for i, row in enumerate(values):
            for (name, label, missing), x in zip(labels, row):
                text = "CENSORED" if missing and math.isnan(x) else _fmt(x)
                fh.write(f"{i},{name},{label},{text}\n")


# ---------------------------------------------------------------- law tables

def parse_grid(spec: str) -> dict[str, list[float]]:
    """Parse ``name=v1,v2,...`` or ``name=start:stop:count`` clauses joined by ``;``.

    ``s=0:1:5`` gives five evenly spaced points including both ends; ``s=``
    gives an empty axis.
    """
    axes: dict[str, list[float]] = {}
    for clause in filter(None, (c.strip() for c in spec.split(";"))):
        name, sep, body = clause.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ConfigError(f"bad grid clause {clause!r}", "grid")
        body = body.strip()
        try:
            if ":" in body:
                start, stop, count = body.split(":")
                axes[name] = np.linspace(float(start), float(stop), int(count)).tolist()
            else:
                axes[name] = [float(x) for x in body.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad grid values {body!r}", f"grid.{name}") from None
    return axes


def emit_law_table(law: str, grid: dict[str, Sequence[float]], target) -> int:
    """Write ``param..., value`` rows for ``law`` over the grid's product.

    Rows follow the grid order (last axis fastest). Every point is evaluated
    before anything is written, so an invalid point leaves no file behind.
    Returns the number of rows.
    """
    if law not in laws.REGISTRY:
        raise ConfigError(f"unknown law {law!r}", "law")
    _, names, _ = laws.REGISTRY[law]
    extra = sorted(set(grid) - set(names))
    if extra:
        raise ConfigError(f"unexpected parameters {extra}", "grid")
    axes = [n for n in names if n in grid]
    rows = []
    for point in itertools.product(*(grid[n] for n in axes)):
        params = dict(zip(axes, point))
        try:
            rows.append(point + (laws.evaluate(law, **params).value,))
        except BrownkitError as exc:
            raise ConfigError(f"{law} at {params}: {exc}", "grid") from None
    lines = [",".join(axes + ["value"])] + [",".join(_fmt(x) for x in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        _write_text(pathlib.Path(target), text)
    return len(rows)
