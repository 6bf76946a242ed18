"""Acceptance suite: fourteen Monte Carlo criteria, each at a fixed seed.

Every criterion returns one :class:`AcceptanceResult` whose ``parts`` are the
individual checks; the criterion passes when every part does. Frozen
calibration values (modulus band, roughness threshold) come from
``calibration/calibration.json`` in the source tree and are copied here.
"""

from __future__ import annotations

import json
import math
import pathlib
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from brownkit import laws, stats
from brownkit.functionals import Functional as F
from brownkit.generators import GeneratorSpec, generate_dyadic
from brownkit.paths import Ensemble, TimeGrid
from brownkit.rng import StreamKey, uniform_block

# frozen by calibration/calibrate.py (independent numpy oracle)
MODULUS_BAND = (0.8, 1.3)
ROUGHNESS_THRESHOLD = 0.7
# pre-calibration values, still reported alongside the frozen ones
NOMINAL_MODULUS_BAND = (0.8, 1.15)
NOMINAL_ROUGHNESS_THRESHOLD = 50.0


@dataclass
class AcceptanceResult:
    ac_id: str
    title: str
    parts: list[stats.TestReport] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.parts)

    def line(self) -> str:
        detail = "; ".join(f"{p.test_name} {_num(p.statistic)} vs {_num(p.threshold)}"
                           for p in self.parts)
        return f"{self.ac_id} {'PASS' if self.passed else 'FAIL'} {self.title}: {detail}"

    def to_dict(self) -> dict:
        return {"ac_id": self.ac_id, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "parts": [p.to_dict() for p in self.parts]}


def _num(x: float) -> str:
    return format(x, ".6g")


def _exact(horizon: float, steps: int) -> GeneratorSpec:
    return GeneratorSpec("ExactIncrement", TimeGrid(horizon, steps))


def _within(name, estimate, target, tol, n, seed, spec, **notes):
    return stats.moment_test(estimate, target, tol, name, n, master_seed=seed,
                             generator_spec=spec.to_dict() if spec else None, notes=notes)


def _at_least(name, fraction, minimum, n, seed, spec, **notes):
    # statistic = shortfall below the required fraction, so passed = statistic <= 0
    short = minimum - fraction
    return stats.TestReport(name, n, short, 0.0, short <= 0.0, seed,
                            spec.to_dict() if spec else None,
                            dict(notes, fraction=fraction, required=minimum))


def _below(name, value, limit, n, seed, spec, **notes):
    return stats.TestReport(name, n, float(value), float(limit), value < limit, seed,
                            spec.to_dict() if spec else None, notes)


# ---------------------------------------------------------------- criteria

def ac_reflection(workers=1):
    seed, n_paths = 1001, 100_000
    spec = _exact(1.0, 2 ** 14)
    r = Ensemble(spec, seed, n_paths).evaluate([F.of("running_max", t=1.0), F.of("value_at", t=1.0)],
                                               workers)
    p_max = float(np.mean(r[:, 0] > 1.0))
    p_joint = float(np.mean((r[:, 0] > 1.0) & (r[:, 1] < 0.0)))
    ac1 = [_within("P(M>1)", p_max, laws.max_cdf_complement(1.0, 1.0), 0.012, n_paths, seed, spec)]
    ac2 = [_within("P(M>1,B<0)", p_joint, laws.reflection_joint_prob(1.0, 0.0, 1.0), 0.006,
                   n_paths, seed, spec)]
    return ac1, ac2


def ac3_hitting(workers=1):
    seed, n_paths = 1003, 100_000
    spec = _exact(4.0, 2 ** 16)
    tau = Ensemble(spec, seed, n_paths).evaluate([F.of("first_hitting_time", a=1.0)], workers)[:, 0]
    d, rate = stats.censored_ks_statistic(tau, lambda t: laws.hitting_cdf(1.0, t), 4.0)
    return [_below("KS(tau_1)", d, 0.02, n_paths, seed, spec, censoring_rate=rate,
                   expected_censoring=1.0 - laws.hitting_cdf(1.0, 4.0))]


def ac4_arcsine(workers=1):
    seed, n_paths = 1004, 100_000
    spec = _exact(1.0, 2 ** 16)
    last = Ensemble(spec, seed, n_paths).evaluate([F.of("last_zero_before", t=1.0)], workers)[:, 0]
    parts = []
    for s in (0.25, 0.5, 0.75):
        est = float(np.mean(last <= s))
        parts.append(_within(f"P(L<={s})", est, laws.arcsine_cdf(s), 0.01, n_paths, seed, spec))
    return parts


def ac5_kl(workers=1):
    seed, n_paths = 1005, 50_000
    spec = GeneratorSpec("KarhunenLoeve", TimeGrid(1.0, 10), kl_terms=2000)
    r = Ensemble(spec, seed, n_paths).evaluate(
        [F.of("value_at", t=0.5), F.of("value_at", t=0.3), F.of("value_at", t=0.7)], workers)
    var = float(np.var(r[:, 0], ddof=1))
    cov = float(np.cov(r[:, 1], r[:, 2])[0, 1])
    trace = laws.kl_trace(10 ** 6)
    return [
        _within("Var W(0.5)", var, 0.5, 0.015, n_paths, seed, spec),
        _within("Cov W(0.3),W(0.7)", cov, 0.3, 0.015, n_paths, seed, spec),
        _within("trace 1e6 terms", trace, 0.5, 1e-6, 10 ** 6, None, None),
    ]


def ac6_nesting(workers=1):
    top, seeds = 16, range(6000, 6100)
    spec = {m: GeneratorSpec("DyadicRefine", TimeGrid(1.0, 2 ** m)) for m in range(top + 1)}
    mismatches = 0
    for seed in seeds:
        key = StreamKey(seed, 0)
        paths = {m: generate_dyadic(spec[m], key, m).values for m in range(top + 1)}
        for m in range(1, top + 1):
            fine = paths[m]
            for c in range(m):
                if not np.array_equal(fine[:: 2 ** (m - c)], paths[c]):
                    mismatches += 1
    return [_below("mismatched level pairs", mismatches, 0.5, len(seeds), seeds[0], spec[top],
                   levels=f"0..{top}")]


def ac7_qv(workers=1):
    seed, n_paths = 1007, 1000
    spec = _exact(1.0, 2 ** 16)
    qv = Ensemble(spec, seed, n_paths).evaluate([F.of("quadratic_variation", t=1.0)], workers)[:, 0]
    frac = float(np.mean(np.abs(qv - 1.0) < 0.03))
    return [_within("mean QV(1)", float(qv.mean()), 1.0, 0.002, n_paths, seed, spec),
            _at_least("share |QV-1|<0.03", frac, 0.99, n_paths, seed, spec)]


def ac8_donsker(workers=1):
    seed, n_paths = 1008, 50_000
    spec = GeneratorSpec("DonskerPartialSum", TimeGrid(1.0, 1), donsker_n=1024, increment_law="coin")
    z = Ensemble(spec, seed, n_paths).evaluate([F.of("value_at", t=1.0)], workers)[:, 0]
    return [_below("KS(Z_n(1))", stats.ks_statistic(z, laws.normal_cdf), 0.015, n_paths, seed, spec)]


def ac9_empirical(workers=1):
    seed, n_paths = 1009, 50_000
    spec = GeneratorSpec("EmpiricalProcess", TimeGrid(1.0, 2), sample_size=10_000)
    w = Ensemble(spec, seed, n_paths).evaluate([F.of("value_at", t=0.5)], workers)[:, 0]
    d = stats.ks_statistic(w, lambda x: laws.gaussian_cdf(x, 0.25))
    return [_below("KS(W_n(0.5))", d, 0.015, n_paths, seed, spec)]


def ac10_local_time(workers=1):
    seed, n_paths = 1010, 1000
    spec = _exact(1.0, 2 ** 16)
    eps_list = [2.0 ** -k for k in range(4, 9)]
    r = Ensemble(spec, seed, n_paths).evaluate(
        [F.of("local_time_tanaka", a=0.0, t=1.0),
         F.of("local_time_occupation", a=0.0, t=1.0, epsilon=2.0 ** -6)]
        + [F.of("zero_measure_estimate", epsilon=e) for e in eps_list], workers)
    parts = [_below("mean |Tanaka-occupation|", float(np.mean(np.abs(r[:, 0] - r[:, 1]))), 0.05,
                    n_paths, seed, spec)]
    means = r[:, 2:].mean(axis=0)
    for k in range(len(eps_list) - 1):
        ratio = float(means[k + 1] / means[k])
        parts.append(stats.TestReport(
            f"ratio eps=2^-{k + 5}/2^-{k + 4}", n_paths, ratio, 0.6, 0.4 <= ratio <= 0.6,
            seed, spec.to_dict(), {"band": [0.4, 0.6]}))
    return parts


def ac11_roughness(workers=1):
    seed = 1011
    spec = _exact(1.0, 2 ** 20)
    mod = Ensemble(spec, seed, 20).evaluate([F.of("modulus_statistic", delta=2.0 ** -14)],
                                            workers)[:, 0]
    lo, hi = MODULUS_BAND
    in_band = float(np.mean((mod >= lo) & (mod <= hi)))
    spec16 = _exact(1.0, 2 ** 16)
    rough = Ensemble(spec16, 1111, 1000).evaluate([F.of("roughness_statistic")], workers)[:, 0]
    above = float(np.mean(rough > ROUGHNESS_THRESHOLD))
    nlo, nhi = NOMINAL_MODULUS_BAND
    return [
        _at_least(f"share modulus in [{lo}, {hi}]", in_band, 0.9, 20, seed, spec,
                  values=sorted(mod.tolist()),
                  share_in_nominal_band=float(np.mean((mod >= nlo) & (mod <= nhi)))),
        _at_least(f"share roughness>{ROUGHNESS_THRESHOLD}", above, 0.99, 1000, 1111, spec16,
                  median=float(np.median(rough)), maximum=float(rough.max()),
                  share_above_nominal=float(np.mean(rough > NOMINAL_ROUGHNESS_THRESHOLD))),
    ]


def ac12_sign_change(workers=1):
    seed, n_paths = 1012, 1000
    spec = _exact(1.0, 2 ** 20)
    r = Ensemble(spec, seed, n_paths).evaluate([F.of("sign_change_by", delta=0.01)], workers)[:, 0]
    return [_at_least("share sign change by 0.01", float(r.mean()), 0.97, n_paths, seed, spec)]


def ac13_truncated(workers=1):
    seed, n_paths = 1013, 100_000
    spec = _exact(8.0, 2 ** 17)
    g = Ensemble(spec, seed, n_paths).evaluate([F.of("truncated_hitting_time", a=0.0, after=1.0)],
                                               workers)[:, 0]
    seen = g[~np.isnan(g)]
    edges = np.linspace(1.0, 8.0, 21)
    counts = np.histogram(seen, bins=edges)[0]
    cdf = laws.truncated_hitting_cdf(edges)
    expected = np.diff(cdf) / cdf[-1]
    gap = float(np.max(np.abs(counts / seen.size - expected)))
    return [_below("max bin gap", gap, 0.015, n_paths, seed, spec,
                   censoring_rate=1.0 - seen.size / n_paths,
                   expected_censoring=1.0 - float(cdf[-1]))]


def ac14_calibration(workers=1):
    seeds, size = range(14000, 14200), 10_000
    rejects = 0
    for s in seeds:
        u = uniform_block(StreamKey(s, 0), 0, size)
        if not stats.ks_test(u, lambda x: x, 0.05).passed:
            rejects += 1
    return [stats.TestReport("rejections of 200", len(seeds), rejects, 16, 4 <= rejects <= 16,
                             seeds[0], None, {"band": [4, 16], "sample_size": size})]


CRITERIA: list[tuple[str, str, Callable]] = [
    ("AC-1", "reflection max law", None),
    ("AC-2", "joint reflection law", None),
    ("AC-3", "first hitting time law", ac3_hitting),
    ("AC-4", "arcsine law of the last zero", ac4_arcsine),
    ("AC-5", "Karhunen-Loeve construction", ac5_kl),
    ("AC-6", "dyadic nesting", ac6_nesting),
    ("AC-7", "quadratic variation", ac7_qv),
    ("AC-8", "Donsker partial sums", ac8_donsker),
    ("AC-9", "empirical process bridge law", ac9_empirical),
    ("AC-10", "local time cross-validation", ac10_local_time),
    ("AC-11", "roughness and modulus", ac11_roughness),
    ("AC-12", "instant sign change", ac12_sign_change),
    ("AC-13", "truncated hitting density", ac13_truncated),
    ("AC-14", "KS harness calibration", ac14_calibration),
]
IDS = [c[0] for c in CRITERIA]


def _echo(line: str) -> None:
    print(line, flush=True)


def run(ids=None, workers: int = 1, echo: Callable | None = _echo) -> list[AcceptanceResult]:
    """Run the selected criteria (all by default), echoing one line per criterion."""
    wanted = list(IDS if ids is None else ids)
    unknown = sorted(set(wanted) - set(IDS))
    if unknown:
        raise KeyError(f"unknown criteria {unknown}")
    results = []
    cache = {}
    for ac_id, title, fn in CRITERIA:
        if ac_id not in wanted:
            continue
        start = time.perf_counter()
        if ac_id in ("AC-1", "AC-2"):
            if "reflection" not in cache:
                cache["reflection"] = ac_reflection(workers)
            parts = cache["reflection"][0 if ac_id == "AC-1" else 1]
        else:
            parts = fn(workers)
        res = AcceptanceResult(ac_id, title, parts, time.perf_counter() - start)
        results.append(res)
        if echo:
            echo(res.line())
    return results


def write_results(results: list[AcceptanceResult], out_dir) -> None:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "acceptance.jsonl", "w", encoding="utf-8", newline="") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), sort_keys=True, default=_plain) + "\n")
    with open(out / "acceptance.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("ac_id,test_name,statistic,threshold,passed\n")
        for r in results:
            for p in r.parts:
                fh.write(f"{r.ac_id},{p.test_name},{format(float(p.statistic), '.17g')},"
                         f"{format(float(p.threshold), '.17g')},{str(bool(p.passed)).lower()}\n")


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    raise TypeError(type(x).__name__)
