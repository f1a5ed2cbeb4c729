"""Monte Carlo benchmark engine, hyperparameter tuning, and CSV application.

Reproducibility contract: every replicate draws from an RNG stream keyed by
``(seed, scenario, n, measure, replicate)`` through a SHA-256 stable hash
into a numpy SeedSequence feeding a Philox counter-based generator. Streams
never depend on worker scheduling, so results are identical for any worker
count, and reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import measures as meas
from . import scenarios as scen
from .core import Sample2D
from .evaluation import METRIC_NAMES, aggregate, confusion, metrics
from .hdr import classify, estimate_hdr, measure_average

__all__ = [
    "RunConfig",
    "ResultRecord",
    "replicate_rng",
    "oracle_rng",
    "run_bench",
    "run_tune",
    "apply_measures",
    "simulate_scenario",
    "fmt_float",
]

log = logging.getLogger("hdrkit")

_DEFAULT_REF_SIZE = 10 ** 6


def _stable_key(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def replicate_rng(seed: int, scenario_id: str, n: int, measure: str, replicate: int) -> np.random.Generator:
    """Independent, scheduler-agnostic stream for one benchmark replicate."""
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, _stable_key(scenario_id), n, _stable_key(measure), replicate]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def oracle_rng(seed: int, scenario_id: str) -> np.random.Generator:
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, _stable_key(scenario_id), _stable_key("truth-oracle")]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class RunConfig:
    scenarios: tuple
    ns: tuple
    measures: tuple
    reps: int = 300
    alpha: float = 0.05
    seed: int = 42
    ref_size: int = _DEFAULT_REF_SIZE
    workers: int = 1
    k_override: int | None = None
    eps_override: float | None = None
    timing: bool = False

    def __post_init__(self):
        for sid in self.scenarios:
            scen.scenario(sid)  # raises on an unknown id before any work
        for m in self.measures:
            if m not in meas.MEASURE_KINDS:
                raise ValueError(f"unknown measure {m!r} (choose from {', '.join(meas.MEASURE_KINDS)})")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    n: int
    measure: str
    replicate: int
    row: tuple  # (err, fpr, fnr, accuracy, f1, mcc)
    hyperparams: str
    fitted_copula_family: str
    wall_time_ms: float


def measure_spec_for(s: scen.Scenario, measure: str, k=None, eps=None) -> meas.MeasureSpec:
    """Spec for one measure under one scenario: support class from the
    scenario, true marginal families for the parametric-copula kinds."""
    support = meas.SIMPLEX if s.is_simplex else meas.UNBOUNDED
    kwargs = {"kind": measure, "support_class": support}
    if measure in (meas.M1_KNN_EUCL, meas.M2_KNN_CDF) and k is not None:
        kwargs["k"] = int(k)
    if measure in (meas.M3_ECDF_RECT, meas.M3_NPCOP_RECT, meas.M3_PCOP_RECT) and eps is not None:
        kwargs["eps"] = float(eps)
    if measure in (meas.M0_PCOP, meas.M3_PCOP_RECT):
        kwargs["marginal_families"] = (s.marginals[0].family, s.marginals[1].family)
    return meas.MeasureSpec(**kwargs)


def _fmt_hyper(hp: dict) -> str:
    def one(v):
        return str(v) if isinstance(v, (int, np.integer)) else fmt_float(v)

    return ";".join(f"{k}={one(v)}" for k, v in sorted(hp.items()))


def fmt_float(x) -> str:
    """Shortest decimal serialization that round-trips to the same double."""
    return repr(float(x))


def run_replicate(s: scen.Scenario, n: int, measure: str, replicate: int, oracle: scen.TruthOracle,
                  seed: int, alpha: float, k=None, eps=None) -> ResultRecord:
    """One cell of the benchmark: sample, fit, threshold, classify, score."""
    rng = replicate_rng(seed, s.id, n, measure, replicate)
    t0 = time.perf_counter()
    sample = scen.sample_scenario(s, n, rng)
    spec = measure_spec_for(s, measure, k=k, eps=eps)
    fitted = meas.fit_measure(spec, sample)
    scores = fitted.score_vector(sample)
    region = estimate_hdr(scores, alpha, measure)
    pred = classify(region, scores.scores)
    truth = scen.label_truth(oracle, s, sample.points)
    row = metrics(confusion(pred, truth))
    ms = (time.perf_counter() - t0) * 1e3
    return ResultRecord(
        s.id, n, measure, replicate, row.as_tuple(),
        _fmt_hyper(fitted.hyperparams), fitted.fitted_copula_family or "", ms,
    )


def _run_batch(args):
    sid, n, measure, rep_lo, rep_hi, f_alpha, ref_size, seed, alpha, k, eps = args
    s = scen.scenario(sid)
    oracle = scen.TruthOracle(sid, alpha, f_alpha, ref_size)
    return [run_replicate(s, n, measure, r, oracle, seed, alpha, k, eps) for r in range(rep_lo, rep_hi)]


def _build_oracles(config: RunConfig) -> dict:
    oracles = {}
    for sid in config.scenarios:
        s = scen.scenario(sid)
        oracles[sid] = scen.build_truth_oracle(s, config.alpha, config.ref_size, oracle_rng(config.seed, sid))
        log.info("truth oracle %s: f_alpha=%.6g (ref_size=%d)", sid, oracles[sid].f_alpha, config.ref_size)
    return oracles


def run_bench(config: RunConfig):
    """Run the full benchmark grid.

    Returns ``(records, summary)`` where records is the flat per-replicate
    list ordered by (scenario, n, measure, replicate) and summary maps
    (scenario, n, measure) to per-metric (mean, sd) pairs.
    """
    oracles = _build_oracles(config)
    batch = max(1, min(50, config.reps // max(1, config.workers * 4) or 1))
    tasks = []
    for sid in config.scenarios:
        for n in config.ns:
            for m in config.measures:
                for lo in range(0, config.reps, batch):
                    hi = min(lo + batch, config.reps)
                    tasks.append((sid, n, m, lo, hi, oracles[sid].f_alpha, config.ref_size,
                                  config.seed, config.alpha, config.k_override, config.eps_override))

    if config.workers == 1:
        chunks = [_run_batch(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run_batch, tasks))

    records = [rec for chunk in chunks for rec in chunk]
    sid_order = {sid: i for i, sid in enumerate(config.scenarios)}
    n_order = {n: i for i, n in enumerate(config.ns)}
    m_order = {m: i for i, m in enumerate(config.measures)}
    records.sort(key=lambda r: (sid_order[r.scenario], n_order[r.n], m_order[r.measure], r.replicate))

    summary = {}
    for sid in config.scenarios:
        for n in config.ns:
            for m in config.measures:
                cell = [r for r in records if r.scenario == sid and r.n == n and r.measure == m]
                if len(cell) >= 2:
                    rows = [_metrics_row(r) for r in cell]
                    summary[(sid, n, m)] = aggregate(rows)
                else:
                    summary[(sid, n, m)] = {
                        name: (cell[0].row[i], float("nan")) for i, name in enumerate(METRIC_NAMES)
                    }
    return records, summary


def _metrics_row(rec: ResultRecord):
    from .evaluation import MetricsRow

    return MetricsRow(*rec.row)


def write_results_csv(path, records, timing: bool = False):
    cols = ["scenario", "n", "measure", "replicate", *METRIC_NAMES, "hyperparams_used", "fitted_copula_family"]
    if timing:
        cols.append("wall_time_ms")
    lines = [",".join(cols)]
    for r in records:
        vals = [r.scenario, str(r.n), r.measure, str(r.replicate)]
        vals += [fmt_float(v) for v in r.row]
        vals += [r.hyperparams, r.fitted_copula_family]
        if timing:
            vals.append(fmt_float(r.wall_time_ms))
        lines.append(",".join(vals))
    _write_text(path, lines)


def write_summary_csv(path, config: RunConfig, summary):
    cols = ["scenario", "n", "measure", "reps"]
    for name in METRIC_NAMES:
        cols += [f"{name}_mean", f"{name}_sd"]
    lines = [",".join(cols)]
    for sid in config.scenarios:
        for n in config.ns:
            for m in config.measures:
                cell = summary[(sid, n, m)]
                vals = [sid, str(n), m, str(config.reps)]
                for name in METRIC_NAMES:
                    mean, sd = cell[name]
                    vals += [fmt_float(mean), fmt_float(sd)]
                lines.append(",".join(vals))
    _write_text(path, lines)


def _write_text(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# tuning


def run_tune(sid: str, n: int, measure: str, grid, reps: int = 50, alpha: float = 0.05,
             seed: int = 42, ref_size: int = _DEFAULT_REF_SIZE, workers: int = 1):
    """Mean metrics per hyperparameter grid value (k for the kNN measures,
    eps for the box measures), sharing replicate streams across values."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    if measure in (meas.M1_KNN_EUCL, meas.M2_KNN_CDF):
        param = "k"
    elif measure in (meas.M3_ECDF_RECT, meas.M3_NPCOP_RECT, meas.M3_PCOP_RECT):
        param = "eps"
    else:
        raise ValueError(f"measure {measure} has no tunable hyperparameter")
    rows = []
    for g in grid:
        config = RunConfig(
            scenarios=(sid,), ns=(n,), measures=(measure,), reps=reps, alpha=alpha, seed=seed,
            ref_size=ref_size, workers=workers,
            k_override=int(g) if param == "k" else None,
            eps_override=float(g) if param == "eps" else None,
        )
        _, summary = run_bench(config)
        cell = summary[(sid, n, measure)]
        rows.append((g, {name: cell[name][0] for name in METRIC_NAMES}))
    return param, rows


def write_tune_csv(path, sid, n, measure, param, rows, reps):
    cols = ["scenario", "n", "measure", "param", "value", "reps"] + [f"{m}_mean" for m in METRIC_NAMES]
    lines = [",".join(cols)]
    for g, cell in rows:
        gtxt = str(g) if isinstance(g, (int, np.integer)) else fmt_float(g)
        vals = [sid, str(n), measure, param, gtxt, str(reps)]
        vals += [fmt_float(cell[name]) for name in METRIC_NAMES]
        lines.append(",".join(vals))
    _write_text(path, lines)


# ---------------------------------------------------------------------------
# application to external data


@dataclass
class ApplyResult:
    labels: dict  # measure -> boolean inside-vector
    consensus: np.ndarray
    hyperparams: dict = field(default_factory=dict)


def apply_measures(points, measure_tokens, alpha: float = 0.05, k=None, eps=None) -> ApplyResult:
    """Fit each requested measure on the points, estimate its HDR, and form
    the strict-majority consensus labels."""
    sample = Sample2D(points)
    labels = {}
    hps = {}
    for token in measure_tokens:
        if token not in meas.MEASURE_KINDS:
            raise ValueError(f"unknown measure {token!r}")
        kwargs = {"kind": token}
        if token in (meas.M1_KNN_EUCL, meas.M2_KNN_CDF) and k is not None:
            kwargs["k"] = int(k)
        if token in (meas.M3_ECDF_RECT, meas.M3_NPCOP_RECT, meas.M3_PCOP_RECT) and eps is not None:
            kwargs["eps"] = float(eps)
        if token in (meas.M0_PCOP, meas.M3_PCOP_RECT):
            # external data carries no true family; normal marginals are the
            # documented default (the nonparametric kinds need no such choice)
            kwargs["marginal_families"] = ("normal", "normal")
        fitted = meas.fit_measure(meas.MeasureSpec(**kwargs), sample)
        scores = fitted.score_vector(sample)
        region = estimate_hdr(scores, alpha, token)
        labels[token] = classify(region, scores.scores)
        hps[token] = _fmt_hyper(fitted.hyperparams)
    consensus = measure_average([labels[t] for t in measure_tokens])
    return ApplyResult(labels, consensus, hps)


def simulate_scenario(sid: str, n: int, seed: int):
    """Draws plus their true density, for inspection and round-trip tests."""
    s = scen.scenario(sid)
    rng = replicate_rng(seed, s.id, n, "simulate", 0)
    sample = scen.sample_scenario(s, n, rng)
    dens = scen.true_density(s, sample.points)
    return sample, dens
