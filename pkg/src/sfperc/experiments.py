"""Seeded ensemble experiments, result aggregation, and persistence.

Each experiment maps a config to per-(n, replica) records plus the theory
targets the records are meant to approach, so a written report can be audited
without recomputing anything.  Runs are deterministic given (config,
master_seed): every replica draws from its own generator seeded by a splitmix
chain over (master_seed, n, replica), which also makes thread-parallel runs
byte-identical to serial ones.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .components import component_sizes, core_report
from .errors import ConfigError, DomainError, ScheduleInfeasibleError
from .exploration import (
    repeat_fraction,
    residual_largest_component,
    run_exploration,
    sup_distance_to_limit,
)
from .graphgen import (
    percolate_coupled,
    sample_mnr,
    sample_percolated_mnr_direct,
)
from .params import (
    LambdaRule,
    WeightSequence,
    build_weights,
    make_schedule,
    model_params,
)
from .theory import (
    compute_constants,
    core_limit,
    horizon_for_forward_degree,
    limit_curve_max,
    limit_curve_z,
    truncated_operator_norm,
)

RESULT_VERSION = 1

EXPERIMENTS = (
    "multi_giant",
    "single_vs_multi",
    "exploration_limit",
    "repeat_fraction",
    "residual_components",
    "core_giant",
    "core_weight",
    "one_neighborhood",
    "theory_tables",
)

_MODE = {
    "multi_giant": "multi",
    "exploration_limit": "multi",
    "repeat_fraction": "multi",
    "residual_components": "multi",
    "theory_tables": "multi",
    "single_vs_multi": "single",
    "core_giant": "single",
    "core_weight": "single",
    "one_neighborhood": "single",
}

_CORE_EXPERIMENTS = ("core_giant", "core_weight", "one_neighborhood")


def default_lambda_rule(experiment: str) -> LambdaRule:
    # Core experiments keep lambda constant so the core scale N_n grows with n;
    # everything else uses the slowly growing power rule.
    if experiment in _CORE_EXPERIMENTS:
        return LambdaRule("constant", 10.0)
    return LambdaRule("power", 0.1)


def default_n_grid(experiment: str) -> tuple[int, ...]:
    if experiment in _CORE_EXPERIMENTS:
        return (10**5, 10**6)
    if experiment == "residual_components":
        return (10**4, 10**5)
    if experiment == "theory_tables":
        return (10**6,)
    return (10**4, 10**5, 10**6)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


_CONFIG_FIELDS = {
    "version", "experiment", "tau", "C", "n_grid", "lambda_rule", "a", "T",
    "replicas", "master_seed", "output_path", "output_format",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete, serializable description of one ensemble run."""

    experiment: str
    tau: float = 2.5
    C: float = 1.0
    n_grid: tuple[int, ...] | None = None
    lambda_rule: LambdaRule | None = None
    a: float = 1.0
    T: float | None = None
    replicas: int = 20
    master_seed: int = 1
    output_path: str | None = None
    output_format: str = "json"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        if self.n_grid is None:
            object.__setattr__(self, "n_grid", default_n_grid(self.experiment))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.lambda_rule is None:
            object.__setattr__(self, "lambda_rule", default_lambda_rule(self.experiment))
        if self.replicas < 1:
            raise ConfigError(f"replicas must be >= 1, got {self.replicas}")
        if not self.n_grid:
            raise ConfigError("n_grid must be nonempty")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ConfigError(f"n_grid must be strictly ascending, got {self.n_grid}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be 'csv' or 'json', got {self.output_format!r}")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ConfigError("master_seed must fit in 64 bits")
        if self.experiment in _CORE_EXPERIMENTS and not (self.a > 0):
            raise ConfigError(f"core experiments need a > 0, got a={self.a}")
        # every schedule must be feasible before any sampling happens
        for n in self.n_grid:
            try:
                make_schedule(model_params(self.tau, self.C, n), self.mode, self.lambda_rule)
            except (ScheduleInfeasibleError, DomainError) as e:
                raise ConfigError(f"infeasible schedule at n={n}: {e}") from e

    @property
    def mode(self) -> str:
        return _MODE[self.experiment]

    def to_dict(self) -> dict:
        return {
            "version": RESULT_VERSION,
            "experiment": self.experiment,
            "tau": self.tau,
            "C": self.C,
            "n_grid": list(self.n_grid),
            "lambda_rule": self.lambda_rule.to_dict(),
            "a": self.a,
            "T": self.T,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
            "output_path": self.output_path,
            "output_format": self.output_format,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        """Fail-closed parser: unknown fields and version mismatches are errors."""
        if not isinstance(d, dict):
            raise ConfigError(f"config must be a JSON object, got {type(d).__name__}")
        extra = set(d) - _CONFIG_FIELDS
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if d.get("version", RESULT_VERSION) != RESULT_VERSION:
            raise ConfigError(f"unsupported config version {d.get('version')!r}")
        if "experiment" not in d:
            raise ConfigError("config needs an 'experiment' field")
        kwargs = {}
        for key in ("experiment", "tau", "C", "a", "T", "replicas",
                    "master_seed", "output_path", "output_format"):
            if key in d and d[key] is not None:
                kwargs[key] = d[key]
        if d.get("n_grid") is not None:
            kwargs["n_grid"] = tuple(d["n_grid"])
        if d.get("lambda_rule") is not None:
            kwargs["lambda_rule"] = LambdaRule.from_dict(d["lambda_rule"])
        return cls(**kwargs)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config at {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


# --------------------------------------------------------------------------
# seed derivation
# --------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, n: int, replica: int) -> int:
    """Deterministic 64-bit stream seed for one (n, replica) cell."""
    s = _splitmix64(master_seed & _MASK64)
    s = _splitmix64(s ^ (n & _MASK64))
    return _splitmix64(s ^ (replica & _MASK64))


# --------------------------------------------------------------------------
# per-n context and per-replica workers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Context:
    """Shared read-only state for all replicas at one n."""

    n: int
    weights: WeightSequence
    schedule: object
    constants: object
    horizon: float  # exploration horizon in rescaled time


def _build_context(config: ExperimentConfig, n: int) -> _Context:
    params = model_params(config.tau, config.C, n)
    ws = build_weights(params)
    sch = make_schedule(params, config.mode, config.lambda_rule)
    constants = compute_constants(params)
    if config.T is not None:
        horizon = float(config.T)
    elif config.experiment == "exploration_limit":
        horizon = 1.5 * constants.zeta
    elif config.experiment == "residual_components":
        horizon = horizon_for_forward_degree(params, 0.25)
    else:
        horizon = 1.0
    return _Context(n=n, weights=ws, schedule=sch, constants=constants, horizon=horizon)


def _replica_record(config: ExperimentConfig, ctx: _Context, replica: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    ws, sch = ctx.weights, ctx.schedule
    rec = {"n": ctx.n, "replica": replica, "seed": seed}
    kind = config.experiment

    if kind == "multi_giant":
        g = sample_percolated_mnr_direct(ws, sch.pi_n, rng)
        g.validate()
        summary = component_sizes(g)
        rec.update(
            c1=summary.giant_size,
            c2=summary.second_size,
            c1_over_beta=summary.giant_size / sch.beta_n,
            c2_over_beta=summary.second_size / sch.beta_n,
        )
    elif kind == "single_vs_multi":
        g = sample_mnr(ws, rng)
        g_multi, g_simple = percolate_coupled(g, sch.pi_n, rng)
        g_multi.validate()
        g_simple.validate()
        c1 = component_sizes(g_multi).giant_size
        c1_star = component_sizes(g_simple).giant_size
        if c1 < c1_star:
            raise AssertionError(
                f"coupling violated at n={ctx.n}, replica={replica}: |C1|={c1} < |C1*|={c1_star}"
            )
        rec.update(
            c1_over_beta=c1 / sch.beta_n,
            c1_star_over_beta=c1_star / sch.beta_n,
            diff_over_beta=(c1 - c1_star) / sch.beta_n,
        )
    elif kind == "exploration_limit":
        steps = math.floor(ctx.horizon * sch.beta_n)
        trace = run_exploration(ws, sch, steps, rng)
        rec.update(sup_distance=sup_distance_to_limit(trace, sch, ctx.constants, ctx.horizon))
    elif kind == "repeat_fraction":
        steps = math.floor(ctx.horizon * sch.beta_n)
        trace = run_exploration(ws, sch, steps, rng)
        rec.update(pi_n=sch.pi_n, repeat_fraction=repeat_fraction(trace, sch, ctx.horizon))
    elif kind == "residual_components":
        largest = residual_largest_component(ws, sch, ctx.horizon, rng)
        rec.update(residual_largest=largest, residual_over_beta=largest / sch.beta_n)
    elif kind in _CORE_EXPERIMENTS:
        g = sample_mnr(ws, rng)
        _, g_simple = percolate_coupled(g, sch.pi_n, rng)
        g_simple.validate()
        report = core_report(g_simple, ws, sch, config.a)
        rec.update(core_size=report.core_size, core_giant_size=report.core_giant_size)
        if kind == "core_giant":
            rec.update(core_giant_fraction=report.core_giant_size / report.core_size)
        elif kind == "core_weight":
            rec.update(
                core_giant_weight=report.core_giant_weight,
                weight_over_beta=report.core_giant_weight / sch.beta_n,
            )
        else:
            gap = abs(report.one_neighborhood_size - report.core_giant_weight)
            rec.update(
                one_neighborhood_size=report.one_neighborhood_size,
                core_giant_weight=report.core_giant_weight,
                relative_gap=gap / report.core_giant_weight,
            )
    elif kind == "theory_tables":
        rec.update(lambda_n=sch.lambda_n, pi_n=sch.pi_n, beta_n=sch.beta_n, N_n=sch.N_n)
    else:  # pragma: no cover - EXPERIMENTS is closed
        raise ConfigError(f"unhandled experiment {kind!r}")
    return rec


# --------------------------------------------------------------------------
# theory targets embedded in every report
# --------------------------------------------------------------------------

_THEORY_A_GRID = (1.0, 4.0, 10.0, 100.0, 1000.0, 10000.0)
_THEORY_EPS_GRID = (0.1, 0.01, 0.001)


def _theory_block(config: ExperimentConfig, contexts: dict[int, _Context]) -> dict:
    params = model_params(config.tau, config.C, max(config.n_grid))
    constants = contexts[max(config.n_grid)].constants
    block = {
        "alpha": params.alpha,
        "mu": params.mu,
        "kappa": constants.kappa,
        "zeta": constants.zeta,
        "rho_star_inf": constants.rho_star_inf,
        "schedules": {
            str(n): {
                "lambda_n": ctx.schedule.lambda_n,
                "pi_n": ctx.schedule.pi_n,
                "beta_n": ctx.schedule.beta_n,
                "N_n": ctx.schedule.N_n,
            }
            for n, ctx in contexts.items()
        },
    }
    kind = config.experiment
    if kind == "exploration_limit":
        ctx = contexts[max(config.n_grid)]
        ts = [round(i * ctx.horizon / 32, 12) for i in range(1, 33)]
        block["T"] = ctx.horizon
        block["max_z"] = limit_curve_max(params, constants, ctx.horizon)
        block["z_curve"] = [[t, limit_curve_z(t, params, constants)] for t in ts]
    elif kind == "repeat_fraction":
        block["t"] = contexts[max(config.n_grid)].horizon
        block["slope_target"] = (params.tau - 2.0) / (3.0 - params.tau)
    elif kind == "residual_components":
        block["horizon"] = {str(n): ctx.horizon for n, ctx in contexts.items()}
    elif kind in _CORE_EXPERIMENTS:
        limit = core_limit(config.a, params)
        block["a"] = config.a
        block["rho_star_a"] = limit.rho_star_a
        block["rho_a"] = limit.rho_a
        block["zeta_a"] = limit.zeta_a
    elif kind == "theory_tables":
        rows = []
        for a in _THEORY_A_GRID:
            limit = core_limit(a, params)
            rows.append({
                "a": a,
                "rho_star_a": limit.rho_star_a,
                "scaled_rho_star": a ** (1.0 - params.alpha) * limit.rho_star_a,
                "rho_a": limit.rho_a,
                "zeta_a": limit.zeta_a,
            })
        block["a_table"] = rows
        block["operator_norms"] = [
            {"eps": eps, "a": config.a,
             "norm": truncated_operator_norm(eps, config.a, params)}
            for eps in _THEORY_EPS_GRID
        ]
    return block


# --------------------------------------------------------------------------
# running, aggregating, writing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentResult:
    """Records plus aggregates plus the theory targets they chase."""

    config: ExperimentConfig
    records: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    theory: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": RESULT_VERSION,
            "config": self.config.to_dict(),
            "records": self.records,
            "aggregates": self.aggregates,
            "theory": self.theory,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


_NON_STAT_KEYS = ("n", "replica", "seed")


def _aggregate(records: list) -> dict:
    by_n: dict[int, list] = {}
    for rec in records:
        by_n.setdefault(rec["n"], []).append(rec)
    out = {}
    for n in sorted(by_n):
        recs = by_n[n]
        stats = {}
        for key, value in recs[0].items():
            if key in _NON_STAT_KEYS or not isinstance(value, (int, float)):
                continue
            xs = np.array([r[key] for r in recs], dtype=float)
            stats[key] = {
                "mean": float(xs.mean()),
                "median": float(np.median(xs)),
                "std": float(xs.std(ddof=1)) if xs.size > 1 else 0.0,
                "q05": float(np.quantile(xs, 0.05)),
                "q95": float(np.quantile(xs, 0.95)),
            }
        out[str(n)] = stats
    return out


def run(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the configured ensemble and return (and optionally persist) the result.

    Replica order never affects output: records are keyed and sorted by
    (n, replica), and each replica's generator is derived, not drawn from a
    shared stream, so `threads > 1` produces byte-identical reports.
    """
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    contexts = {n: _build_context(config, n) for n in config.n_grid}
    jobs = [
        (n, r, derive_seed(config.master_seed, n, r))
        for n in config.n_grid
        for r in range(config.replicas)
    ]

    def work(job):
        n, r, seed = job
        return _replica_record(config, contexts[n], r, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, jobs))
    else:
        records = [work(job) for job in jobs]
    records.sort(key=lambda rec: (rec["n"], rec["replica"]))

    result = ExperimentResult(
        config=config,
        records=records,
        aggregates=_aggregate(records),
        theory=_theory_block(config, contexts),
    )
    if config.output_path is not None:
        write_result(result, config.output_path, config.output_format)
    return result


def single_vs_multi_suite(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """The coupled percolation suite; thin alias that insists on the right experiment."""
    if config.experiment != "single_vs_multi":
        raise ConfigError(
            f"single_vs_multi_suite needs a single_vs_multi config, got {config.experiment!r}"
        )
    return run(config, threads=threads)


def summarize(result: ExperimentResult) -> list:
    """Convergence table: one row per n with aggregate statistics and targets."""
    if not result.records:
        raise DomainError("cannot summarize an empty result")
    rows = []
    for n_str, stats in result.aggregates.items():
        row = {"n": int(n_str)}
        for key, agg in stats.items():
            for stat_name, value in agg.items():
                row[f"{key}_{stat_name}"] = value
        for key, value in result.theory.items():
            if isinstance(value, (int, float)):
                row[key] = value
        rows.append(row)
    rows.sort(key=lambda row: row["n"])
    return rows


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_result(result: ExperimentResult, path, output_format: str = "json") -> None:
    """Persist a result atomically (temp file + rename) as JSON or records-CSV."""
    if output_format == "json":
        _atomic_write_text(path, result.to_json())
    elif output_format == "csv":
        if not result.records:
            raise DomainError("cannot write an empty record table as CSV")
        import io

        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(result.records[0].keys()))
        writer.writeheader()
        for rec in result.records:
            writer.writerow(rec)
        _atomic_write_text(path, buf.getvalue())
    else:
        raise ConfigError(f"output_format must be 'csv' or 'json', got {output_format!r}")
