"""Monte-Carlo experiment runner shared by the CLI and the test suite.

A sweep runs ``trials`` independent channel realizations per grid value
and protocol.  Trial ``i`` of a sweep uses a generator derived only from
(seed, i), so identical sweeps reproduce identical rows regardless of
execution order or worker count (wall-clock times excepted).
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import __version__
from .optimizer import OptimizerSettings, OptResult, optimize
from .scenario import PRNG_NAME, Protocol, Scenario, generate_channels, trial_rng

log = logging.getLogger(__name__)

CSV_HEADER = ("protocol,sweep_var,sweep_value,trial,rate_sum,rate_r,rate_t,"
              "energy_r,energy_t,feasible,ic,id,wall_s")

AGG_HEADER = ("protocol,sweep_var,sweep_value,n,rate_sum_mean,rate_sum_se,"
              "rate_r_mean,rate_t_mean,energy_r_mean,energy_t_mean,"
              "feasible_frac")

SWEEP_VARS = ("m", "e", "p_s")


@dataclass
class ResultRow:
    protocol: str
    sweep_var: str
    sweep_value: float
    trial: int
    rate_sum: float
    rate_r: float
    rate_t: float
    energy_r: float
    energy_t: float
    feasible: bool
    ic: int
    id: int
    wall_s: float


@dataclass
class SweepSpec:
    variable: str
    values: list[float]
    protocols: list[Protocol]
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARS:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARS}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.protocols = [Protocol.parse(p) for p in self.protocols]


def apply_sweep_value(scenario: Scenario, variable: str, value: float) -> Scenario:
    if variable == "m":
        return scenario.with_overrides(m=int(value))
    if variable == "e":
        return scenario.with_overrides(e_r=float(value), e_t=float(value))
    return scenario.with_overrides(p_s=float(value))


def run_single(scenario: Scenario, trial: int,
               settings: OptimizerSettings | None = None,
               sweep_var: str = "e", sweep_value: float | None = None
               ) -> tuple[ResultRow, OptResult | None]:
    """One (scenario, trial) optimization mapped to a result row.

    Failures never raise: they are logged and surfaced as an infeasible
    zero row so long sweeps survive isolated numerical accidents.
    """
    if sweep_value is None:
        sweep_value = {"m": scenario.m, "e": scenario.e_r,
                       "p_s": scenario.p_s}[sweep_var]
    rng = trial_rng(scenario.seed, trial)
    start = time.perf_counter()
    try:
        channels = generate_channels(scenario, rng)
        res = optimize(channels, scenario, settings, rng)
    except Exception:
        log.exception("trial %d at %s=%s failed", trial, sweep_var, sweep_value)
        row = ResultRow(scenario.protocol.value, sweep_var, float(sweep_value),
                        trial, 0.0, 0.0, 0.0, 0.0, 0.0, False, 0, 0,
                        time.perf_counter() - start)
        return row, None
    met = res.metrics
    row = ResultRow(scenario.protocol.value, sweep_var, float(sweep_value),
                    trial, met.rate_sum, met.rate_r, met.rate_t,
                    met.energy_eve_r, met.energy_eve_t, res.feasible,
                    res.iterations_ic, res.iterations_id,
                    time.perf_counter() - start)
    return row, res


def _worker(args) -> ResultRow:
    scenario, trial, settings, sweep_var, sweep_value = args
    return run_single(scenario, trial, settings, sweep_var, sweep_value)[0]


def run_trials(scenario: Scenario, trials: int,
               settings: OptimizerSettings | None = None, jobs: int = 1,
               sweep_var: str = "e", sweep_value: float | None = None
               ) -> list[ResultRow]:
    """All trials of one grid point, in trial order."""
    tasks = [(scenario, t, settings, sweep_var, sweep_value)
             for t in range(trials)]
    if jobs <= 1 or trials == 1:
        return [_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_worker, tasks))


def run_sweep(base: Scenario, spec: SweepSpec,
              settings: OptimizerSettings | None = None,
              jobs: int = 1) -> list[ResultRow]:
    """Full sweep; rows ordered by (protocol, value, trial)."""
    rows: list[ResultRow] = []
    for proto in spec.protocols:
        for value in spec.values:
            scenario = apply_sweep_value(base, spec.variable, value)
            scenario = scenario.with_overrides(protocol=proto, seed=spec.seed,
                                               trials=spec.trials)
            rows.extend(run_trials(scenario, spec.trials, settings, jobs,
                                   spec.variable, value))
            log.info("sweep %s=%s protocol=%s done", spec.variable, value,
                     proto.value)
    return rows


# -- serialization ------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.9g" % x


def format_row(row: ResultRow) -> str:
    return ",".join([
        row.protocol, row.sweep_var, _fmt(row.sweep_value), str(row.trial),
        _fmt(row.rate_sum), _fmt(row.rate_r), _fmt(row.rate_t),
        _fmt(row.energy_r), _fmt(row.energy_t),
        "true" if row.feasible else "false",
        str(row.ic), str(row.id), _fmt(row.wall_s)])


def write_rows(rows: list[ResultRow], stream) -> None:
    stream.write(CSV_HEADER + "\n")
    for row in rows:
        stream.write(format_row(row) + "\n")


def read_rows(stream) -> list[ResultRow]:
    reader = csv.DictReader(stream)
    if reader.fieldnames != CSV_HEADER.split(","):
        raise ValueError("unexpected CSV header: " + ",".join(reader.fieldnames or []))
    rows = []
    for rec in reader:
        rows.append(ResultRow(
            protocol=rec["protocol"], sweep_var=rec["sweep_var"],
            sweep_value=float(rec["sweep_value"]), trial=int(rec["trial"]),
            rate_sum=float(rec["rate_sum"]), rate_r=float(rec["rate_r"]),
            rate_t=float(rec["rate_t"]), energy_r=float(rec["energy_r"]),
            energy_t=float(rec["energy_t"]),
            feasible=rec["feasible"] == "true",
            ic=int(rec["ic"]), id=int(rec["id"]), wall_s=float(rec["wall_s"])))
    return rows


@dataclass
class AggRow:
    protocol: str
    sweep_var: str
    sweep_value: float
    n: int
    rate_sum_mean: float
    rate_sum_se: float
    rate_r_mean: float
    rate_t_mean: float
    energy_r_mean: float
    energy_t_mean: float
    feasible_frac: float


def aggregate_rows(rows: list[ResultRow]) -> list[AggRow]:
    """Per (protocol, value) means and standard errors, in first-seen order."""
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.protocol, row.sweep_var, row.sweep_value),
                          []).append(row)
    out = []
    for (proto, var, value), grp in groups.items():
        n = len(grp)
        rates = [r.rate_sum for r in grp]
        mean = sum(rates) / n
        var_ = sum((x - mean) ** 2 for x in rates) / (n - 1) if n > 1 else 0.0
        out.append(AggRow(
            protocol=proto, sweep_var=var, sweep_value=value, n=n,
            rate_sum_mean=mean, rate_sum_se=(var_ / n) ** 0.5,
            rate_r_mean=sum(r.rate_r for r in grp) / n,
            rate_t_mean=sum(r.rate_t for r in grp) / n,
            energy_r_mean=sum(r.energy_r for r in grp) / n,
            energy_t_mean=sum(r.energy_t for r in grp) / n,
            feasible_frac=sum(r.feasible for r in grp) / n))
    return out


def write_aggregate(aggs: list[AggRow], stream) -> None:
    stream.write(AGG_HEADER + "\n")
    for a in aggs:
        stream.write(",".join([
            a.protocol, a.sweep_var, _fmt(a.sweep_value), str(a.n),
            _fmt(a.rate_sum_mean), _fmt(a.rate_sum_se), _fmt(a.rate_r_mean),
            _fmt(a.rate_t_mean), _fmt(a.energy_r_mean), _fmt(a.energy_t_mean),
            _fmt(a.feasible_frac)]) + "\n")


def metadata(scenario: Scenario, extra: dict | None = None) -> dict:
    """Provenance sidecar content for one output artifact."""
    info = {
        "package": "star-secrecy",
        "version": __version__,
        "prng": PRNG_NAME,
        "trial_seeding": "SeedSequence(seed, spawn_key=(trial,))",
        "scenario": scenario.to_dict(),
    }
    if extra:
        info.update(extra)
    return info


def write_metadata(path, scenario: Scenario, extra: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(metadata(scenario, extra), fh, indent=2, sort_keys=True)
        fh.write("\n")
