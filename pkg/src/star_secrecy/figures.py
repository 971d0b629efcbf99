"""Reproduction of the headline experiment figures.

Each figure id maps to a set of sweeps with documented default grids; the
report path writes the raw per-trial CSV, the aggregated CSV, a JSON
provenance sidecar and a rendered PNG next to each other.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .optimizer import OptimizerSettings
from .runner import (AggRow, SweepSpec, aggregate_rows, run_sweep,
                     write_aggregate, write_metadata, write_rows)
from .scenario import Protocol, Scenario

log = logging.getLogger(__name__)

FIGURE_IDS = (2, 3, 4, 5)

M_GRID = [10, 20, 30, 40]
P_GRID = [5, 10, 15, 20, 25, 30, 35, 40]
E_GRID = [round(0.1 * i, 1) for i in range(16)]        # 0.0 .. 1.5


@dataclass
class FigureSweep:
    tag: str                      # file-name fragment and legend prefix
    overrides: dict               # applied to the base scenario
    spec: SweepSpec


def figure_sweeps(fig_id: int, trials: int, seed: int) -> list[FigureSweep]:
    """Default grids behind each figure."""
    star = [Protocol.ES, Protocol.MS, Protocol.TS, Protocol.RIS]
    if fig_id == 2:
        return [FigureSweep(f"e{e}", {"e_r": e, "e_t": e},
                            SweepSpec("m", list(M_GRID), list(star), trials, seed))
                for e in (0.1, 1.4)]
    if fig_id == 3:
        return [FigureSweep(f"m{m}", {"m": m},
                            SweepSpec("e", list(E_GRID),
                                      [Protocol.ES, Protocol.MS, Protocol.TS],
                                      trials, seed))
                for m in (20, 40)]
    if fig_id == 4:
        return [FigureSweep("m20", {"m": 20, "e_r": 0.1, "e_t": 0.1},
                            SweepSpec("p_s", list(P_GRID),
                                      [Protocol.ES, Protocol.RIS, Protocol.NONE],
                                      trials, seed))]
    if fig_id == 5:
        out = []
        for e in (0.05, 0.12):
            for p_s in (20, 40):
                out.append(FigureSweep(
                    f"e{e}_ps{p_s}", {"e_r": e, "e_t": e, "p_s": p_s},
                    SweepSpec("m", list(M_GRID), [Protocol.ES], trials, seed)))
        return out
    raise ValueError(f"unknown figure id {fig_id}; expected one of {FIGURE_IDS}")


_X_LABEL = {"m": "number of surface elements M",
            "e": "minimum energy requirement E",
            "p_s": "transmit power P_s"}


def _render_rates(aggs_by_tag: dict[str, list[AggRow]], path: Path,
                  bits: bool = False) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    scale = 1.4426950408889634 if bits else 1.0
    for tag, aggs in aggs_by_tag.items():
        series: dict[str, list[AggRow]] = {}
        for a in aggs:
            series.setdefault(a.protocol, []).append(a)
        for proto, pts in series.items():
            pts = sorted(pts, key=lambda a: a.sweep_value)
            label = f"{proto.upper()} ({tag})" if len(aggs_by_tag) > 1 else proto.upper()
            ax.errorbar([p.sweep_value for p in pts],
                        [p.rate_sum_mean * scale for p in pts],
                        yerr=[p.rate_sum_se * scale for p in pts],
                        marker="o", capsize=2, label=label)
    ax.set_xlabel(_X_LABEL[next(iter(aggs_by_tag.values()))[0].sweep_var])
    ax.set_ylabel("secrecy rate (%s/channel use)" % ("bits" if bits else "nats"))
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _render_energy(aggs_by_tag: dict[str, list[AggRow]], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    for tag, aggs in aggs_by_tag.items():
        pts = sorted(aggs, key=lambda a: a.sweep_value)
        xs = [p.sweep_value for p in pts]
        ax.plot(xs, [p.energy_r_mean for p in pts], marker="o",
                label=f"Eve_r ({tag})")
        ax.plot(xs, [p.energy_t_mean for p in pts], marker="s", ls="--",
                label=f"Eve_t ({tag})")
    ax.set_xlabel(_X_LABEL["m"])
    ax.set_ylabel("harvested energy (linear)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def run_figure(fig_id: int, base: Scenario, out_dir: str | Path,
               trials: int | None = None, seed: int | None = None,
               settings: OptimizerSettings | None = None, jobs: int = 1,
               bits: bool = False) -> Path:
    """Produce all artifacts of one figure; returns its directory."""
    trials = trials if trials is not None else base.trials
    seed = seed if seed is not None else base.seed
    fig_dir = Path(out_dir) / f"fig{fig_id}"
    fig_dir.mkdir(parents=True, exist_ok=True)
    aggs_by_tag: dict[str, list[AggRow]] = {}
    for sweep in figure_sweeps(fig_id, trials, seed):
        scenario = base.with_overrides(**sweep.overrides)
        log.info("figure %d sweep %s: %d values x %d protocols x %d trials",
                 fig_id, sweep.tag, len(sweep.spec.values),
                 len(sweep.spec.protocols), trials)
        rows = run_sweep(scenario, sweep.spec, settings, jobs)
        with open(fig_dir / f"raw_{sweep.tag}.csv", "w") as fh:
            write_rows(rows, fh)
        aggs = aggregate_rows(rows)
        with open(fig_dir / f"agg_{sweep.tag}.csv", "w") as fh:
            write_aggregate(aggs, fh)
        write_metadata(fig_dir / f"raw_{sweep.tag}.meta.json", scenario,
                       {"figure": fig_id, "tag": sweep.tag,
                        "sweep": {"variable": sweep.spec.variable,
                                  "values": sweep.spec.values,
                                  "protocols": [p.value for p in
                                                sweep.spec.protocols],
                                  "trials": trials, "seed": seed}})
        aggs_by_tag[sweep.tag] = aggs
    png = fig_dir / f"figure{fig_id}.png"
    if fig_id == 5:
        _render_energy(aggs_by_tag, png)
    else:
        _render_rates(aggs_by_tag, png, bits=bits)
    return fig_dir
