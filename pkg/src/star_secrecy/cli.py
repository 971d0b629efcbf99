"""Command-line front end.

Subcommands: ``run`` (single optimization), ``sweep`` (Monte-Carlo grid),
``figure`` (reproduce the headline figures: CSV data plus rendered PNG),
``aggregate`` (means/standard errors of a raw CSV).  Results are CSV with
a JSON provenance sidecar; rates are stored in nats (``--bits`` converts
the printed summary only).  The env var STAR_SECRECY_LOG sets the log
level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .figures import FIGURE_IDS, run_figure
from .model import nats_to_bits
from .runner import (SweepSpec, aggregate_rows, read_rows, run_single,
                     run_sweep, write_aggregate, write_metadata, write_rows)
from .scenario import Protocol, Scenario, ScenarioError, load_scenario

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    """argparse's usage failures exit 2, which this CLI reserves for
    infeasible runs; remap them to the generic error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="scenario config file "
                   "(JSON or YAML); missing keys take defaults")
    p.add_argument("--protocol", choices=[x.value for x in Protocol],
                   help="surface protocol / baseline")
    p.add_argument("--m", type=int, help="number of surface elements")
    p.add_argument("--e", type=float, help="minimum harvested energy at "
                   "both eavesdroppers")
    p.add_argument("--p-s", type=float, dest="p_s", help="transmit power")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials")
    p.add_argument("--seed", type=int, help="base PRNG seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", metavar="DIR", default="results",
                   help="output directory (default: results)")
    p.add_argument("--bits", action="store_true",
                   help="print rates in bits (files stay in nats)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="star-secrecy",
                     description="STAR-RIS wiretap-channel secrecy optimizer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[], help="single optimization")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV")
    _add_common(p_sweep)
    p_sweep.add_argument("--var", required=True, choices=["m", "e", "p_s"],
                         help="sweep variable")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated increasing grid values")
    p_sweep.add_argument("--protocols",
                         help="comma-separated protocol subset "
                         "(default: the scenario's protocol)")

    p_fig = sub.add_parser("figure", help="reproduce a headline figure")
    _add_common(p_fig)
    p_fig.add_argument("id", type=int, choices=list(FIGURE_IDS),
                       help="figure number")

    p_agg = sub.add_parser("aggregate", help="aggregate a raw sweep CSV")
    p_agg.add_argument("raw", metavar="RAW_CSV")
    p_agg.add_argument("--out", metavar="DIR", default="results")
    return parser


def _scenario_from_args(args) -> Scenario:
    overrides = {}
    if args.protocol is not None:
        overrides["protocol"] = args.protocol
    if args.m is not None:
        overrides["m"] = args.m
    if args.e is not None:
        overrides["e_r"] = args.e
        overrides["e_t"] = args.e
    if getattr(args, "p_s", None) is not None:
        overrides["p_s"] = args.p_s
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.config:
        return load_scenario(args.config, overrides)
    return Scenario().with_overrides(**overrides)


def _rate_str(rate_nats: float, bits: bool) -> str:
    if bits:
        return f"{nats_to_bits(rate_nats):.6f} bits/use"
    return f"{rate_nats:.6f} nats/use"


def cmd_run(args) -> int:
    scenario = _scenario_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    row, res = run_single(scenario, trial=0)
    with open(out / "run.csv", "w") as fh:
        write_rows([row], fh)
    write_metadata(out / "run.meta.json", scenario, {"command": "run"})
    if res is None:
        print("optimization failed; see log")
        return EXIT_ERROR
    met = res.metrics
    print(f"protocol          {scenario.protocol.value}")
    print(f"elements          {scenario.m}")
    print(f"secrecy rate      {_rate_str(met.rate_sum, args.bits)}"
          f"  (r: {_rate_str(met.rate_r, args.bits)},"
          f" t: {_rate_str(met.rate_t, args.bits)})")
    print(f"harvested energy  Eve_r {met.energy_eve_r:.6f}"
          f"  Eve_t {met.energy_eve_t:.6f}"
          f"  (required {scenario.e_r:g}/{scenario.e_t:g})")
    print(f"relaxed bound     {res.sdr_bound:.6f} (ratio sum)")
    print(f"iterations        ic={res.iterations_ic} id={res.iterations_id}")
    print(f"feasible          {res.feasible}")
    print(f"wrote             {out / 'run.csv'}")
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    scenario = _scenario_from_args(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    protocols = ([p.strip() for p in args.protocols.split(",")]
                 if args.protocols else [scenario.protocol])
    spec = SweepSpec(variable=args.var, values=values, protocols=protocols,
                     trials=args.trials or scenario.trials,
                     seed=args.seed if args.seed is not None else scenario.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(scenario, spec, jobs=args.jobs)
    raw = out / f"sweep_{spec.variable}.csv"
    with open(raw, "w") as fh:
        write_rows(rows, fh)
    write_metadata(out / f"sweep_{spec.variable}.meta.json", scenario, {
        "command": "sweep",
        "sweep": {"variable": spec.variable, "values": spec.values,
                  "protocols": [p.value for p in spec.protocols],
                  "trials": spec.trials, "seed": spec.seed}})
    print(f"wrote {raw} ({len(rows)} rows)")
    return EXIT_OK


def cmd_figure(args) -> int:
    scenario = _scenario_from_args(args)
    fig_dir = run_figure(args.id, scenario, args.out, trials=args.trials,
                         seed=args.seed, jobs=args.jobs, bits=args.bits)
    print(f"wrote {fig_dir}")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    with open(args.raw) as fh:
        rows = read_rows(fh)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / (Path(args.raw).stem + "_agg.csv")
    with open(target, "w") as fh:
        write_aggregate(aggregate_rows(rows), fh)
    print(f"wrote {target}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("STAR_SECRECY_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "sweep": cmd_sweep,
                "figure": cmd_figure, "aggregate": cmd_aggregate}
    try:
        return handlers[args.command](args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
