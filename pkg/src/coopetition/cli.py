"""Command-line front end: ``coopetition {run,sweep-k1,table1,validate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import InapplicableRegimeError, NumericalQualityError, ParameterError, UnsupportedConfigurationError
from .experiment import (
    ExperimentConfig,
    cmd_run,
    cmd_sweep_k1,
    cmd_table1,
    cmd_validate,
    format_table1,
    benchmark_preset,
)


def _int_list(text: str) -> list[int]:
    """``"1,15,50"`` or an inclusive range ``"0-4"``."""
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--preset", choices=["benchmark", "paper"], help="start from the benchmark setup ('paper' is an alias)")
    p.add_argument("--nodes", type=int, help="size of the cascading benchmark graph")
    p.add_argument("--graph", help="graph JSON file or cascading:<N>")
    p.add_argument("--profile", help="repeated-ne | coopetition:<K1> | zero")
    p.add_argument("--out", help="output directory")
    p.add_argument("--rho-mode", choices=["final", "integral"])
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--budget1", type=float)
    p.add_argument("--budget2", type=float)
    p.add_argument("--budget-margin", type=float, help="default budgets are threshold times this")
    p.add_argument("--stages", type=int, dest="n_stages", help="number of campaigns K")
    p.add_argument("--period", type=float, help="campaign spacing and window")
    p.add_argument("--k1-range", type=_int_list, help="e.g. 0-4 or 1,3")
    p.add_argument("--samples-per-stage", type=int)
    p.add_argument("--plot-nodes", type=_int_list)
    p.add_argument("--table1-nodes", type=_int_list)
    p.add_argument("--max-stages", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


_FLAG_FIELDS = ("graph", "profile", "out", "rho_mode", "lambda1", "lambda2", "budget1", "budget2",
                "budget_margin", "n_stages", "period", "k1_range", "samples_per_stage", "plot_nodes",
                "table1_nodes", "max_stages", "jobs")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = benchmark_preset() if args.preset else ExperimentConfig()
    if args.config:
        data = cfg.to_dict()
        data.update(json.loads(open(args.config).read()))
        cfg = ExperimentConfig.from_dict(data)
    if args.nodes is not None:
        cfg = cfg.replace(graph=f"cascading:{args.nodes}")
    changes = {name: getattr(args, name) for name in _FLAG_FIELDS if getattr(args, name) is not None}
    return cfg.replace(**changes)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopetition", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("run", "simulate one strategy profile"),
                       ("sweep-k1", "coopetition utilities against the equilibrium baseline per K1"),
                       ("table1", "post-convergence stage payoffs for several network sizes"),
                       ("validate", "check a configuration without running it")):
        _add_common(sub.add_parser(name, help=text))
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "run":
            result = cmd_run(cfg)
            print(json.dumps({k: result[k] for k in ("profile", "U1", "U2", "convergence_stage",
                                                       "ne_convergence_stage", "budget_thresholds")}))
        elif args.command == "sweep-k1":
            for row in cmd_sweep_k1(cfg):
                print(f"{row['profile']:>16}  U1={row['U1']:.4f}  U2={row['U2']:.4f}  sustainable={row['sustainable']}")
        elif args.command == "table1":
            print(format_table1(cmd_table1(cfg)))
        else:
            print(json.dumps(cmd_validate(cfg), indent=1))
    except (ParameterError, UnsupportedConfigurationError, InapplicableRegimeError,
            NumericalQualityError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
