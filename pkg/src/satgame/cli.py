"""``satgame`` command line.

Exit status: 0 success, 1 a verification returned false, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import __version__
from .equilibrium import (TOL_EXACT, enumerate_pure_equilibria, is_correlated_equilibrium,
                          is_hannan_equilibrium, is_mixed_gse)
from .errors import SatGameError
from .harness import (RAT_THRESHOLDS, ExperimentConfig, MetricsTable, aggregate_csv, run_experiment,
                      run_study)
from .io import PRESETS, load_config, read_game, read_pmf
from .learners import algorithm_label, parse_algorithm

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2
FAST_ITERATIONS = 5000
_CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file or preset name (%s)" % ", ".join(PRESETS))
    p.add_argument("--game", help="'resource', 'rat' or a path to a .game file")
    p.add_argument("--algo", help="comma-separated algorithms, e.g. rm,rmrl,psel_uniform,psra_2")
    p.add_argument("--iters", type=int, help="iterations T per realization")
    p.add_argument("--realizations", type=int, help="independent realizations R")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--window", type=int, help="convergence window W")
    p.add_argument("--mu", type=float, help="RM inertia constant")
    p.add_argument("--tremble", type=float, help="RMRL tremble probability")
    p.add_argument("--tremble-cutoff", type=int, help="round at which RMRL trembles stop")
    p.add_argument("--sra-movers", type=int, help="movers per round for a bare 'sra' algorithm")
    p.add_argument("--threshold", type=float, help="RAT satisfaction threshold (Mbps)")
    p.add_argument("--agents", type=int, help="resource-game agents")
    p.add_argument("--instance-seed", type=int, help="resource-instance seed")
    p.add_argument("--trajectory", action="store_true", help="also write per-round trajectory CSVs")
    p.add_argument("--out", help="output directory for CSV files")
    p.add_argument("--fast", action="store_true", help=f"use T = {FAST_ITERATIONS}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satgame", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"satgame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment")
    _experiment_flags(p)

    p = sub.add_parser("sweep", help="vary one config field across runs")
    _experiment_flags(p)
    p.add_argument("--param", required=True, help="config field to vary, e.g. threshold")
    p.add_argument("--values", required=True, help="comma-separated values")

    p = sub.add_parser("enumerate", help="list pure SE, GSE and NE of a small game")
    p.add_argument("--game", required=True, help=".game file")

    p = sub.add_parser("verify", help="check a joint pmf against equilibrium notions")
    p.add_argument("--game", required=True, help=".game file")
    p.add_argument("--pmf", required=True, help=".pmf file")
    p.add_argument("--check", default="all", choices=("ce", "he", "gse", "all"))
    p.add_argument("--tol", type=float, default=TOL_EXACT)

    p = sub.add_parser("reproduce", help="run a published experiment preset")
    p.add_argument("target", choices=("table1", "table2", "rat"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fast", action="store_true", help=f"use T = {FAST_ITERATIONS}")
    p.add_argument("--realizations", type=int)
    p.add_argument("--instances", type=int, help="resource instances to average over")
    p.add_argument("--algo", help="restrict to these algorithms")
    p.add_argument("--out", help="output directory for CSV files")
    return parser


def _coerce(name: str, text: str):
    sample = getattr(ExperimentConfig(), name)
    if isinstance(sample, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(sample, int):
        return int(text)
    if isinstance(sample, float) or name in ("mu",):
        return float(text)
    return text


def resolve_config(args) -> tuple[ExperimentConfig, dict]:
    """Merge preset/config file, then explicit flags."""
    kw = load_config(args.config) if args.config else {}
    extra = {k: kw.pop(k) for k in ("instances", "fast_iterations") if k in kw}
    if args.game:
        if args.game in ("resource", "rat"):
            kw["game"] = args.game
        else:
            kw["game"], kw["game_file"] = "file", args.game
    if args.algo:
        labels = [x.strip() for x in args.algo.split(",") if x.strip()]
        if args.sra_movers:
            labels = [algorithm_label("sra", args.sra_movers) if x == "sra" else x for x in labels]
        kw["algorithms"] = tuple(labels)
    elif args.sra_movers:
        raise SatGameError("--sra-movers needs --algo sra")
    mapping = {"iters": "iterations", "realizations": "realizations", "seed": "seed",
               "window": "window", "mu": "mu", "tremble": "tremble",
               "tremble_cutoff": "tremble_cutoff", "threshold": "threshold",
               "agents": "num_agents", "instance_seed": "instance_seed", "out": "out"}
    for flag, key in mapping.items():
        value = getattr(args, flag)
        if value is not None:
            kw[key] = value
    if args.trajectory:
        kw["trajectory"] = True
    if args.fast:
        kw["iterations"] = extra.get("fast_iterations", FAST_ITERATIONS)
    kw.setdefault("algorithms", ("rm",) if kw.get("game") != "resource" else
                  ExperimentConfig().algorithms)
    for label in kw["algorithms"]:
        parse_algorithm(label)
    return ExperimentConfig(**kw), extra


def _echo(config: ExperimentConfig) -> None:
    for k, v in sorted(config.echo().items()):
        print(f"# {k} = {v}")


def _print_table(table: MetricsTable) -> None:
    sys.stdout.write(aggregate_csv(table))


def cmd_run(args) -> int:
    config, _ = resolve_config(args)
    _echo(config)
    result = run_experiment(config)
    _print_table(result.table)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config, _ = resolve_config(args)
    if args.param not in _CONFIG_FIELDS:
        raise SatGameError(f"unknown sweep parameter {args.param!r}")
    _echo(config)
    print(f"{args.param},algorithm,prob_equil,prob_sat,avg_utility,alloc_eff")
    for raw in args.values.split(","):
        value = _coerce(args.param, raw.strip())
        out = str(Path(config.out) / f"{args.param}_{raw.strip()}") if config.out else None
        result = run_experiment(replace(config, **{args.param: value, "out": out}))
        for r in result.table.rows:
            print(f"{raw.strip()},{r.algorithm},{r.prob_equil:.3f},{r.prob_sat:.3f},"
                  f"{r.avg_utility:.3f},{r.alloc_eff:.3f}")
    return EXIT_OK


def _fmt_profiles(profiles) -> str:
    return "{" + ", ".join("(" + ",".join(map(str, a)) + ")" for a in profiles) + "}"


def cmd_enumerate(args) -> int:
    game = read_game(args.game)
    eq = enumerate_pure_equilibria(game)
    print(f"SE  {_fmt_profiles(eq.se)}")
    print("GSE " + _fmt_profiles(a for a, _ in eq.gse))
    for a, v in eq.gse:
        print(f"    {tuple(a)}: satisfied {sorted(v.satisfied_players)}, "
              f"unsatisfied {sorted(v.unsatisfied_players)}")
    print(f"NE  {_fmt_profiles(eq.ne)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    game = read_game(args.game)
    pmf = read_pmf(args.pmf, game.action_counts)
    ok = True
    if args.check in ("ce", "all"):
        ce, report = is_correlated_equilibrium(game, pmf, args.tol)
        print(f"CE: {str(ce).lower()} (max positive regret {report.max_positive_regret:.6g})")
        ok &= ce
    if args.check in ("he", "all"):
        he = is_hannan_equilibrium(game, pmf, args.tol)
        print(f"HE: {str(he).lower()}")
        ok &= he
    if args.check in ("gse", "all"):
        v = is_mixed_gse(game, pmf, args.tol)
        print(f"mixed GSE: {str(v.is_gse).lower()}"
              + (f" (satisfied {sorted(v.satisfied_players)}, unsatisfied "
                 f"{sorted(v.unsatisfied_players)})" if v.is_gse else ""))
        ok &= v.is_gse
    return EXIT_OK if ok else EXIT_FALSE


def cmd_reproduce(args) -> int:
    if args.target == "rat":
        print("threshold,algorithm,prob_equil,prob_sat,avg_utility,alloc_eff")
        for thr in RAT_THRESHOLDS:
            kw = load_config(f"rat_{thr}")
            kw.pop("instances", None)
            fast = kw.pop("fast_iterations")
            kw.update(seed=args.seed)
            if args.fast:
                kw["iterations"] = fast
            if args.realizations:
                kw["realizations"] = args.realizations
            if args.algo:
                kw["algorithms"] = tuple(x.strip() for x in args.algo.split(","))
            if args.out:
                kw["out"] = str(Path(args.out) / f"rat_{thr}")
            result = run_experiment(ExperimentConfig(**kw))
            for r in result.table.rows:
                print(f"{thr},{r.algorithm},{r.prob_equil:.3f},{r.prob_sat:.3f},"
                      f"{r.avg_utility:.3f},{r.alloc_eff:.3f}")
        return EXIT_OK
    kw = load_config(args.target)
    instances = kw.pop("instances", 1)
    fast = kw.pop("fast_iterations")
    kw.update(seed=args.seed)
    if args.fast:
        kw["iterations"] = fast
    if args.realizations:
        kw["realizations"] = args.realizations
    if args.instances:
        instances = args.instances
    if args.algo:
        kw["algorithms"] = tuple(x.strip() for x in args.algo.split(","))
    if args.out:
        kw["out"] = args.out
    config = ExperimentConfig(**kw)
    _echo(config)
    print(f"# instances = {instances} (instance seeds {args.seed * 1000}..)")
    study = run_study(config, [args.seed * 1000 + k for k in range(instances)])
    _print_table(study.mean_table())
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "enumerate": cmd_enumerate, "verify": cmd_verify,
            "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SatGameError, ValueError) as exc:
        print(f"satgame: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"satgame: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
