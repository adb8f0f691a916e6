"""Monte Carlo experiments: run many realizations of each algorithm, classify
the outcome of every run and aggregate the table metrics.

Realizations are processed in fixed-size blocks.  A block is the unit of work
handed to the process pool, and each realization draws from its own stream,
so outputs do not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .engine import realization_stream, run_batch
from .equilibrium import (STOCHASTIC_RULES, TOL_EMPIRICAL, classify_probabilities, is_mixed_gse,
                          is_pure_gse, stochastic_pure_gse)
from .errors import ConfigError, InvalidArgumentError
from .game import SatisfactionGame
from .games import (RatGame, RatInstance, ResourceGame, make_resource_instance)
from .games.rat import DEFAULT_LTE_CAPACITY, DEFAULT_WIFI_CAPACITY
from .learners import LearnerConfig, empirical_distribution, parse_algorithm

TABLE_ALGORITHMS = ("psel_uniform", "psel_reinforced", "psra_1", "psra_2", "psra_10", "rmrl", "rm")
BLOCK = 25
PLAY, EVAL = 0, 1

METRIC_DEFINITIONS = (
    "converged: last W joint actions identical",
    "equilibrium: converged profile is a pure GSE, or (rm/rmrl only, not converged) "
    "the last floor(T/2) rounds form a mixed GSE at tol 0.05",
    "stochastic games: at a profile a player is satisfied if satisfied in >= 0.95 of E "
    "sampled serving orders; otherwise it is unsatisfied-at-equilibrium if no action raises "
    "its satisfaction frequency on the same samples by more than 0.05 (rule = deviation) "
    "or if no action satisfies it in more than 0.05 of them (rule = strict)",
    "prob_sat_final: mean over players of the final-profile satisfaction probability "
    "(E-sample estimate for stochastic games)",
    "avg_utility: mean over players of the final-round satisfaction bit",
    "alloc_eff: resource = units delivered / min(total capacity, total demand); "
    "rat = capacity delivered to satisfied users / total capacity; other = satisfied fraction",
    "max_pos_regret: max positive RM regret of the realized play at round T",
    "avg_utility_time: satisfaction bit averaged over players and all T rounds",
    "convergence_time: first round of the final constant joint-action run (-1 if not converged)",
    "settle_time: first round of the final run with a constant number of satisfied players",
)


@dataclass
class ExperimentConfig:
    """One game instance played by one or more algorithms.

    ``game`` is ``"resource"``, ``"rat"`` or ``"file"`` (a ``.game`` table
    file given by ``game_file``).
    """

    game: str = "resource"
    algorithms: tuple = TABLE_ALGORITHMS
    iterations: int = 25000
    realizations: int = 250
    window: int = 100
    env_samples: int = 2000
    stochastic_rule: str = "deviation"
    seed: int = 0
    mu: Optional[float] = None
    tremble: float = 0.05
    tremble_cutoff: Optional[int] = None
    # resource allocation
    num_agents: int = 20
    num_resources: int = 10
    instance_seed: int = 0
    capacity_window: Optional[tuple] = None
    demand_window: Optional[tuple] = None
    service: str = "partial"
    instance_file: Optional[str] = None
    # RAT selection
    num_users: int = 100
    num_wifi: int = 5
    num_lte: int = 5
    wifi_capacity: float = DEFAULT_WIFI_CAPACITY
    lte_capacity: float = DEFAULT_LTE_CAPACITY
    threshold: float = 1.5
    # table game file
    game_file: Optional[str] = None
    out: Optional[str] = None
    trajectory: bool = False

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        if self.game not in ("resource", "rat", "file"):
            raise ConfigError(f"unknown game family {self.game!r}")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.window < 2:
            raise ConfigError("window must be >= 2")
        if self.iterations < self.window:
            raise ConfigError(f"iterations ({self.iterations}) must be >= window ({self.window})")
        if self.env_samples < 1:
            raise ConfigError("env_samples must be >= 1")
        if self.stochastic_rule not in STOCHASTIC_RULES:
            raise ConfigError(f"stochastic_rule must be one of {STOCHASTIC_RULES}")
        if not self.algorithms:
            raise ConfigError("no algorithms selected")
        for label in self.algorithms:
            self.learner(label)
        if self.game == "file" and not self.game_file:
            raise ConfigError("game = file needs game_file")

    def learner(self, label: str) -> LearnerConfig:
        algo, k = parse_algorithm(label)
        return LearnerConfig(algo, mu=self.mu, sra_max_movers=k, tremble=self.tremble,
                             tremble_cutoff=self.tremble_cutoff, seed=self.seed)

    def build_game(self) -> SatisfactionGame:
        if self.game == "resource":
            if self.instance_file:
                from .games import read_instance
                inst = read_instance(self.instance_file)
            else:
                inst = make_resource_instance(self.instance_seed, self.num_agents, self.num_resources,
                                              capacity_window=self.capacity_window,
                                              demand_window=self.demand_window)
            return ResourceGame(inst, self.service)
        if self.game == "rat":
            return RatGame(RatInstance.make(self.num_users, self.num_wifi, self.num_lte,
                                            self.wifi_capacity, self.lte_capacity, self.threshold))
        from .io import read_game
        return read_game(self.game_file)

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class RunRecord:
    realization: int
    algorithm: str
    converged: bool
    equilibrium: bool
    prob_sat_final: float
    avg_utility: float
    alloc_eff: float
    max_pos_regret: float
    equilibrium_kind: str        # "pure", "mixed" or "none"
    convergence_time: int        # first round of the final constant run; -1 if not converged
    settle_time: int             # first round of the final run of constant satisfied count
    num_unsatisfied: int         # final round
    avg_utility_time: float


RECORD_FIELDS = tuple(RunRecord.__dataclass_fields__)


@dataclass
class MetricsRow:
    algorithm: str
    prob_equil: float
    prob_sat: float
    avg_utility: float
    alloc_eff: float


@dataclass
class MetricsTable:
    rows: list = field(default_factory=list)

    def row(self, algorithm: str) -> MetricsRow:
        for r in self.rows:
            if r.algorithm == algorithm:
                return r
        raise KeyError(algorithm)

    @property
    def algorithms(self) -> list:
        return [r.algorithm for r in self.rows]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    game: SatisfactionGame
    records: list
    table: MetricsTable
    trajectories: dict = field(default_factory=dict)


def _eval_envs(game: SatisfactionGame, seed: int, realization: int, count: int):
    g = realization_stream(seed, realization, EVAL)
    return game.make_env(g.random((count, game.env_size)))


def _classify(game, config, label, algo, r, b, res, keep_tail):
    T = res.iterations
    profile = res.final_actions[b]
    converged = bool(res.streak[b] >= config.window)
    envs = _eval_envs(game, config.seed, r, config.env_samples) if game.env_size else None
    if game.is_deterministic:
        own = res.final_sat[b].astype(float)
    else:
        verdict_s, own = stochastic_pure_gse(game, profile, envs, rule=config.stochastic_rule)
    equilibrium, kind = False, "none"
    if converged:
        verdict = is_pure_gse(game, profile) if game.is_deterministic else verdict_s
        equilibrium, kind = verdict.is_gse, "pure" if verdict.is_gse else "none"
    elif algo in ("rm", "rmrl"):
        if game.is_deterministic and keep_tail:
            pmf = empirical_distribution(res.tail_actions[:, b])
            verdict = is_mixed_gse(game, pmf, TOL_EMPIRICAL)
        else:
            freq = res.tail_sat_sum[b] / (T - res.tail_start)
            verdict = classify_probabilities(freq, TOL_EMPIRICAL)
        equilibrium, kind = verdict.is_gse, "mixed" if verdict.is_gse else "none"
    env_b = game.env_at(res.final_env, b) if game.env_size else None
    return RunRecord(
        realization=r, algorithm=label, converged=converged, equilibrium=bool(equilibrium),
        prob_sat_final=float(np.mean(own)), avg_utility=float(res.final_sat[b].mean()),
        alloc_eff=float(game.allocation_efficiency(profile, env_b)),
        max_pos_regret=float(res.max_pos_regret[b]), equilibrium_kind=kind,
        convergence_time=int(res.streak_start[b]) if converged else -1,
        settle_time=int(res.settle_start[b]),
        num_unsatisfied=int((~res.final_sat[b]).sum()),
        avg_utility_time=float(res.sat_time_sum[b].mean() / T))


def run_block(config: ExperimentConfig, label: str, start: int, stop: int,
              game: Optional[SatisfactionGame] = None, backend: str = "auto"):
    """Run realizations ``start..stop-1`` of one algorithm."""
    game = config.build_game() if game is None else game
    algo, _ = parse_algorithm(label)
    streams = [realization_stream(config.seed, r, PLAY) for r in range(start, stop)]
    keep_tail = game.is_deterministic and algo in ("rm", "rmrl")
    res = run_batch(game, config.learner(label), config.iterations, streams, keep_tail=keep_tail,
                    record_trajectory=config.trajectory, backend=backend)
    records = [_classify(game, config, label, algo, r, b, res, keep_tail)
               for b, r in enumerate(range(start, stop))]
    traj = None
    if config.trajectory:
        traj = {k: v for k, v in res.trajectory.items()}
    return records, traj


def run_realization(config: ExperimentConfig, realization: int, label: Optional[str] = None,
                    game: Optional[SatisfactionGame] = None) -> RunRecord:
    label = label or config.algorithms[0]
    return run_block(config, label, realization, realization + 1, game)[0][0]


def aggregate(records: Sequence[RunRecord]) -> MetricsTable:
    """Per-algorithm means, in order of first appearance."""
    if not records:
        raise InvalidArgumentError("aggregate needs at least one record")
    order, groups = [], {}
    for rec in records:
        if rec.algorithm not in groups:
            order.append(rec.algorithm)
            groups[rec.algorithm] = []
        groups[rec.algorithm].append(rec)
    rows = []
    for label in order:
        g = groups[label]
        rows.append(MetricsRow(label,
                               prob_equil=float(np.mean([r.equilibrium for r in g])),
                               prob_sat=float(np.mean([r.prob_sat_final for r in g])),
                               avg_utility=float(np.mean([r.avg_utility for r in g])),
                               alloc_eff=float(np.mean([r.alloc_eff for r in g]))))
    return MetricsTable(rows)


def worker_count() -> int:
    env = os.environ.get("SATGAME_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"SATGAME_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("SATGAME_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _block_task(args):
    config, label, start, stop = args
    return run_block(config, label, start, stop)


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    game = config.build_game()
    tasks = [(config, label, s, min(s + BLOCK, config.realizations))
             for label in config.algorithms for s in range(0, config.realizations, BLOCK)]
    workers = min(workers or worker_count(), len(tasks))
    if workers <= 1:
        outputs = [run_block(c, label, s, e, game) for c, label, s, e in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_block_task, tasks))
    records, trajectories = [], {}
    for (_, label, s, _e), (recs, traj) in zip(tasks, outputs):
        records.extend(recs)
        if traj is not None:
            trajectories.setdefault(label, []).append(traj)
    result = ExperimentResult(config, game, records, aggregate(records), trajectories)
    if config.out:
        write_outputs(result, config.out)
    return result


# ---------------------------------------------------------------- CSV output

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _header(config: ExperimentConfig, game: SatisfactionGame) -> str:
    lines = [f"# config {k} = {v}" for k, v in sorted(config.echo().items()) if k != "out"]
    lines += [f"# game {k} = {v}" for k, v in game.describe().items()]
    lines += [f"# metric {d}" for d in METRIC_DEFINITIONS]
    return "\n".join(lines) + "\n"


def records_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(_header(result.config, result.game))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for rec in result.records:
        w.writerow([_fmt(getattr(rec, f)) for f in RECORD_FIELDS])
    return buf.getvalue()


def aggregate_csv(table: MetricsTable, header: str = "") -> str:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "prob_equil", "prob_sat", "avg_utility", "alloc_eff"])
    for r in table.rows:
        w.writerow([r.algorithm] + [f"{x:.3f}" for x in (r.prob_equil, r.prob_sat, r.avg_utility,
                                                         r.alloc_eff)])
    return buf.getvalue()


def trajectory_csv(result: ExperimentResult, label: str, realization: int = 0) -> str:
    """Per-round trace of one realization: actions, satisfaction bits, counts."""
    blk, off = divmod(realization, BLOCK)
    traj = result.trajectories[label][blk]
    acts, sats, reg = traj["actions"][:, off], traj["satisfied"][:, off], traj["max_pos_regret"][:, off]
    N = acts.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration"] + [f"a{i}" for i in range(N)] + [f"s{i}" for i in range(N)]
               + ["num_satisfied", "max_pos_regret"])
    for n in range(acts.shape[0]):
        w.writerow([n] + acts[n].tolist() + sats[n].astype(int).tolist()
                   + [int(sats[n].sum()), "" if np.isnan(reg[n]) else repr(float(reg[n]))])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_outputs(result: ExperimentResult, out_dir) -> dict:
    out = Path(out_dir)
    paths = {"records": out / "records.csv", "aggregate": out / "aggregate.csv"}
    _write(paths["records"], records_csv(result))
    _write(paths["aggregate"], aggregate_csv(result.table, _header(result.config, result.game)))
    for label in result.trajectories:
        p = out / f"trajectory_{label}.csv"
        _write(p, trajectory_csv(result, label))
        paths[f"trajectory_{label}"] = p
    return paths


# ------------------------------------------------------------ multi-instance

TABLE1_WINDOWS = {"capacity_window": (5.4, 6.3), "demand_window": (3.3, 3.8)}
TABLE2_WINDOWS = {"capacity_window": (3.53, 4.43), "demand_window": (3.3, 3.8)}
RAT_THRESHOLDS = (1.5, 2.0, 2.2, 2.8)


@dataclass
class StudyResult:
    """One experiment per resource instance."""

    experiments: list

    def metric(self, algorithm: str, name: str) -> np.ndarray:
        return np.array([getattr(e.table.row(algorithm), name) for e in self.experiments])

    def mean_table(self) -> MetricsTable:
        labels = self.experiments[0].table.algorithms
        return MetricsTable([MetricsRow(l, *(float(self.metric(l, m).mean()) for m in
                                             ("prob_equil", "prob_sat", "avg_utility", "alloc_eff")))
                             for l in labels])


def run_study(config: ExperimentConfig, instance_seeds: Sequence[int],
              workers: Optional[int] = None) -> StudyResult:
    exps = []
    for k, s in enumerate(instance_seeds):
        out = str(Path(config.out) / f"instance_{s}") if config.out else None
        exps.append(run_experiment(replace(config, instance_seed=int(s), out=out), workers))
    if config.out:
        header = _header(config, exps[0].game).replace("# config instance_seed",
                                                        "# config first_instance_seed")
        _write(Path(config.out) / "aggregate_mean.csv",
               aggregate_csv(StudyResult(exps).mean_table(), header))
    return StudyResult(exps)
