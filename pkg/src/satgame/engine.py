"""Batched repeated play: many independent realizations advanced in lockstep.

Each realization owns a private random stream and consumes a fixed block of
``2 * N + env_size`` uniforms per round (action draws, SRA mover keys, env
sample), so its trajectory does not depend on which other realizations share
the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateProbabilityError
from .game import SatisfactionGame
from .learners import (LearnerConfig, accumulate_rm, accumulate_rmrl, estimated_rows, max_positive,
                       psel_probs, regret_rows, rm_probs, rmrl_probs, sample_actions, sra_probs,
                       uniform_probs)

CHUNK = 256


def realization_stream(master_seed: int, realization: int, purpose: int = 0) -> np.random.Generator:
    """Stream for one realization; ``purpose`` separates play from evaluation draws."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(realization), int(purpose)))
    return np.random.Generator(np.random.PCG64(ss))


class _Uniforms:
    """Per-realization uniform blocks, refilled ``CHUNK`` rounds at a time."""

    def __init__(self, streams: Sequence[np.random.Generator], width: int):
        self.streams = streams
        self.width = width
        self.buf = np.empty((len(streams), CHUNK, width))
        self.pos = CHUNK

    def next(self) -> np.ndarray:
        if self.pos == CHUNK:
            for b, g in enumerate(self.streams):
                self.buf[b] = g.random((CHUNK, self.width))
            self.pos = 0
        out = self.buf[:, self.pos]
        self.pos += 1
        return out


@dataclass
class BatchResult:
    iterations: int
    final_actions: np.ndarray      # (B, N)
    final_env: object              # batch of env samples or None
    final_sat: np.ndarray          # (B, N) bool
    sat_time_sum: np.ndarray       # (B, N)
    tail_sat_sum: np.ndarray       # (B, N) over the last floor(T/2) rounds
    tail_start: int
    streak: np.ndarray             # (B,) length of the final constant run
    streak_start: np.ndarray       # (B,) first round of the final constant run
    settle_start: np.ndarray       # (B,) first round of the final run of constant satisfied count
    max_pos_regret: np.ndarray     # (B,) from the RM regret of the realized play
    tail_actions: Optional[np.ndarray] = None   # (L, B, N) when kept
    trajectory: Optional[dict] = None


def fast_path_available(game: SatisfactionGame) -> bool:
    return hasattr(game, "fast_spec")


def run_batch(game: SatisfactionGame, config: LearnerConfig, iterations: int,
              streams: Sequence[np.random.Generator], keep_tail: bool = False,
              record_trajectory: bool = False, backend: str = "auto") -> BatchResult:
    """Advance ``len(streams)`` realizations for ``iterations`` rounds.

    ``backend`` is ``"numpy"``, ``"numba"`` (games with ``fast_spec`` only)
    or ``"auto"``.
    """
    if backend not in ("auto", "numpy", "numba"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not fast_path_available(game):
        raise ValueError(f"{type(game).__name__} has no compiled kernel")
    use_fast = backend == "numba" or (backend == "auto" and fast_path_available(game))
    B = len(streams)
    N, A = game.num_players, game.max_actions
    mask = game.action_mask
    algo = config.algorithm
    mu = config.resolved_mu(game)
    cutoff = config.resolved_cutoff(iterations)
    uniforms = _Uniforms(streams, 2 * N + game.env_size)

    cum = np.zeros((B, N, A, A))
    est = np.zeros((B, N, A, A)) if algo == "rmrl" else None
    paid = np.zeros((B, N, A)) if algo == "rmrl" else None
    fails = np.zeros((B, N, A)) if algo == "psel_reinforced" else None

    probs = uniform_probs(mask, B)
    prev = np.full((B, N), -1)
    streak = np.zeros(B, dtype=np.int64)
    streak_start = np.zeros(B, dtype=np.int64)
    settle_start = np.zeros(B, dtype=np.int64)
    prev_count = np.full(B, -1, dtype=np.int64)
    sat_time = np.zeros((B, N))
    tail_start = iterations - iterations // 2
    tail_sat = np.zeros((B, N))
    tail = np.empty((iterations - tail_start, B, N), dtype=np.int32) if keep_tail else None
    traj = None
    if record_trajectory:
        traj = {"actions": np.empty((iterations, B, N), dtype=np.int32),
                "satisfied": np.empty((iterations, B, N), dtype=bool),
                "max_pos_regret": np.full((iterations, B), np.nan)}
    bi = np.arange(B)[:, None]
    ni = np.arange(N)[None, :]
    env = None
    a = prev
    sat = np.zeros((B, N), dtype=bool)

    if use_fast and iterations > 0:
        a, sat, last_u = _run_fast(game, config, iterations, uniforms, probs, prev, cum, est, paid,
                                   fails, streak, streak_start, settle_start, prev_count, sat_time,
                                   tail_sat, tail_start, tail, traj, mu, cutoff)
        env = game.make_env(last_u[:, 2 * N:]) if game.env_size else None
        iterations_done = iterations
    else:
        iterations_done = 0

    for n in range(iterations_done, iterations):
        u = uniforms.next()
        a = sample_actions(probs, u[:, :N])
        env = game.make_env(u[:, 2 * N:]) if game.env_size else None
        table = game.satisfaction_table(a, env)
        sat = table[bi, ni, a]
        t = n + 1

        accumulate_rm(cum, a, table, sat, mask)
        if algo == "rmrl":
            accumulate_rmrl(est, paid, a, sat, probs)
        elif algo == "psel_reinforced":
            fails[bi, ni, a] += ~sat

        same = np.all(a == prev, axis=1)
        streak = np.where(same, streak + 1, 1)
        streak_start = np.where(same, streak_start, n)
        prev = a
        count = sat.sum(axis=1)
        settle_start = np.where(count == prev_count, settle_start, n)
        prev_count = count
        sat_time += sat
        if n >= tail_start:
            tail_sat += sat
            if keep_tail:
                tail[n - tail_start] = a

        if algo == "psel_uniform":
            probs = psel_probs(a, sat, mask)
        elif algo == "psel_reinforced":
            probs = psel_probs(a, sat, mask, fails)
        elif algo == "sra":
            probs = sra_probs(a, sat, table, u[:, N:2 * N], config.sra_max_movers, mask)
        elif algo == "rm":
            probs = rm_probs(regret_rows(cum, a, t), a, mu, mask)
        else:
            delta = config.tremble if t < cutoff else 0.0
            probs = rmrl_probs(estimated_rows(est, paid, a, t), a, mu, delta, mask)

        if record_trajectory:
            traj["actions"][n] = a
            traj["satisfied"][n] = sat
            if algo == "rm":
                traj["max_pos_regret"][n] = max_positive(cum, t)
            elif algo == "rmrl":
                traj["max_pos_regret"][n] = max_positive(est - paid[..., :, None], t)

    return BatchResult(iterations=iterations, final_actions=a, final_env=env, final_sat=sat,
                       sat_time_sum=sat_time, tail_sat_sum=tail_sat, tail_start=tail_start,
                       streak=streak, streak_start=streak_start, settle_start=settle_start,
                       max_pos_regret=max_positive(cum, max(iterations, 1)),
                       tail_actions=tail, trajectory=traj)


def _run_fast(game, config, iterations, uniforms, probs, prev, cum, est, paid, fails, streak,
              streak_start, settle_start, prev_count, sat_time, tail_sat, tail_start, tail, traj,
              mu, cutoff):
    from . import _fast

    B, N, A = probs.shape
    spec = game.fast_spec()
    empty_f = np.zeros(1)
    demands = spec.get("demands", empty_f)
    capacities = spec.get("capacities", empty_f)
    strides = spec.get("strides", np.zeros(1, dtype=np.int64))
    tables = spec.get("tables", np.zeros((1, 1), dtype=bool))
    est = np.zeros((1, 1, 1, 1)) if est is None else est
    paid = np.zeros((1, 1, 1)) if paid is None else paid
    fails = np.zeros((1, 1, 1)) if fails is None else fails
    tail_arr = np.zeros((1, 1, 1), dtype=np.int32) if tail is None else tail
    if traj is None:
        traj_a = np.zeros((1, 1, 1), dtype=np.int32)
        traj_s = np.zeros((1, 1, 1), dtype=bool)
        traj_r = np.zeros((1, 1))
    else:
        traj_a, traj_s, traj_r = traj["actions"], traj["satisfied"], traj["max_pos_regret"]
    counts = np.asarray(game.action_counts, dtype=np.int64)
    prev = prev.astype(np.int64)
    a_out = np.zeros((B, N), dtype=np.int64)
    sat_out = np.zeros((B, N), dtype=bool)
    algo = _fast.ALGO_CODES[config.algorithm]
    last_u = None
    done = 0
    while done < iterations:
        uniforms.next()  # refill; the engine consumes the chunk wholesale below
        block = uniforms.buf
        n_rounds = min(CHUNK, iterations - done)
        code = _fast.advance(spec["kind"], algo, done, n_rounds, block, probs, prev, a_out, sat_out,
                             cum, est, paid, fails, streak, streak_start, settle_start, prev_count,
                             sat_time, tail_sat,
                             tail_start, tail is not None, tail_arr, traj is not None,
                             traj_a, traj_s, traj_r, counts, float(mu), float(config.tremble),
                             int(cutoff), int(config.sra_max_movers), strides, tables, demands,
                             capacities, float(spec.get("threshold", 0.0)),
                             bool(spec.get("all_or_nothing", False)))
        if code != 0:
            raise DegenerateProbabilityError("an action was played with recorded probability 0")
        last_u = block[:, n_rounds - 1].copy()
        uniforms.pos = CHUNK
        done += n_rounds
    return a_out, sat_out, last_u
