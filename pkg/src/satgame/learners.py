"""Repeated-play learning rules: PSEL, SRA, RM and RMRL.

Every rule is a numpy kernel over a leading batch axis ``B`` of independent
realizations, so the batched engine and the single-run helpers below share
one implementation.  A mixed action is an ``(N, max_actions)`` array (or
``(B, N, max_actions)`` batched) whose row ``i`` is player ``i``'s pmf,
zero-padded past ``|A_i|``.

Regret bookkeeping keeps un-normalized sums:

* ``cum[i, a, a']`` accumulates ``1{a' in f_i(s_-i)} - 1{a in f_i(s_-i)}`` over
  the rounds where ``i`` played ``a``; ``cum / t`` is the RM regret matrix.
* ``est[i, a, a']`` accumulates ``u_i * p(a) / p(a')`` over the rounds where
  ``i`` played ``a'`` and ``paid[i, a]`` accumulates ``u_i`` over rounds it
  played ``a``; ``(est[i, a, a'] - paid[i, a]) / t`` is the RMRL estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .equilibrium import JointPmf
from .errors import ConfigError, DegenerateProbabilityError
from .game import SatisfactionGame

ALGORITHMS = ("psel_uniform", "psel_reinforced", "sra", "rm", "rmrl")


@dataclass
class LearnerConfig:
    algorithm: str = "rm"
    mu: Optional[float] = None        # None -> 2 * max |A_i|
    sra_max_movers: int = 1
    tremble: float = 0.05
    tremble_cutoff: Optional[int] = None  # None -> floor(0.6 * T)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not 0 <= self.tremble < 1:
            raise ConfigError(f"tremble must lie in [0, 1), got {self.tremble}")
        if self.sra_max_movers < 1:
            raise ConfigError(f"sra_max_movers must be >= 1, got {self.sra_max_movers}")
        if self.tremble_cutoff is not None and self.tremble_cutoff < 0:
            raise ConfigError("tremble_cutoff must be non-negative")

    def resolved_mu(self, game: SatisfactionGame) -> float:
        mu = 2.0 * game.max_actions if self.mu is None else float(self.mu)
        if not mu > game.max_actions - 1:
            raise ConfigError(f"mu = {mu} must exceed max_i |A_i| - 1 = {game.max_actions - 1} "
                              "so the stay probability stays positive")
        return mu

    def resolved_cutoff(self, iterations: int) -> int:
        if self.tremble_cutoff is None:
            return int(math.floor(0.6 * iterations))
        return int(self.tremble_cutoff)

    @property
    def label(self) -> str:
        return algorithm_label(self.algorithm, self.sra_max_movers)


def algorithm_label(algorithm: str, movers: int = 1) -> str:
    return f"psra_{movers}" if algorithm == "sra" else algorithm


def parse_algorithm(label: str) -> tuple[str, int]:
    """``"psra_2"`` -> ``("sra", 2)``; plain tags pass through with k = 1."""
    label = label.strip().lower()
    if label.startswith("psra_") or label.startswith("sra_"):
        try:
            k = int(label.split("_", 1)[1])
        except ValueError:
            raise ConfigError(f"bad SRA label {label!r}") from None
        return "sra", k
    if label == "psra":
        return "sra", 1
    if label not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {label!r}")
    return label, 1


# -- kernels ----------------------------------------------------------------

def uniform_probs(mask: np.ndarray, batch: int) -> np.ndarray:
    p = mask / mask.sum(axis=1, keepdims=True)
    return np.broadcast_to(p, (batch,) + mask.shape).copy()


def point_probs(actions: np.ndarray, num_actions: int) -> np.ndarray:
    return (actions[..., None] == np.arange(num_actions)).astype(float)


def sample_actions(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per player; never lands on a zero-probability action."""
    cdf = np.cumsum(probs, axis=-1)
    idx = (uniforms[..., None] >= cdf).sum(axis=-1)
    A = probs.shape[-1]
    last_pos = A - 1 - np.argmax(probs[..., ::-1] > 0, axis=-1)
    return np.minimum(idx, last_pos)


def psel_probs(last, sat, mask, fail_counts=None):
    """Satisfied players repeat; unsatisfied ones explore.

    Uniform exploration when ``fail_counts`` is None, otherwise weights
    ``1 / (1 + fail_counts)`` over valid actions.
    """
    B = last.shape[0]
    if fail_counts is None:
        explore = uniform_probs(mask, B)
    else:
        w = mask / (1.0 + fail_counts)
        explore = w / w.sum(axis=-1, keepdims=True)
    stay = point_probs(last, mask.shape[1])
    return np.where(sat[..., None], stay, explore)


def sra_movers(sat, keys, k):
    """Up to ``k`` unsatisfied players per realization, uniformly without replacement."""
    masked = np.where(sat, np.inf, keys)
    rank = np.argsort(np.argsort(masked, axis=1, kind="stable"), axis=1, kind="stable")
    return ~sat & (rank < k)


def sra_probs(last, sat, table, keys, k, mask):
    """Selected unsatisfied movers jump uniformly into their current satisfying set."""
    movers = sra_movers(sat, keys, k)
    counts = table.sum(axis=-1)
    jump = movers & (counts > 0)
    stay = point_probs(last, mask.shape[1])
    target = table / np.maximum(counts, 1)[..., None]
    return np.where(jump[..., None], target, stay)


def rm_probs(rows, last, mu, mask):
    """Regret matching from the regret row of the last action.

    ``P(a') = [R(last, a')]_+ / mu`` for ``a' != last``; the rest stays on ``last``.
    RMRL estimates are not bounded by 1, so when the positive parts sum past
    ``mu`` they are normalized by their sum instead and the stay mass is 0.
    """
    A = mask.shape[1]
    own = point_probs(last, A).astype(bool)
    raw = np.where(own | ~mask, 0.0, np.maximum(rows, 0.0))
    total = raw.sum(axis=-1)
    pos = raw / np.where(total > mu, total, mu)[..., None]
    stay = np.maximum(1.0 - pos.sum(axis=-1), 0.0)
    return np.where(own, stay[..., None], pos)


def rmrl_probs(rows, last, mu, delta, mask):
    base = rm_probs(rows, last, mu, mask)
    if delta == 0:
        return base
    uniform = mask / mask.sum(axis=1, keepdims=True)
    return (1.0 - delta) * base + delta * uniform


def regret_rows(cum, last, t):
    """Row ``last`` of ``cum / t`` for every (realization, player)."""
    rows = np.take_along_axis(cum, last[..., None, None], axis=-2)[..., 0, :]
    return rows / t


def accumulate_rm(cum, last, table, sat, mask):
    """Add one round of counterfactual regret terms, each in {-1, 0, +1}."""
    B, N = last.shape
    delta = (table.astype(np.int8) - sat[..., None].astype(np.int8)) * mask
    bi = np.arange(B)[:, None]
    ni = np.arange(N)[None, :]
    cum[bi, ni, last] += delta


def accumulate_rmrl(est, paid, last, sat, probs):
    B, N = last.shape
    bi = np.arange(B)[:, None]
    ni = np.arange(N)[None, :]
    played = probs[bi, ni, last]
    if np.any(played <= 0):
        raise DegenerateProbabilityError("an action was played with recorded probability 0")
    u = sat.astype(float)
    ratio = probs * (u / played)[..., None]
    est[bi, ni, :, last] += ratio
    paid[bi, ni, last] += u


def estimated_rows(est, paid, last, t):
    rows = np.take_along_axis(est, last[..., None, None], axis=-2)[..., 0, :]
    own = np.take_along_axis(paid, last[..., None], axis=-1)
    return (rows - own) / t


def max_positive(cum_or_regrets, t=1.0):
    return np.maximum(cum_or_regrets.max(axis=(-3, -2, -1)) / t, 0.0)


# -- single-run API -----------------------------------------------------------

@dataclass
class PlayHistory:
    """Joint actions, env samples, satisfaction bits and the pmfs they were drawn from."""

    num_players: int
    actions: list = field(default_factory=list)
    envs: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    probs: list = field(default_factory=list)

    @property
    def t(self) -> int:
        return len(self.actions)

    def record(self, action, env, outcome, probs=None) -> None:
        self.actions.append(tuple(int(x) for x in action))
        self.envs.append(env)
        self.outcomes.append(tuple(bool(x) for x in outcome))
        self.probs.append(None if probs is None else np.asarray(probs, dtype=float))


@dataclass
class RegretState:
    """Cumulative regret sums for one run; divide by ``t`` to get regrets."""

    cum: np.ndarray      # (N, A, A) RM numerators
    est: np.ndarray      # (N, A, A) RMRL importance-weighted sums
    paid: np.ndarray     # (N, A) RMRL realized-utility sums
    play_counts: np.ndarray  # (N, A)
    t: int = 0

    @classmethod
    def empty(cls, game: SatisfactionGame) -> "RegretState":
        N, A = game.num_players, game.max_actions
        return cls(np.zeros((N, A, A)), np.zeros((N, A, A)), np.zeros((N, A)),
                   np.zeros((N, A), dtype=np.int64))

    @property
    def regrets(self) -> np.ndarray:
        return self.cum / max(self.t, 1)

    @property
    def estimated_regrets(self) -> np.ndarray:
        return (self.est - self.paid[..., :, None]) / max(self.t, 1)

    @property
    def max_positive_regret(self) -> float:
        return float(max_positive(self.regrets))


def _last(history: PlayHistory) -> tuple[np.ndarray, np.ndarray]:
    return (np.asarray(history.actions[-1])[None, :], np.asarray(history.outcomes[-1])[None, :])


def psel_step(game: SatisfactionGame, history: PlayHistory, mode: str = "uniform") -> np.ndarray:
    if history.t == 0:
        return uniform_probs(game.action_mask, 1)[0]
    last, sat = _last(history)
    fails = None
    if mode == "reinforced":
        fails = np.zeros((1,) + game.action_mask.shape)
        for a, o in zip(history.actions, history.outcomes):
            for i, (x, ok) in enumerate(zip(a, o)):
                if not ok:
                    fails[0, i, x] += 1
    elif mode != "uniform":
        raise ConfigError(f"PSEL mode must be 'uniform' or 'reinforced', got {mode!r}")
    return psel_probs(last, sat, game.action_mask, fails)[0]


def sra_step(game: SatisfactionGame, history: PlayHistory, k: int, rng: np.random.Generator) -> np.ndarray:
    if history.t == 0:
        return uniform_probs(game.action_mask, 1)[0]
    last, sat = _last(history)
    table = game.satisfaction_table(last, game.stack_envs([history.envs[-1]]))
    keys = rng.random((1, game.num_players))
    return sra_probs(last, sat, table, keys, k, game.action_mask)[0]


def rm_update_regrets(game: SatisfactionGame, history: PlayHistory,
                      state: Optional[RegretState] = None) -> RegretState:
    """Fold the rounds ``state.t .. history.t`` into the RM sums.

    Counterfactuals reuse each round's stored env sample.
    """
    state = RegretState.empty(game) if state is None else state
    if state.t >= history.t:
        return state
    new = np.asarray(history.actions[state.t:])
    sat = np.asarray(history.outcomes[state.t:])
    table = game.satisfaction_table(new, game.stack_envs(history.envs[state.t:]))
    cum = state.cum[None]
    counts = state.play_counts[None]
    for n in range(len(new)):
        accumulate_rm(cum, new[n:n + 1], table[n:n + 1], sat[n:n + 1], game.action_mask)
        counts[0, np.arange(game.num_players), new[n]] += 1
    state.t = history.t
    return state


def rm_step(state: RegretState, last_action, mu: float, mask: Optional[np.ndarray] = None) -> np.ndarray:
    last = np.asarray(last_action)[None, :]
    A = state.cum.shape[-1]
    if mask is None:
        mask = np.ones((last.shape[1], A), dtype=bool)
    if not mu > mask.sum(axis=1).max() - 1:
        raise ConfigError(f"mu = {mu} too small for {mask.sum(axis=1).max()} actions")
    rows = regret_rows(state.cum[None], last, max(state.t, 1))
    return rm_probs(rows, last, mu, mask)[0]


def rmrl_update_regrets(game: SatisfactionGame, history: PlayHistory,
                        state: Optional[RegretState] = None) -> RegretState:
    """Fold new rounds into the RMRL sums using only own actions, bits and play pmfs."""
    state = RegretState.empty(game) if state is None else state
    est, paid = state.est[None], state.paid[None]
    for n in range(state.t, history.t):
        p = history.probs[n]
        if p is None:
            raise DegenerateProbabilityError(f"round {n} has no recorded play probabilities")
        last = np.asarray(history.actions[n])[None, :]
        sat = np.asarray(history.outcomes[n])[None, :]
        accumulate_rmrl(est, paid, last, sat, np.asarray(p)[None])
        state.play_counts[np.arange(game.num_players), last[0]] += 1
    state.t = history.t
    return state


def rmrl_step(state: RegretState, last_action, mu: float, delta: float,
              mask: Optional[np.ndarray] = None) -> np.ndarray:
    if not 0 <= delta < 1:
        raise ConfigError(f"tremble must lie in [0, 1), got {delta}")
    last = np.asarray(last_action)[None, :]
    A = state.est.shape[-1]
    if mask is None:
        mask = np.ones((last.shape[1], A), dtype=bool)
    rows = estimated_rows(state.est[None], state.paid[None], last, max(state.t, 1))
    return rmrl_probs(rows, last, mu, delta, mask)[0]


def empirical_distribution(history_or_actions, start: int = 0) -> JointPmf:
    actions = getattr(history_or_actions, "actions", history_or_actions)
    actions = np.asarray(actions)[start:]
    if len(actions) == 0:
        raise ConfigError("empirical distribution needs at least one round")
    rows, counts = np.unique(actions, axis=0, return_counts=True)
    total = counts.sum()
    return JointPmf({tuple(int(x) for x in r): c / total for r, c in zip(rows, counts)})


@dataclass(frozen=True)
class ConvergenceStatus:
    converged: bool
    profile: Optional[tuple] = None
    since: Optional[int] = None   # first round of the final constant run
    insufficient: bool = False


def detect_convergence(history_or_actions, window: int = 100) -> ConvergenceStatus:
    """Converged iff the last ``window`` joint actions are identical."""
    if window < 2:
        raise ConfigError("convergence window must be >= 2")
    actions = getattr(history_or_actions, "actions", history_or_actions)
    t = len(actions)
    if t < window:
        return ConvergenceStatus(False, insufficient=True)
    last = tuple(actions[-1])
    since = t - 1
    while since > 0 and tuple(actions[since - 1]) == last:
        since -= 1
    if t - since >= window:
        return ConvergenceStatus(True, last, since)
    return ConvergenceStatus(False)


def play(game: SatisfactionGame, config: LearnerConfig, iterations: int,
         rng: np.random.Generator) -> tuple[PlayHistory, RegretState]:
    """Reference single-run driver built on the step functions above."""
    mu = config.resolved_mu(game)
    cutoff = config.resolved_cutoff(iterations)
    history = PlayHistory(game.num_players)
    rm_state = RegretState.empty(game)
    rl_state = RegretState.empty(game)
    mask = game.action_mask
    for n in range(iterations):
        if n == 0:
            probs = uniform_probs(mask, 1)[0]
        elif config.algorithm == "psel_uniform":
            probs = psel_step(game, history, "uniform")
        elif config.algorithm == "psel_reinforced":
            probs = psel_step(game, history, "reinforced")
        elif config.algorithm == "sra":
            probs = sra_step(game, history, config.sra_max_movers, rng)
        elif config.algorithm == "rm":
            probs = rm_step(rm_state, history.actions[-1], mu, mask)
        else:
            delta = config.tremble if n < cutoff else 0.0
            probs = rmrl_step(rl_state, history.actions[-1], mu, delta, mask)
        a = sample_actions(probs[None], rng.random((1, game.num_players)))[0]
        env = game.sample_env(rng)
        table = game.satisfaction_table(a[None], game.stack_envs([env]))[0]
        history.record(a, env, table[np.arange(game.num_players), a], probs)
        rm_update_regrets(game, history, rm_state)
        if config.algorithm == "rmrl":
            rmrl_update_regrets(game, history, rl_state)
    return history, (rl_state if config.algorithm == "rmrl" else rm_state)
