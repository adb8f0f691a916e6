"""Satisfaction games defined by correspondence functions.

A game is a player count, one finite action set per player (dense integer
indices) and a correspondence oracle ``f_i(a_{-i}, env)`` returning the
subset of player ``i``'s actions that satisfy it.  ``env`` carries per-round
randomness (e.g. a serving order); deterministic games ignore it and use
``None``.

Besides the scalar oracle every game exposes :meth:`SatisfactionGame.satisfaction_table`,
a batched counterfactual view used by the learners: for a batch of joint
actions it returns, for each player and each of its actions ``x``, whether
``x`` would satisfy the player against the realized opponents.  The default
implementation loops over the oracle; large game families override it.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import EnumerationSizeError, InvalidArgumentError, UnsupportedGameError

DEFAULT_ENUMERATION_CAP = 10**7


class SatisfactionGame:
    """Base class for satisfaction games.

    Subclasses set ``num_players``/``action_counts`` and implement
    :meth:`correspondence`.  Stochastic games also set ``is_deterministic =
    False``, ``env_size`` (number of uniforms consumed per environment sample)
    and override :meth:`make_env`.
    """

    is_deterministic: bool = True
    env_size: int = 0

    def __init__(self, action_counts: Sequence[int]):
        counts = tuple(int(c) for c in action_counts)
        if len(counts) < 2:
            raise InvalidArgumentError(f"need at least 2 players, got {len(counts)}")
        if any(c < 1 for c in counts):
            raise InvalidArgumentError(f"every action set must be non-empty, got {counts}")
        self.action_counts = counts
        self.num_players = len(counts)
        self.max_actions = max(counts)
        mask = np.zeros((self.num_players, self.max_actions), dtype=bool)
        for i, c in enumerate(counts):
            mask[i, :c] = True
        mask.setflags(write=False)
        self.action_mask = mask

    # -- oracle -----------------------------------------------------------
    def correspondence(self, i: int, a_minus_i: tuple, env=None) -> frozenset:
        raise NotImplementedError

    # -- environment ------------------------------------------------------
    def make_env(self, uniforms):
        """Map ``env_size`` uniforms (or a ``(B, env_size)`` batch) to env samples."""
        return None

    def sample_env(self, rng: np.random.Generator):
        if self.env_size == 0:
            return None
        return self.make_env(rng.random(self.env_size))

    def stack_envs(self, envs: Sequence):
        """Inverse of :meth:`env_at`: batch a list of single env samples."""
        if self.env_size == 0:
            return None
        return np.stack([np.asarray(e) for e in envs])

    def env_at(self, envs, b: int):
        """Select realization ``b`` from a batch of env samples."""
        if envs is None:
            return None
        return envs[b]

    # -- batched counterfactuals -----------------------------------------
    def satisfaction_table(self, profiles: np.ndarray, envs=None) -> np.ndarray:
        """Counterfactual satisfaction for a batch of joint actions.

        ``profiles`` has shape ``(B, N)``; the result has shape
        ``(B, N, max_actions)`` with entry ``[b, i, x]`` true iff
        ``x in f_i(profiles[b, -i])`` under ``envs[b]``.  Padding past
        ``|A_i|`` is false.
        """
        profiles = np.asarray(profiles)
        B, N = profiles.shape
        out = np.zeros((B, N, self.max_actions), dtype=bool)
        for b in range(B):
            env = self.env_at(envs, b)
            row = tuple(int(x) for x in profiles[b])
            for i in range(N):
                for x in self.correspondence(i, row[:i] + row[i + 1:], env):
                    out[b, i, x] = True
        return out

    def satisfied_batch(self, profiles: np.ndarray, envs=None) -> np.ndarray:
        """Realized satisfaction bits, shape ``(B, N)``."""
        table = self.satisfaction_table(profiles, envs)
        return np.take_along_axis(table, np.asarray(profiles)[..., None], axis=-1)[..., 0]

    def allocation_efficiency(self, profile: Sequence[int], env=None) -> float:
        """Game-specific efficiency metric in [0, 1]; defaults to the satisfied fraction."""
        return float(np.mean(satisfied_partition(self, profile, env)))

    # -- helpers ----------------------------------------------------------
    @property
    def profile_count(self) -> int:
        return math.prod(self.action_counts)

    def describe(self) -> dict:
        return {"family": type(self).__name__, "players": self.num_players,
                "actions": list(self.action_counts)}


class FunctionGame(SatisfactionGame):
    """A deterministic game whose correspondence is an arbitrary callable.

    ``fn(i, a_minus_i)`` must return an iterable of action indices.  Not
    picklable when ``fn`` is a lambda, so runs stay in-process.
    """

    def __init__(self, action_counts: Sequence[int], fn: Callable[[int, tuple], Iterable[int]],
                 name: str = "function"):
        super().__init__(action_counts)
        self._fn = fn
        self.name = name

    def correspondence(self, i, a_minus_i, env=None):
        return frozenset(int(x) for x in self._fn(i, tuple(a_minus_i)))

    def describe(self):
        return {"family": self.name, "players": self.num_players, "actions": list(self.action_counts)}


# -- validation -----------------------------------------------------------

def check_player(game: SatisfactionGame, i: int) -> int:
    if not isinstance(i, (int, np.integer)) or not 0 <= i < game.num_players:
        raise InvalidArgumentError(f"player index {i!r} out of range [0, {game.num_players})")
    return int(i)


def check_action(game: SatisfactionGame, i: int, x: int) -> int:
    if not isinstance(x, (int, np.integer)) or not 0 <= x < game.action_counts[i]:
        raise InvalidArgumentError(
            f"action {x!r} invalid for player {i} (|A_{i}| = {game.action_counts[i]})")
    return int(x)


def check_profile(game: SatisfactionGame, a: Sequence[int]) -> tuple:
    a = tuple(a)
    if len(a) != game.num_players:
        raise InvalidArgumentError(f"joint action has {len(a)} entries, game has {game.num_players} players")
    return tuple(check_action(game, i, x) for i, x in enumerate(a))


def check_opponents(game: SatisfactionGame, i: int, a_minus_i: Sequence[int]) -> tuple:
    a_minus_i = tuple(a_minus_i)
    if len(a_minus_i) != game.num_players - 1:
        raise InvalidArgumentError(
            f"opponent profile has {len(a_minus_i)} entries, expected {game.num_players - 1}")
    others = [j for j in range(game.num_players) if j != i]
    return tuple(check_action(game, j, x) for j, x in zip(others, a_minus_i))


def opponents(a: Sequence[int], i: int) -> tuple:
    a = tuple(a)
    return a[:i] + a[i + 1:]


def require_deterministic(game: SatisfactionGame, what: str) -> None:
    if not game.is_deterministic:
        raise UnsupportedGameError(f"{what} requires a deterministic game; "
                                   f"{type(game).__name__} depends on environment samples")


# -- operations -------------------------------------------------------------

def satisfying_set(game: SatisfactionGame, i: int, a_minus_i: Sequence[int], env=None) -> frozenset:
    """``f_i(a_{-i})`` under ``env``; possibly empty."""
    i = check_player(game, i)
    a_minus_i = check_opponents(game, i, a_minus_i)
    return frozenset(game.correspondence(i, a_minus_i, env))


def natural_utility(game: SatisfactionGame, i: int, a: Sequence[int], env=None) -> int:
    """1 if ``a_i in f_i(a_{-i})`` else 0."""
    i = check_player(game, i)
    a = check_profile(game, a)
    return int(a[i] in game.correspondence(i, opponents(a, i), env))


def satisfied_partition(game: SatisfactionGame, a: Sequence[int], env=None) -> list[bool]:
    a = check_profile(game, a)
    return [a[i] in game.correspondence(i, opponents(a, i), env) for i in range(game.num_players)]


def iter_profiles(counts: Sequence[int], cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple]:
    total = math.prod(counts)
    if total > cap:
        raise EnumerationSizeError(f"{total} profiles exceeds enumeration cap {cap}")
    return itertools.product(*(range(c) for c in counts))


def find_clipping_actions(game: SatisfactionGame, i: int, cap: int = DEFAULT_ENUMERATION_CAP) -> frozenset:
    """Actions that satisfy player ``i`` against every opponent profile."""
    i = check_player(game, i)
    require_deterministic(game, "find_clipping_actions")
    others = [c for j, c in enumerate(game.action_counts) if j != i]
    candidates = set(range(game.action_counts[i]))
    for a_minus_i in iter_profiles(others, cap):
        candidates &= game.correspondence(i, a_minus_i, None)
        if not candidates:
            break
    return frozenset(candidates)
