"""Table-backed deterministic games and the tiny fixture catalog."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import InvalidArgumentError
from ..game import DEFAULT_ENUMERATION_CAP, SatisfactionGame, iter_profiles, opponents


class TableGame(SatisfactionGame):
    """Deterministic game stored as a boolean table.

    ``table[i][a]`` is true iff ``a_i in f_i(a_{-i})``.  Only ``a_{-i}``
    matters for the correspondence; ``a_i`` selects which member is queried.
    """

    def __init__(self, table: Sequence[np.ndarray], name: str = "table"):
        arrays = [np.asarray(t, dtype=bool) for t in table]
        if not arrays:
            raise InvalidArgumentError("empty table")
        counts = arrays[0].shape
        if len(counts) != len(arrays) or any(t.shape != counts for t in arrays):
            raise InvalidArgumentError(
                f"table must hold one array of shape {counts} per player, "
                f"got {[t.shape for t in arrays]}")
        super().__init__(counts)
        for t in arrays:
            t.setflags(write=False)
        self.table = tuple(arrays)
        self.name = name

    @classmethod
    def from_correspondence(cls, action_counts: Sequence[int],
                            fn: Callable[[int, tuple], Iterable[int]], name: str = "table",
                            cap: int = DEFAULT_ENUMERATION_CAP) -> "TableGame":
        counts = tuple(action_counts)
        table = [np.zeros(counts, dtype=bool) for _ in counts]
        for a in iter_profiles(counts, cap):
            for i in range(len(counts)):
                table[i][a] = a[i] in set(fn(i, opponents(a, i)))
        return cls(table, name=name)

    def correspondence(self, i, a_minus_i, env=None):
        a_minus_i = tuple(a_minus_i)
        t = self.table[i]
        out = []
        for x in range(self.action_counts[i]):
            if t[a_minus_i[:i] + (x,) + a_minus_i[i:]]:
                out.append(x)
        return frozenset(out)

    def satisfaction_table(self, profiles, envs=None):
        profiles = np.asarray(profiles)
        B, N = profiles.shape
        out = np.zeros((B, N, self.max_actions), dtype=bool)
        for i, c in enumerate(self.action_counts):
            cols = [profiles[:, j][:, None] for j in range(N)]
            cols[i] = np.arange(c)[None, :]
            out[:, i, :c] = self.table[i][tuple(cols)]
        return out

    def fast_spec(self):
        counts = self.action_counts
        strides = [int(np.prod(counts[j + 1:])) for j in range(len(counts))]
        return {"kind": 0, "strides": np.asarray(strides, dtype=np.int64),
                "tables": np.stack([t.ravel() for t in self.table])}

    def describe(self):
        return {"family": self.name, "players": self.num_players, "actions": list(self.action_counts)}


def random_table_game(rng: np.random.Generator, action_counts: Sequence[int],
                      density: float = 0.5, name: str = "random") -> TableGame:
    """Each ``(i, a_{-i})`` gets an independent random satisfying subset."""
    counts = tuple(action_counts)
    table = [rng.random(counts) < density for _ in counts]
    return TableGame(table, name=name)


@dataclass(frozen=True)
class FixtureGame:
    """A 2-player, 2-action game with its equilibria worked out by hand."""

    name: str
    game: TableGame
    pure_se: frozenset
    pure_gse: frozenset
    clipping: tuple = field(default=(frozenset(), frozenset()))


def matching_game() -> TableGame:
    return TableGame.from_correspondence((2, 2), lambda i, o: {o[0]}, name="matching")


def mismatch_game() -> TableGame:
    return TableGame.from_correspondence(
        (2, 2), lambda i, o: {o[0]} if i == 0 else {1 - o[0]}, name="mismatch")


def never_satisfiable_game() -> TableGame:
    return TableGame.from_correspondence(
        (2, 2), lambda i, o: {o[0]} if i == 0 else set(), name="never")


def universal_clipping_game() -> TableGame:
    return TableGame.from_correspondence(
        (2, 2), lambda i, o: {0, 1} if i == 0 else {o[0]}, name="clipping")


def fixture_games() -> dict[str, FixtureGame]:
    both = frozenset({(0, 0), (1, 1)})
    return {
        "matching": FixtureGame("matching", matching_game(), both, both),
        "mismatch": FixtureGame("mismatch", mismatch_game(), frozenset(), frozenset()),
        "never": FixtureGame("never", never_satisfiable_game(), frozenset(), both),
        "clipping": FixtureGame("clipping", universal_clipping_game(), both, both,
                                clipping=(frozenset({0, 1}), frozenset())),
    }
