"""Equilibrium verifiers for satisfaction games and their natural normal form.

All exact verifiers take a deterministic game and a :class:`JointPmf`
(sparse map from joint action to probability).  Player and action indices
are 0-based.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidArgumentError, UndefinedConditionalError
from .game import (DEFAULT_ENUMERATION_CAP, SatisfactionGame, check_action, check_player,
                   check_profile, iter_profiles, opponents, require_deterministic)

TOL_MASS = 1e-9
TOL_EXACT = 1e-9
TOL_EMPIRICAL = 0.05


class JointPmf:
    """Probability mass function over joint actions, stored on its support."""

    def __init__(self, probs: Mapping[Sequence[int], float], tol_mass: float = TOL_MASS):
        support = {}
        for a, p in probs.items():
            p = float(p)
            if not p >= 0 or math.isinf(p):
                raise InvalidArgumentError(f"probability {p} for {tuple(a)} is not a finite non-negative number")
            if p > 0:
                key = tuple(int(x) for x in a)
                support[key] = support.get(key, 0.0) + p
        if not support:
            raise InvalidArgumentError("pmf has empty support")
        total = math.fsum(support.values())
        if abs(total - 1.0) > tol_mass:
            raise InvalidArgumentError(f"pmf mass {total!r} differs from 1 by more than {tol_mass}")
        lengths = {len(a) for a in support}
        if len(lengths) != 1:
            raise InvalidArgumentError("joint actions in the support have different lengths")
        self.support = support
        self.num_players = lengths.pop()

    # constructors
    @classmethod
    def point(cls, a: Sequence[int]) -> "JointPmf":
        return cls({tuple(a): 1.0})

    @classmethod
    def from_counts(cls, counts: Mapping[Sequence[int], int]) -> "JointPmf":
        total = sum(counts.values())
        return cls({a: c / total for a, c in counts.items()})

    @classmethod
    def uniform(cls, action_counts: Sequence[int]) -> "JointPmf":
        profiles = list(iter_profiles(action_counts))
        return cls({a: 1.0 / len(profiles) for a in profiles})

    @classmethod
    def mixture(cls, weights: Sequence[float], pmfs: Sequence["JointPmf"]) -> "JointPmf":
        acc: dict = defaultdict(float)
        for w, pmf in zip(weights, pmfs):
            for a, p in pmf.support.items():
                acc[a] += w * p
        return cls(acc)

    # views
    def items(self):
        return self.support.items()

    def __len__(self):
        return len(self.support)

    def __getitem__(self, a):
        return self.support.get(tuple(a), 0.0)

    def marginal(self, i: int) -> dict:
        out: dict = defaultdict(float)
        for a, p in self.support.items():
            out[a[i]] += p
        return dict(out)

    def conditional(self, i: int, a_i: int) -> dict:
        """``pi(a_{-i} | a_i)``; only defined where the marginal is positive."""
        rows = {opponents(a, i): p for a, p in self.support.items() if a[i] == a_i}
        mass = math.fsum(rows.values())
        if mass <= 0:
            raise UndefinedConditionalError(f"player {i} plays {a_i} with probability 0")
        return {o: p / mass for o, p in rows.items()}

    def __repr__(self):
        return f"JointPmf({len(self.support)} profiles)"


@dataclass
class RegretReport:
    """Conditional regrets ``R_i(a_i, a_i')`` per player; rows of unplayed actions are 0."""

    matrices: list
    max_positive_regret: float


@dataclass(frozen=True)
class GseVerdict:
    is_gse: bool
    satisfied_players: frozenset = field(default_factory=frozenset)
    unsatisfied_players: frozenset = field(default_factory=frozenset)


def _check_pmf(game: SatisfactionGame, pmf: JointPmf) -> None:
    if pmf.num_players != game.num_players:
        raise InvalidArgumentError(f"pmf is over {pmf.num_players} players, game has {game.num_players}")
    for a in pmf.support:
        check_profile(game, a)


def _satisfied(game, i, a) -> bool:
    return a[i] in game.correspondence(i, opponents(a, i), None)


def prob_satisfaction(game: SatisfactionGame, pmf: JointPmf, i: int) -> float:
    """``Pr_pi{A_i in f_i(A_{-i})}``."""
    require_deterministic(game, "prob_satisfaction")
    i = check_player(game, i)
    _check_pmf(game, pmf)
    return math.fsum(p for a, p in pmf.items() if _satisfied(game, i, a))


def conditional_regret(game: SatisfactionGame, pmf: JointPmf, i: int, a_i: int, a_alt: int) -> float:
    """Gain in conditional satisfaction probability from playing ``a_alt`` when told ``a_i``."""
    require_deterministic(game, "conditional_regret")
    i = check_player(game, i)
    a_i = check_action(game, i, a_i)
    a_alt = check_action(game, i, a_alt)
    _check_pmf(game, pmf)
    cond = pmf.conditional(i, a_i)
    if a_alt == a_i:
        return 0.0
    gain = 0.0
    for o, p in cond.items():
        sat = game.correspondence(i, o, None)
        gain += p * ((a_alt in sat) - (a_i in sat))
    return gain


def regret_report(game: SatisfactionGame, pmf: JointPmf) -> RegretReport:
    """All conditional regrets at once; zero-probability recommendations are skipped."""
    require_deterministic(game, "regret_report")
    _check_pmf(game, pmf)
    mats = [np.zeros((c, c)) for c in game.action_counts]
    marg = [np.zeros(c) for c in game.action_counts]
    for a, p in pmf.items():
        for i in range(game.num_players):
            sat = game.correspondence(i, opponents(a, i), None)
            ind = np.zeros(game.action_counts[i])
            ind[list(sat)] = 1.0
            mats[i][a[i]] += p * (ind - ind[a[i]])
            marg[i][a[i]] += p
    best = 0.0
    for i, m in enumerate(mats):
        played = marg[i] > 0
        m[played] /= marg[i][played, None]
        np.fill_diagonal(m, 0.0)
        if m.size:
            best = max(best, float(np.max(m)))
    return RegretReport(mats, max(best, 0.0))


def is_correlated_equilibrium(game: SatisfactionGame, pmf: JointPmf,
                              tol: float = TOL_EXACT) -> tuple[bool, RegretReport]:
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    report = regret_report(game, pmf)
    return report.max_positive_regret <= tol, report


def is_pure_se(game: SatisfactionGame, a: Sequence[int]) -> bool:
    require_deterministic(game, "is_pure_se")
    a = check_profile(game, a)
    return all(_satisfied(game, i, a) for i in range(game.num_players))


def is_pure_gse(game: SatisfactionGame, a: Sequence[int]) -> GseVerdict:
    """Every player is satisfied or has an empty satisfying set."""
    require_deterministic(game, "is_pure_gse")
    a = check_profile(game, a)
    sat, unsat = set(), set()
    for i in range(game.num_players):
        f = game.correspondence(i, opponents(a, i), None)
        if a[i] in f:
            sat.add(i)
        elif not f:
            unsat.add(i)
        else:
            return GseVerdict(False, frozenset(sat), frozenset(unsat))
    return GseVerdict(True, frozenset(sat), frozenset(unsat))


def classify_probabilities(probs: Sequence[float], tol: float) -> GseVerdict:
    """Partition players whose satisfaction probability is within ``tol`` of 1 or 0."""
    sat = frozenset(i for i, p in enumerate(probs) if p >= 1 - tol)
    unsat = frozenset(i for i, p in enumerate(probs) if p <= tol and i not in sat)
    return GseVerdict(len(sat) + len(unsat) == len(probs), sat, unsat)


def is_mixed_gse(game: SatisfactionGame, pmf: JointPmf, tol: float = TOL_EXACT) -> GseVerdict:
    require_deterministic(game, "is_mixed_gse")
    _check_pmf(game, pmf)
    return classify_probabilities(satisfaction_probabilities(game, pmf), tol)


def satisfaction_probabilities(game: SatisfactionGame, pmf: JointPmf) -> list[float]:
    """``prob_satisfaction`` for every player, one pass over the support."""
    require_deterministic(game, "satisfaction_probabilities")
    profiles = np.array(list(pmf.support), dtype=np.int64)
    weights = np.array(list(pmf.support.values()))
    out = np.zeros(game.num_players)
    for start in range(0, len(profiles), 4096):
        chunk = profiles[start:start + 4096]
        bits = game.satisfied_batch(chunk, None)
        out += weights[start:start + 4096] @ bits
    return [min(max(float(p), 0.0), 1.0) for p in out]


def hannan_regret(game: SatisfactionGame, pmf: JointPmf, i: int, a_i: int) -> float:
    """Gain from committing to ``a_i`` against the opponents' joint marginal."""
    require_deterministic(game, "hannan_regret")
    i = check_player(game, i)
    a_i = check_action(game, i, a_i)
    _check_pmf(game, pmf)
    fixed = 0.0
    actual = 0.0
    for a, p in pmf.items():
        sat = game.correspondence(i, opponents(a, i), None)
        fixed += p * (a_i in sat)
        actual += p * (a[i] in sat)
    return fixed - actual


def is_hannan_equilibrium(game: SatisfactionGame, pmf: JointPmf, tol: float = TOL_EXACT) -> bool:
    require_deterministic(game, "is_hannan_equilibrium")
    _check_pmf(game, pmf)
    for i in range(game.num_players):
        fixed = np.zeros(game.action_counts[i])
        actual = 0.0
        for a, p in pmf.items():
            sat = list(game.correspondence(i, opponents(a, i), None))
            fixed[sat] += p
            actual += p * (a[i] in sat)
        if np.max(fixed) - actual > tol:
            return False
    return True


@dataclass
class PureEquilibria:
    se: list
    gse: list  # (profile, GseVerdict) pairs
    ne: list


def utility_table(game: SatisfactionGame, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Natural utilities ``u[i][a]`` over the full profile space."""
    require_deterministic(game, "utility_table")
    profiles = np.array(list(iter_profiles(game.action_counts, cap)), dtype=np.int64)
    bits = np.concatenate([game.satisfied_batch(profiles[s:s + 65536], None)
                           for s in range(0, len(profiles), 65536)])
    return bits.T.reshape((game.num_players,) + game.action_counts)


def pure_nash_equilibria(game: SatisfactionGame, cap: int = DEFAULT_ENUMERATION_CAP) -> list:
    """Pure NE of the natural game by best-response comparison on utilities."""
    u = utility_table(game, cap).astype(np.int8)
    ok = np.ones(game.action_counts, dtype=bool)
    for i in range(game.num_players):
        ok &= u[i] >= u[i].max(axis=i, keepdims=True)
    return [tuple(int(x) for x in a) for a in np.argwhere(ok)]


def enumerate_pure_equilibria(game: SatisfactionGame, cap: int = DEFAULT_ENUMERATION_CAP) -> PureEquilibria:
    require_deterministic(game, "enumerate_pure_equilibria")
    se, gse = [], []
    for a in iter_profiles(game.action_counts, cap):
        verdict = is_pure_gse(game, a)
        if verdict.is_gse:
            gse.append((a, verdict))
            if not verdict.unsatisfied_players:
                se.append(a)
    return PureEquilibria(se, gse, pure_nash_equilibria(game, cap))


# -- stochastic games --------------------------------------------------------

STOCHASTIC_RULES = ("deviation", "strict")


def stochastic_pure_gse(game: SatisfactionGame, a: Sequence[int], envs,
                        tol: float = TOL_EMPIRICAL,
                        rule: str = "deviation") -> tuple[GseVerdict, np.ndarray]:
    """Pure-GSE test for an environment-randomized game by Monte Carlo.

    ``envs`` is a batch of ``E`` environment samples; every action of every
    player is scored on the same samples.  A player whose own action satisfies
    it in at least ``1 - tol`` of them is satisfied.  Otherwise it counts as
    unsatisfied when

    * ``rule="deviation"``: no action raises its satisfaction frequency by
      more than ``tol`` over its own (it cannot improve unilaterally);
    * ``rule="strict"``: no action, its own included, satisfies it in more
      than ``tol`` of the samples.

    Both reduce to the exact pure-GSE test on deterministic games.  Returns
    the verdict and the per-player own-action satisfaction frequencies.
    """
    if rule not in STOCHASTIC_RULES:
        raise InvalidArgumentError(f"rule must be one of {STOCHASTIC_RULES}, got {rule!r}")
    a = check_profile(game, a)
    profile = np.asarray(a)
    E = len(envs)
    table = game.satisfaction_table(np.broadcast_to(profile, (E, game.num_players)), envs)
    freq = table.mean(axis=0)  # (N, A)
    own = freq[np.arange(game.num_players), profile]
    sat, unsat = set(), set()
    ok = True
    for i in range(game.num_players):
        best = freq[i].max()
        if own[i] >= 1 - tol:
            sat.add(i)
        elif (best - own[i] <= tol) if rule == "deviation" else (best <= tol):
            unsat.add(i)
        else:
            ok = False
    return GseVerdict(ok, frozenset(sat), frozenset(unsat)), own
