"""Satisfactory dating game: two groups pick partners, no numeric utility.

Players ``0..n-1`` are the alphas, ``n..2n-1`` the betas.  Alpha ``i``'s
action ``k`` selects beta ``k``; beta ``j``'s action ``i`` selects alpha
``i``.  Alpha ``i`` is satisfiable by beta ``k`` when ``k`` is acceptable to
``i``, ``k`` selected ``i``, and no other alpha selected ``k``; betas are
symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidArgumentError
from ..game import SatisfactionGame


@dataclass(frozen=True)
class DatingInstance:
    n: int
    alpha_accepts: tuple  # alpha_accepts[i] = betas acceptable to alpha i
    beta_accepts: tuple   # beta_accepts[j] = alphas acceptable to beta j

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError("group size must be positive")
        for sets in (self.alpha_accepts, self.beta_accepts):
            if len(sets) != self.n or any(not set(s) <= set(range(self.n)) for s in sets):
                raise InvalidArgumentError("acceptability sets must index the other group")
        object.__setattr__(self, "alpha_accepts", tuple(frozenset(s) for s in self.alpha_accepts))
        object.__setattr__(self, "beta_accepts", tuple(frozenset(s) for s in self.beta_accepts))


def dating_satisfying_sets(instance: DatingInstance, profile) -> list[frozenset]:
    """Satisfying set of every player; ``profile = (n_1..n_N, m_1..m_N)``."""
    n = instance.n
    if len(profile) != 2 * n or any(not 0 <= int(x) < n for x in profile):
        raise InvalidArgumentError(f"profile must hold {2 * n} choices in [0, {n})")
    picks_a = [int(x) for x in profile[:n]]
    picks_b = [int(x) for x in profile[n:]]
    out = []
    for i in range(n):
        taken = {picks_a[j] for j in range(n) if j != i}
        out.append(frozenset(k for k in instance.alpha_accepts[i] if picks_b[k] == i) - taken)
    for j in range(n):
        taken = {picks_b[k] for k in range(n) if k != j}
        out.append(frozenset(i for i in instance.beta_accepts[j] if picks_a[i] == j) - taken)
    return out


class DatingGame(SatisfactionGame):
    def __init__(self, instance: DatingInstance):
        super().__init__([instance.n] * (2 * instance.n))
        self.instance = instance

    def correspondence(self, i, a_minus_i, env=None):
        # the player's own entry never enters its own set; any placeholder works
        profile = list(a_minus_i[:i]) + [0] + list(a_minus_i[i:])
        return dating_satisfying_sets(self.instance, profile)[i]

    def describe(self):
        return {"family": "dating", "n": self.instance.n}
