"""Radio access technology (RAT) selection game.

Users pick a base station; a station splits its capacity equally among the
users attached to it.  A user is satisfied iff its share reaches the common
threshold.  The per-station "would I be satisfied here" signal is the
correspondence: ``f_u(a_{-u}) = {b : capacity_b / (load_{-u}(b) + 1) >= threshold}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..game import SatisfactionGame

# Mbps; tuned so thresholds 1.5/2.0/2.2/2.8 give the easy-SE, tight-SE,
# pure-GSE and no-pure-profile regimes with 100 users
DEFAULT_WIFI_CAPACITY = 20.0
DEFAULT_LTE_CAPACITY = 22.0


@dataclass(frozen=True)
class RatInstance:
    num_users: int = 100
    capacities: tuple = (DEFAULT_WIFI_CAPACITY,) * 5 + (DEFAULT_LTE_CAPACITY,) * 5
    kinds: tuple = ("wifi",) * 5 + ("lte",) * 5
    threshold: float = 1.5

    def __post_init__(self):
        if self.num_users < 2:
            raise InvalidArgumentError("need at least 2 users")
        if len(self.capacities) != len(self.kinds) or not self.capacities:
            raise InvalidArgumentError("capacities and kinds must be non-empty and aligned")
        if any(c <= 0 for c in self.capacities):
            raise InvalidArgumentError("capacities must be positive")
        if self.threshold <= 0:
            raise InvalidArgumentError("threshold must be positive")

    @property
    def num_bs(self) -> int:
        return len(self.capacities)

    @classmethod
    def make(cls, num_users=100, num_wifi=5, num_lte=5, wifi_capacity=DEFAULT_WIFI_CAPACITY,
             lte_capacity=DEFAULT_LTE_CAPACITY, threshold=1.5) -> "RatInstance":
        return cls(num_users, (float(wifi_capacity),) * num_wifi + (float(lte_capacity),) * num_lte,
                   ("wifi",) * num_wifi + ("lte",) * num_lte, float(threshold))


def _share(capacity, users):
    return capacity / users


def rat_throughput(instance: RatInstance, a) -> np.ndarray:
    """Equal-share throughput of every user."""
    a = np.asarray(a)
    caps = np.asarray(instance.capacities)
    load = np.bincount(a, minlength=instance.num_bs)
    return _share(caps[a], load[a])


class RatGame(SatisfactionGame):
    def __init__(self, instance: RatInstance):
        super().__init__([instance.num_bs] * instance.num_users)
        self.instance = instance
        self._caps = np.asarray(instance.capacities, dtype=float)

    def correspondence(self, i, a_minus_i, env=None):
        load = np.bincount(np.asarray(a_minus_i, dtype=int), minlength=self.instance.num_bs)
        ok = _share(self._caps, load + 1) >= self.instance.threshold
        return frozenset(int(b) for b in np.flatnonzero(ok))

    def satisfaction_table(self, profiles, envs=None):
        profiles = np.asarray(profiles)
        B, N = profiles.shape
        M = self.instance.num_bs
        onehot = profiles[..., None] == np.arange(M)
        load = onehot.sum(axis=1)
        # load seen by user u at b if it joins b: others there plus itself
        joined = load[:, None, :] - onehot + 1
        return _share(self._caps, joined) >= self.instance.threshold

    def fast_spec(self):
        return {"kind": 2, "capacities": self._caps, "threshold": float(self.instance.threshold)}

    def allocation_efficiency(self, profile, env=None):
        """Fraction of total capacity delivered to satisfied users."""
        thr = rat_throughput(self.instance, profile)
        return float(thr[thr >= self.instance.threshold].sum() / self._caps.sum())

    def describe(self):
        inst = self.instance
        return {"family": "rat", "users": inst.num_users, "capacities": list(inst.capacities),
                "threshold": inst.threshold}
