"""Resource allocation game with random serving order.

``N`` agents each pick one of ``M`` resources.  Agents at a resource are
served in the order of a uniformly random permutation; each gets
``min(demand, remaining)`` (``service="partial"``) or its full demand only if
it fits (``service="all_or_nothing"``).  An agent is satisfied iff it
receives its full demand.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidArgumentError, ParseError
from ..game import SatisfactionGame

SERVICE_MODES = ("partial", "all_or_nothing")


@dataclass(frozen=True)
class ResourceInstance:
    demands: tuple
    capacities: tuple

    def __post_init__(self):
        if len(self.demands) < 1 or len(self.capacities) < 1:
            raise InvalidArgumentError("need at least one agent and one resource")
        if any(g <= 0 for g in self.demands):
            raise InvalidArgumentError("demands must be positive")
        if any(c < 0 for c in self.capacities):
            raise InvalidArgumentError("capacities must be non-negative")

    @property
    def num_agents(self) -> int:
        return len(self.demands)

    @property
    def num_resources(self) -> int:
        return len(self.capacities)

    @property
    def avg_demand(self) -> float:
        return float(np.mean(self.demands))

    @property
    def avg_capacity(self) -> float:
        return float(np.mean(self.capacities))


def make_resource_instance(seed: int, num_agents: int = 20, num_resources: int = 10,
                           demand_range=(1.0, 5.0), capacity_range=(0.0, 10.0),
                           capacity_window=None, demand_window=None,
                           max_draws: int = 1_000_000) -> ResourceInstance:
    """Draw uniform demands and capacities.

    With windows given, draws repeat (same stream) until the realized average
    capacity and demand fall inside them.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        demands = rng.uniform(*demand_range, size=num_agents)
        capacities = rng.uniform(*capacity_range, size=num_resources)
        if capacity_window and not capacity_window[0] <= capacities.mean() <= capacity_window[1]:
            continue
        if demand_window and not demand_window[0] <= demands.mean() <= demand_window[1]:
            continue
        return ResourceInstance(tuple(float(g) for g in demands), tuple(float(c) for c in capacities))
    raise InvalidArgumentError(f"no instance inside the windows after {max_draws} draws")


def resource_allocate(instance: ResourceInstance, a, order, service: str = "partial") -> np.ndarray:
    """Allocation per agent for joint action ``a`` and serving ``order``.

    ``order[0]`` is served first.
    """
    demands = instance.demands
    consumed = [0.0] * instance.num_resources
    alloc = np.zeros(instance.num_agents)
    for i in order:
        i = int(i)
        j = int(a[i])
        remaining = instance.capacities[j] - consumed[j]
        if remaining >= demands[i]:
            alloc[i] = demands[i]
        elif service == "partial":
            alloc[i] = max(remaining, 0.0)
        else:
            alloc[i] = 0.0
        consumed[j] += alloc[i]
    return alloc


class ResourceGame(SatisfactionGame):
    is_deterministic = False

    def __init__(self, instance: ResourceInstance, service: str = "partial"):
        if service not in SERVICE_MODES:
            raise InvalidArgumentError(f"service must be one of {SERVICE_MODES}, got {service!r}")
        super().__init__([instance.num_resources] * instance.num_agents)
        self.instance = instance
        self.service = service
        self.env_size = instance.num_agents
        self._demands = np.asarray(instance.demands)
        self._capacities = np.asarray(instance.capacities)

    def make_env(self, uniforms):
        # argsort of iid uniforms is a uniform permutation
        return np.argsort(np.asarray(uniforms), axis=-1, kind="stable")

    def correspondence(self, i, a_minus_i, env=None):
        if env is None:
            raise InvalidArgumentError("resource game needs a serving order")
        a = list(a_minus_i[:i]) + [-1] + list(a_minus_i[i:])
        g = self.instance.demands
        caps = self.instance.capacities
        consumed = [0.0] * len(caps)
        full = self.service == "partial"
        for k in env:
            k = int(k)
            if k == i:
                break
            j = a[k]
            remaining = caps[j] - consumed[j]
            if remaining >= g[k]:
                consumed[j] += g[k]
            elif full:
                consumed[j] += max(remaining, 0.0)
        return frozenset(j for j in range(len(caps)) if caps[j] - consumed[j] >= g[i])

    def satisfaction_table(self, profiles, envs=None):
        profiles = np.asarray(profiles)
        order = np.asarray(envs)
        B, N = profiles.shape
        M = self.instance.num_resources
        a_sorted = np.take_along_axis(profiles, order, axis=1)
        g_sorted = self._demands[order]
        onehot = a_sorted[..., None] == np.arange(M)
        if self.service == "partial":
            # agents before position r at resource j consumed min(C_j, prefix);
            # position r is satisfied at j iff C_j - prefix >= demand
            w = np.where(onehot, g_sorted[..., None], 0.0)
            prefix = np.zeros_like(w)
            np.cumsum(w[:, :-1], axis=1, out=prefix[:, 1:])
            sat_sorted = self._capacities - prefix >= g_sorted[..., None]
        else:
            consumed = np.zeros((B, M))
            sat_sorted = np.empty((B, N, M), dtype=bool)
            rows = np.arange(B)
            for r in range(N):
                fits = self._capacities - consumed >= g_sorted[:, r, None]
                sat_sorted[:, r] = fits
                j = a_sorted[:, r]
                got = fits[rows, j]
                consumed[rows[got], j[got]] += g_sorted[got, r]
        out = np.empty_like(sat_sorted)
        np.put_along_axis(out, order[..., None], sat_sorted, axis=1)
        return out

    def fast_spec(self):
        return {"kind": 1, "demands": self._demands, "capacities": self._capacities,
                "all_or_nothing": self.service == "all_or_nothing"}

    def allocation_efficiency(self, profile, env=None):
        """Units delivered over ``min(total capacity, total demand)``."""
        alloc = resource_allocate(self.instance, profile, env, self.service)
        denom = min(sum(self.instance.capacities), sum(self.instance.demands))
        return float(alloc.sum() / denom) if denom > 0 else 1.0

    def describe(self):
        inst = self.instance
        return {"family": "resource", "agents": inst.num_agents, "resources": inst.num_resources,
                "service": self.service, "avg_capacity": inst.avg_capacity,
                "avg_demand": inst.avg_demand}


def write_instance(instance: ResourceInstance, path) -> None:
    cp = configparser.ConfigParser()
    cp["resource"] = {
        "demands": ", ".join(repr(g) for g in instance.demands),
        "capacities": ", ".join(repr(c) for c in instance.capacities),
    }
    with open(path, "w") as fh:
        fh.write("# resource allocation instance: demands per agent, capacities per resource\n")
        cp.write(fh)


def read_instance(path) -> ResourceInstance:
    path = Path(path)
    cp = configparser.ConfigParser()
    try:
        cp.read_string(path.read_text(), source=str(path))
        sec = cp["resource"]
        demands = tuple(float(x) for x in sec["demands"].split(","))
        capacities = tuple(float(x) for x in sec["capacities"].split(","))
    except (configparser.Error, KeyError, ValueError) as exc:
        raise ParseError(f"bad resource instance: {exc}", path=path) from exc
    return ResourceInstance(demands, capacities)
