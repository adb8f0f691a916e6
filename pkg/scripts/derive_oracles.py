"""Compute the hand-derived reference values used by the test suite.

Everything here is written from the definitions with exact rational
arithmetic and does not import ``satgame``.  The output is frozen into
``tests/data/derived.json``; rerun after changing a definition:

    python scripts/derive_oracles.py
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction as F
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "derived.json"

# --- fixture correspondences: f(i, a) -> set, a is the full profile --------


def matching(i, a):
    return {a[1 - i]}


def mismatch(i, a):
    return {a[1]} if i == 0 else {1 - a[0]}


def never(i, a):
    return {a[1]} if i == 0 else set()


def clipping(i, a):
    return {0, 1} if i == 0 else {a[0]}


FIXTURES = {"matching": matching, "mismatch": mismatch, "never": never, "clipping": clipping}
PROFILES = list(itertools.product(range(2), repeat=2))


def sat(f, i, a):
    return a[i] in f(i, a)


def dev(a, i, x):
    b = list(a)
    b[i] = x
    return tuple(b)


def prob_sat(f, pmf, i):
    return sum(p for a, p in pmf.items() if sat(f, i, a))


def cond_regret(f, pmf, i, x, y):
    mass = sum(p for a, p in pmf.items() if a[i] == x)
    gain = sum(p * (int(sat(f, i, dev(a, i, y))) - int(sat(f, i, a)))
               for a, p in pmf.items() if a[i] == x)
    return gain / mass


def ce_max_regret(f, pmf):
    best = F(0)
    for i in range(2):
        for x in range(2):
            if sum(p for a, p in pmf.items() if a[i] == x) == 0:
                continue
            for y in range(2):
                best = max(best, cond_regret(f, pmf, i, x, y))
    return best


def hannan(f, pmf, i, x):
    return sum(p * (int(sat(f, i, dev(a, i, x))) - int(sat(f, i, a))) for a, p in pmf.items())


def pure_lists(f):
    se = [a for a in PROFILES if all(sat(f, i, a) for i in range(2))]
    gse = [a for a in PROFILES
           if all(sat(f, i, a) or not f(i, a) for i in range(2))]
    ne = [a for a in PROFILES
          if all(int(sat(f, i, a)) >= max(int(sat(f, i, dev(a, i, y))) for y in range(2))
                 for i in range(2))]
    return se, gse, ne


def clipping_sets(f):
    return [sorted(x for x in range(2) if all(x in f(i, dev(a, i, x)) for a in PROFILES))
            for i in range(2)]


# --- resource allocation --------------------------------------------------


def allocate(caps, demands, a, order):
    used = [F(0)] * len(caps)
    out = [F(0)] * len(demands)
    for i in order:
        j = a[i]
        got = min(F(demands[i]), F(caps[j]) - used[j])
        out[i] = max(got, F(0))
        used[j] += out[i]
    return out


def resource_satisfying_set(caps, demands, a, order, i):
    """Actions x such that agent i would get its full demand at x."""
    out = []
    for x in range(len(caps)):
        b = list(a)
        b[i] = x
        alloc = allocate(caps, demands, b, order)
        if alloc[i] == demands[i]:
            out.append(x)
    return out


# --- dating game, written from the printed set expressions ----------------


def dating_sets(n, B, A, nn, mm):
    """Players alpha_i choose beta nn[i]; beta_j chooses alpha mm[j] (0-based)."""
    f1 = []
    for i in range(n):
        s = {k for k in B[i] if mm[k] == i}
        s -= {nn[j] for j in range(n) if j != i}
        f1.append(sorted(s))
    f2 = []
    for j in range(n):
        s = {i for i in A[j] if nn[i] == j}
        s -= {mm[k] for k in range(n) if k != j}
        f2.append(sorted(s))
    return f1, f2


# --- learners --------------------------------------------------------------


def reinforced_weights(fails):
    w = [F(1, 1 + d) for d in fails]
    s = sum(w)
    return [x / s for x in w]


def rm_pmf(regrets_row, last, mu):
    p = [max(F(r), F(0)) / mu if k != last else F(0) for k, r in enumerate(regrets_row)]
    p[last] = 1 - sum(p)
    return p


def tremble(p, delta):
    m = len(p)
    return [(1 - delta) * x + delta * F(1, m) for x in p]


def frac(x):
    return [str(v) for v in x] if isinstance(x, list) else str(x)


def main():
    half = {(0, 0): F(1, 2), (1, 1): F(1, 2)}
    uniform = {a: F(1, 4) for a in PROFILES}
    point01 = {(0, 1): F(1)}
    never_mix = {(0, 0): F(1, 2), (1, 1): F(1, 2)}
    d = {}

    d["game_core"] = {
        "resource_two_agents_second_served": resource_satisfying_set([5], [3, 3], (0, 0), (0, 1), 1),
        "clipping_matching": clipping_sets(matching),
        "clipping_never": clipping_sets(never),
        "clipping_universal": clipping_sets(clipping),
        "partition_matching_01": [sat(matching, i, (0, 1)) for i in range(2)],
        "partition_never_00": [sat(never, i, (0, 0)) for i in range(2)],
    }
    lists = {name: [sorted(map(list, x)) for x in pure_lists(f)] for name, f in FIXTURES.items()}
    d["equilibrium"] = {
        "prob_sat_matching_half": frac(prob_sat(matching, half, 0)),
        "prob_sat_matching_uniform": frac(prob_sat(matching, uniform, 0)),
        "cond_regret_matching_uniform_0_1": frac(cond_regret(matching, uniform, 0, 0, 1)),
        "cond_regret_matching_point01_0_1": frac(cond_regret(matching, point01, 0, 0, 1)),
        "ce_max_regret_matching_half": frac(ce_max_regret(matching, half)),
        "ce_max_regret_matching_point01": frac(ce_max_regret(matching, point01)),
        "ce_max_regret_matching_uniform": frac(ce_max_regret(matching, uniform)),
        "mismatch_00_is_gse": (0, 0) in pure_lists(mismatch)[1],
        "prob_sat_matching_half_all": [frac(prob_sat(matching, half, i)) for i in range(2)],
        "prob_sat_matching_uniform_all": [frac(prob_sat(matching, uniform, i)) for i in range(2)],
        "prob_sat_never_mix_all": [frac(prob_sat(never, never_mix, i)) for i in range(2)],
        "hannan_matching_uniform": [[frac(hannan(matching, uniform, i, x)) for x in range(2)]
                                    for i in range(2)],
        "hannan_matching_point01_p0_a1": frac(hannan(matching, point01, 0, 1)),
        "hannan_max_matching_point01": frac(max(hannan(matching, point01, i, x)
                                                for i in range(2) for x in range(2))),
        "hannan_max_matching_half": frac(max(hannan(matching, half, i, x)
                                             for i in range(2) for x in range(2))),
        "pure_lists": lists,
    }

    # RM regret, t = 2: round 1 played 0 unsatisfied with 1 satisfying; round 2
    # played 0 satisfied with 1 not satisfying
    r01 = (F(1 - 0) + F(0 - 1)) / 2
    # RMRL, t = 1: played a' = 1 with u = 1, P(a) = 1/4, P(a') = 1/2
    rl = (F(1) * F(1, 4) / F(1, 2) - 0) / 1
    # RMRL estimator target on the matching game under independent mixing
    # p = (P(a1 = 0), P(a2 = 0)); player 1, a = 0, a' = 1
    p1, p2 = F(3, 10), F(3, 5)
    target = p1 * ((1 - p2) - p2)
    d["learners"] = {
        "reinforced_0_3_1": frac(reinforced_weights([0, 3, 1])),
        "rm_t2_R01": frac(r01),
        "rm_step_example": frac(rm_pmf([0, F(1, 2), F(-1, 5)], 0, 4)),
        "rm_equal_regrets_m4_r1": frac(rm_pmf([0, 1, 1, 1], 0, 4)),
        "rmrl_t1": frac(rl),
        "rmrl_tremble_0_2": frac(tremble([F(1), F(0)], F(1, 5))),
        "rmrl_tremble_0_1_four": frac(tremble([F(1), F(0), F(0), F(0)], F(1, 10))),
        "rmrl_target_matching": {"p1_play0": str(p1), "p2_play0": str(p2), "target": str(target)},
    }

    rat_caps = [25] * 5 + [35] * 5
    d["games"] = {
        "allocate_C5_G33_order12": frac(allocate([5], [3, 3], (0, 0), (0, 1))),
        "allocate_single_ample": frac(allocate([10], [3], (0,), (0,))),
        "oversized_agent_sets": [resource_satisfying_set([2, 4], [5, 1], a, order, 0)
                                 for a in itertools.product(range(2), repeat=2)
                                 for order in itertools.permutations(range(2))],
        "rat_share_30_10": frac(F(30, 10)),
        "rat_min_share_even_spread": frac(min(F(c, 10) for c in rat_caps)),
        "rat_unsat_at_2_8": sum(10 for c in rat_caps if F(c, 10) < F(28, 10)),
        "dating_sep": dating_sets(2, [[0], [1]], [[0], [1]], [0, 1], [0, 1]),
        "dating_collide": dating_sets(2, [[0], [1]], [[0], [1]], [0, 0], [0, 1]),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(d, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
