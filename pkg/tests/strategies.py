"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from satgame.games import TableGame


@st.composite
def small_games(draw, max_players=3, max_actions=4):
    n = draw(st.integers(2, max_players))
    counts = tuple(draw(st.lists(st.integers(2, max_actions), min_size=n, max_size=n)))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from([0.2, 0.5, 0.8]))
    rng = np.random.default_rng(seed)
    return TableGame([rng.random(counts) < density for _ in counts], name="random")


@st.composite
def pmfs_for(draw, counts, max_support=6):
    profiles = st.tuples(*[st.integers(0, c - 1) for c in counts])
    support = draw(st.lists(profiles, min_size=1, max_size=max_support, unique=True))
    weights = draw(st.lists(st.integers(1, 20), min_size=len(support), max_size=len(support)))
    total = sum(weights)
    return {a: w / total for a, w in zip(support, weights)}
