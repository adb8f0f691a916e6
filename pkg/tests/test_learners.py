import numpy as np
import pytest
from hypothesis import given, strategies as st

from satgame import FunctionGame
from satgame.engine import realization_stream, run_batch
from satgame.equilibrium import JointPmf, regret_report
from satgame.errors import ConfigError, DegenerateProbabilityError
from satgame.games import matching_game, random_table_game
from satgame.learners import (LearnerConfig, PlayHistory, RegretState, detect_convergence,
                              empirical_distribution, parse_algorithm, play, psel_step, rm_probs,
                              rm_step, rm_update_regrets, rmrl_probs, rmrl_step,
                              rmrl_update_regrets, sample_actions)

from .conftest import as_float
from .strategies import small_games


def _history(game, rounds):
    h = PlayHistory(game.num_players)
    for a in rounds:
        out = [a[i] in game.correspondence(i, a[:i] + a[i + 1:]) for i in range(len(a))]
        h.record(a, None, out)
    return h


def _state_with_regrets(rows, last=0):
    """RegretState for one player whose regret row at ``last`` is ``rows`` at t = 1."""
    A = len(rows)
    s = RegretState(np.zeros((2, A, A)), np.zeros((2, A, A)), np.zeros((2, A)),
                    np.zeros((2, A), dtype=np.int64), t=1)
    s.cum[0, last] = rows
    return s


def test_reinforced_psel(derived):
    game = FunctionGame((3, 2), lambda i, o: set() if i == 0 else {0})
    h = _history(game, [(1, 0), (1, 0), (1, 0), (2, 0)])
    p = psel_step(game, h, "reinforced")
    assert p[0] == pytest.approx(as_float(derived["learners"]["reinforced_0_3_1"]), abs=1e-12)
    # the satisfied player repeats
    assert p[1].tolist() == [1.0, 0.0, 0.0]
    assert psel_step(game, h, "uniform")[0] == pytest.approx([1 / 3] * 3)


def test_rm_regret_plus_one_case():
    s = rm_update_regrets(matching_game(), _history(matching_game(), [(0, 1)]))
    assert s.regrets[0, 0, 1] == 1.0


def test_rm_regret_two_rounds(derived):
    s = rm_update_regrets(matching_game(), _history(matching_game(), [(0, 1), (0, 0)]))
    assert s.regrets[0, 0, 1] == pytest.approx(as_float(derived["learners"]["rm_t2_R01"]), abs=1e-12)
    # action 1 was never played by player 0
    assert np.all(s.regrets[0, 1] == 0)


def test_rm_step_examples(derived):
    d = derived["learners"]
    p = rm_step(_state_with_regrets([0.0, 0.5, -0.2]), (0, 0), 4.0)
    assert p[0] == pytest.approx(as_float(d["rm_step_example"]), abs=1e-12)
    p = rm_step(_state_with_regrets([0.0, 1.0, 1.0, 1.0]), (0, 0), 4.0)
    assert p[0] == pytest.approx(as_float(d["rm_equal_regrets_m4_r1"]), abs=1e-12)
    p = rm_step(_state_with_regrets([0.0, -0.3, 0.0]), (0, 0), 4.0)
    assert p[0].tolist() == [1.0, 0.0, 0.0]


def test_mu_bound():
    with pytest.raises(ConfigError):
        rm_step(_state_with_regrets([0.0, 1.0, 1.0]), (0, 0), 2.0)
    with pytest.raises(ConfigError):
        LearnerConfig("rm", mu=1.0).resolved_mu(matching_game())
    assert LearnerConfig("rm").resolved_mu(matching_game()) == 4.0


def test_rmrl_one_round(derived):
    game = FunctionGame((3, 3), lambda i, o: {0, 1, 2})
    h = PlayHistory(2)
    h.record((1, 0), None, (True, True), [[0.25, 0.5, 0.25], [1 / 3] * 3])
    s = rmrl_update_regrets(game, h)
    assert s.estimated_regrets[0, 0, 1] == pytest.approx(as_float(derived["learners"]["rmrl_t1"]),
                                                         abs=1e-12)
    # actions 0 and 2 of player 1 were never played, and neither was 2 of player 0
    assert s.estimated_regrets[1, 1, 2] == 0


def test_rmrl_degenerate_probability():
    game = matching_game()
    h = PlayHistory(2)
    h.record((1, 0), None, (False, False), [[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(DegenerateProbabilityError):
        rmrl_update_regrets(game, h)
    h = PlayHistory(2)
    h.record((1, 0), None, (False, False))
    with pytest.raises(DegenerateProbabilityError):
        rmrl_update_regrets(game, h)


def test_tremble_examples(derived):
    d = derived["learners"]
    s = RegretState.empty(matching_game())
    s.t = 1
    assert rmrl_step(s, (0, 0), 4.0, 0.2)[0] == pytest.approx(as_float(d["rmrl_tremble_0_2"]), abs=1e-12)
    game = FunctionGame((4, 4), lambda i, o: set())
    s = RegretState.empty(game)
    s.t = 1
    assert rmrl_step(s, (0, 0), 8.0, 0.1)[0] == pytest.approx(as_float(d["rmrl_tremble_0_1_four"]),
                                                               abs=1e-12)
    with pytest.raises(ConfigError):
        rmrl_step(s, (0, 0), 8.0, 1.0)


def test_empirical_distribution():
    assert empirical_distribution([(0, 0)]).support == {(0, 0): 1.0}
    assert empirical_distribution([(0, 0), (1, 1)]).support == {(0, 0): 0.5, (1, 1): 0.5}
    assert empirical_distribution([(1, 0)] * 7).support == {(1, 0): 1.0}
    with pytest.raises(ConfigError):
        empirical_distribution([])


def test_detect_convergence():
    s = detect_convergence([(0, 1)] * 20 + [(1, 1)] * 100)
    assert s.converged and s.profile == (1, 1) and s.since == 20
    assert not detect_convergence([(0, 0), (1, 1)] * 100).converged
    s = detect_convergence([(0, 0)] * 50)
    assert not s.converged and s.insufficient
    with pytest.raises(ConfigError):
        detect_convergence([(0, 0)] * 5, window=1)


def test_algorithm_labels():
    assert parse_algorithm("psra_10") == ("sra", 10)
    assert parse_algorithm("rmrl") == ("rmrl", 1)
    with pytest.raises(ConfigError):
        parse_algorithm("gradient")
    with pytest.raises(ConfigError):
        LearnerConfig("rm", tremble=1.0)


# ------------------------------------------------------------- properties

# RMRL estimates are importance weighted and can exceed 1
regret_rows = st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=5)


@given(regret_rows, st.integers(0, 4), st.floats(0, 0.99))
def test_play_rules_emit_pmfs(rows, last, delta):
    A = len(rows)
    last = last % A
    mask = np.ones((1, A), dtype=bool)
    mu = 2.0 * A
    r = np.array(rows)[None, None]
    l = np.array([[last]])
    for p in (rm_probs(r, l, mu, mask), rmrl_probs(r, l, mu, delta, mask)):
        assert np.all(p >= 0)
        assert abs(p.sum() - 1) <= 1e-12
    assert np.array_equal(rmrl_probs(r, l, mu, 0.0, mask), rm_probs(r, l, mu, mask))


def _scratch(game, h):
    """Direct evaluation of both regret sums over a stored history."""
    N, A = game.num_players, game.max_actions
    rm = np.zeros((N, A, A))
    rl = np.zeros((N, A, A))
    for a, out, p in zip(h.actions, h.outcomes, h.probs):
        for i in range(N):
            f = game.correspondence(i, a[:i] + a[i + 1:])
            for x in range(game.action_counts[i]):
                for y in range(game.action_counts[i]):
                    if a[i] == x:
                        rm[i, x, y] += (y in f) - (x in f)
                        rl[i, x, y] -= out[i]
                    if a[i] == y:
                        rl[i, x, y] += out[i] * p[i][x] / p[i][y]
    return rm / h.t, rl / h.t


@given(small_games(max_actions=3), st.integers(1, 300), st.integers(0, 2**16))
def test_incremental_matches_scratch(game, T, seed):
    h, rl_state = play(game, LearnerConfig("rmrl", tremble=0.2), T, np.random.default_rng(seed))
    rm_state = rm_update_regrets(game, h)
    rm, rl = _scratch(game, h)
    est = rl_state.estimated_regrets
    for i, c in enumerate(game.action_counts):
        assert np.max(np.abs(rm_state.regrets[i, :c, :c] - rm[i, :c, :c])) <= 1e-12
        assert np.max(np.abs(est[i, :c, :c] - rl[i, :c, :c])) <= 1e-12
    assert rm_state.play_counts.sum(axis=1).tolist() == [h.t] * game.num_players
    assert h.t == T == len(h.outcomes)


@given(small_games(max_actions=3), st.integers(2, 200), st.integers(0, 2**16))
def test_summands_and_consistency(game, T, seed):
    h, _ = play(game, LearnerConfig("psel_uniform"), T, np.random.default_rng(seed))
    state = RegretState.empty(game)
    prev = state.cum.copy()
    for n in range(1, T + 1):
        sub = PlayHistory(game.num_players, h.actions[:n], h.envs[:n], h.outcomes[:n], h.probs[:n])
        rm_update_regrets(game, sub, state)
        step = state.cum - prev
        assert set(np.unique(step)) <= {-1.0, 0.0, 1.0}
        prev = state.cum.copy()
    for a, out in zip(h.actions, h.outcomes):
        assert list(out) == [a[i] in game.correspondence(i, a[:i] + a[i + 1:])
                             for i in range(game.num_players)]


@given(st.data())
def test_sampling_never_hits_zero_mass(data):
    A = data.draw(st.integers(2, 5))
    w = data.draw(st.lists(st.sampled_from([0.0, 0.1, 0.5, 1.0]), min_size=A, max_size=A))
    if sum(w) == 0:
        w[0] = 1.0
    p = np.array(w) / sum(w)
    u = data.draw(st.floats(0, 1, exclude_max=True))
    x = sample_actions(p[None, None], np.array([[u]]))[0, 0]
    assert p[x] > 0


def test_rm_regret_shrinks():
    """RM's empirical max positive regret at t = 5000 is at most its value at t = 100."""
    ok = total = 0
    for g in range(8):
        game = random_table_game(np.random.default_rng(g), (3, 3, 2), density=0.4)
        streams = [realization_stream(g, r) for r in range(5)]
        res = run_batch(game, LearnerConfig("rm"), 5000, streams, record_trajectory=True)
        acts = res.trajectory["actions"]
        for b in range(len(streams)):
            early = regret_report(game, empirical_distribution(acts[:100, b])).max_positive_regret
            late = regret_report(game, empirical_distribution(acts[:, b])).max_positive_regret
            ok += late <= early + 1e-12
            total += 1
    assert ok >= 0.95 * total
