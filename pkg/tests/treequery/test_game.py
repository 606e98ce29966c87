"""
test_game.py

These tests play the Prover-Delayer game on complete AND-OR trees with the
published, random, exhaustive and scripted (human) policies.

Key Concepts:
- The leftmost Prover against the ladder Delayer scores exactly (n + 2) / 3.
- Conservation laws: under the ladder Delayer, score + P never changes; under
  the leftmost Prover, S drops by at least one on every defer.

Example usage:
    pytest tests/treequery/test_game.py
    pytest -m slow tests/treequery/test_game.py
"""

import io

import pytest

from treequery.andor import Decision, complete_tree, parse_andor, render, truth_table
from treequery.errors import AndOrError, GameError, SizeLimitError
from treequery.game import (
    ExhaustiveDelayer,
    ExhaustiveProver,
    GameView,
    HumanPolicy,
    LadderDelayer,
    LeftmostProver,
    RandomDelayer,
    RandomProver,
    play,
    sweep,
)
from treequery.helpers.policy_factory import PolicyFactory
from treequery.rank import game_value
from utils.logging import get_logger

logger = get_logger("TestGame")


@pytest.mark.parametrize("depth, expected", [(2, 2), (4, 6)])
def test_published_strategies_score(depth, expected):
    transcript = play(complete_tree(depth), LeftmostProver(), LadderDelayer())
    assert transcript.final_score == expected
    assert transcript.initial_p == expected
    assert transcript.result in (0, 1)
    assert transcript.rounds[-1].p == 0


def test_transcript_records_every_round():
    transcript = play(complete_tree(2), LeftmostProver(), LadderDelayer())
    first = transcript.rounds[0]
    assert (first.var, first.decision, first.bit, first.score) == (0, Decision.DEFER, 0, 1)
    assert (first.p_before, first.s_before) == (2, 2)
    doc = transcript.to_dict()
    assert doc["rounds"][0]["decision"] == "defer"
    assert doc["final_score"] == 2


def test_exhaustive_opponents_at_four_leaves():
    tree = complete_tree(2)
    # the ladder Delayer forces 2 against the best Prover
    assert play(tree, ExhaustiveProver(opponent=LadderDelayer()), LadderDelayer()).final_score >= 2
    # the leftmost Prover concedes at most 2 against the best Delayer
    assert play(tree, LeftmostProver(), ExhaustiveDelayer(opponent=LeftmostProver())).final_score <= 2
    # both sides searching: the game value
    assert play(tree, ExhaustiveProver(), ExhaustiveDelayer()).final_score == 2


def test_exhaustive_value_matches_game_dp():
    tree = parse_andor("OR(AND(x0,x1,x2),AND(x3,OR(x4,x5)))")
    assert ExhaustiveProver().value(tree) == game_value(truth_table(tree, 6))


def test_exhaustive_policy_size_cap():
    view = GameView(complete_tree(4), 0)
    with pytest.raises(SizeLimitError):
        ExhaustiveProver().choose_variable(view)


def test_game_needs_reduced_tree():
    tree = parse_andor("OR(OR(x0,x1),x2)")
    with pytest.raises(AndOrError):
        play(tree, LeftmostProver(), LadderDelayer())


def test_absent_variable_answered_zero_without_scoring():
    class StubbornProver(LeftmostProver):
        def __init__(self):
            self.asked = False

        def choose_variable(self, view):
            if not self.asked:
                self.asked = True
                return 42
            return super().choose_variable(view)

    transcript = play(complete_tree(2), StubbornProver(), LadderDelayer())
    first = transcript.rounds[0]
    assert (first.var, first.decision, first.score) == (42, Decision.ANSWER0, 0)
    assert transcript.final_score == 2


def test_max_rounds():
    with pytest.raises(GameError):
        play(complete_tree(2), LeftmostProver(), LadderDelayer(), max_rounds=1)


def test_random_games_are_seed_deterministic():
    a = play(complete_tree(4), RandomProver(), RandomDelayer(), seed=7)
    b = play(complete_tree(4), RandomProver(), RandomDelayer(), seed=7)
    assert a.to_dict() == b.to_dict()


def _check_conservation(transcript, ladder_delayer: bool, leftmost_prover: bool, bound: int):
    score = 0
    for r in transcript.rounds:
        if ladder_delayer:
            assert r.score + r.p == score + r.p_before
        if leftmost_prover and r.decision is Decision.DEFER:
            assert r.s <= r.s_before - 1
        score = r.score
    if ladder_delayer:
        assert transcript.final_score == bound
    if leftmost_prover:
        assert transcript.final_score <= bound


@pytest.mark.parametrize("depth", [2, 4])
def test_conservation_laws(depth):
    tree = complete_tree(depth)
    bound = ((1 << depth) + 2) // 3
    for seed in range(30):
        _check_conservation(play(tree, RandomProver(), LadderDelayer(), seed=seed), True, False, bound)
        _check_conservation(play(tree, LeftmostProver(), RandomDelayer(), seed=seed), False, True, bound)


def test_human_policy_reads_scripted_moves():
    # Prover side scripted; a bad line is re-prompted
    moves = io.StringIO("x0\nnonsense\n0\nq 2\nx3\n1\n")
    out = io.StringIO()
    human = HumanPolicy(stream_in=moves, stream_out=out, role="prover")
    transcript = play(complete_tree(2), human, LadderDelayer())
    assert transcript.final_score == 2
    text = out.getvalue()
    assert "unrecognised move 'nonsense'" in text
    assert "P=2" in text


def test_human_policy_runs_out_of_moves():
    human = HumanPolicy(stream_in=io.StringIO("x0\n"), stream_out=io.StringIO(), role="prover")
    with pytest.raises(GameError):
        play(complete_tree(2), human, LadderDelayer())


def test_policy_factory():
    assert isinstance(PolicyFactory.create("paper", "prover"), LeftmostProver)
    assert isinstance(PolicyFactory.create("Random", "delayer"), RandomDelayer)
    delayer = PolicyFactory.create("exhaustive", "delayer", opponent=LeftmostProver())
    assert isinstance(delayer, ExhaustiveDelayer)
    assert isinstance(delayer.opponent, LeftmostProver)
    with pytest.raises(ValueError):
        PolicyFactory.create("oracle", "prover")
    with pytest.raises(ValueError):
        PolicyFactory.create("paper", "referee")


def test_sweep_keeps_seed_order():
    tree = complete_tree(2)
    serial = sweep(tree, RandomProver, RandomDelayer, range(8))
    parallel = sweep(tree, RandomProver, RandomDelayer, range(8), jobs=4)
    assert [t.to_dict() for t in serial] == [t.to_dict() for t in parallel]
    logger.info(f"Sweep final scores: {[t.final_score for t in serial]} on {render(tree)}")


@pytest.mark.slow
def test_conservation_laws_at_scale():
    games = 0
    for depth in (2, 4, 6):
        tree = complete_tree(depth)
        bound = ((1 << depth) + 2) // 3
        for seed in range(200):
            _check_conservation(play(tree, RandomProver(), LadderDelayer(), seed=seed), True, False, bound)
            _check_conservation(play(tree, LeftmostProver(), RandomDelayer(), seed=seed), False, True, bound)
            games += 2
    assert games >= 1000
