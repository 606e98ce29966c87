"""
game.py

This module runs the Prover-Delayer game on AND-OR trees.

Key Concepts:
- Round: the Prover names a variable, the Delayer answers 0, answers 1 or
  defers. On a defer the Delayer scores a point and the Prover picks the bit.
  The tree is then updated and contracted.
- Policies: objects deciding moves for one side. Policies of kind "paper" follow the
  published strategies, random policies draw from the game's seeded
  generator, exhaustive policies search the game tree of small trees, and
  human policies read moves from a stream.
- Transcript: every round with the score and both progress measures before
  and after it.

Example usage:
    tree = complete_tree(2)
    transcript = play(tree, LeftmostProver(), LadderDelayer(), seed=0)
    print(transcript.final_score)  # Output: 2
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Protocol, TextIO

import numpy as np

from treequery.andor import (
    AndOrTree,
    Decision,
    contract,
    delayer_move,
    is_reduced,
    leaf_ids,
    measures,
    prover_move,
    render,
    update,
)
from treequery.errors import AndOrError, GameError, SizeLimitError
from treequery.helpers.moves import parse_bit, parse_decision, parse_variable
from treequery.settings import MAX_EXHAUSTIVE_LEAVES
from utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class GameView:
    """What a policy sees when asked for a move."""

    tree: AndOrTree
    score: int
    rng: np.random.Generator | None = None


class ProverPolicy(Protocol):
    def choose_variable(self, view: GameView) -> int: ...

    def choose_bit(self, view: GameView, var: int) -> int: ...


class DelayerPolicy(Protocol):
    def respond(self, view: GameView, var: int) -> Decision: ...


@dataclass(frozen=True)
class Round:
    var: int
    decision: Decision
    bit: int
    score: int
    p: int
    s: int
    p_before: int
    s_before: int


@dataclass
class GameTranscript:
    """
    Round-by-round record of one game.

    Attributes:
        rounds (list[Round]): Rounds in play order.
        final_score (int): Number of defers.
        initial_p (int): P of the starting tree.
        initial_s (int): S of the starting tree.
        result (int | None): Constant computed by the final empty tree.
    """

    rounds: list[Round] = field(default_factory=list)
    final_score: int = 0
    initial_p: int = 0
    initial_s: int = 0
    result: int | None = None

    def to_dict(self) -> dict:
        doc = asdict(self)
        for entry in doc["rounds"]:
            entry["decision"] = entry["decision"].value
        return doc


def next_tree(tree: AndOrTree, var: int, bit: int) -> AndOrTree:
    return contract(update(tree, var, bit))


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


class LeftmostProver:
    """Queries the leftmost leaf; picks 0 whenever the Delayer defers."""

    def choose_variable(self, view: GameView) -> int:
        return prover_move(view.tree)

    def choose_bit(self, view: GameView, var: int) -> int:
        return 0


class LadderDelayer:
    def respond(self, view: GameView, var: int) -> Decision:
        return delayer_move(view.tree, var)


class RandomProver:
    """Queries a uniformly chosen present leaf and picks uniform bits."""

    def choose_variable(self, view: GameView) -> int:
        present = list(leaf_ids(view.tree))
        return present[int(view.rng.integers(len(present)))]

    def choose_bit(self, view: GameView, var: int) -> int:
        return int(view.rng.integers(2))


class RandomDelayer:
    CHOICES = (Decision.ANSWER0, Decision.ANSWER1, Decision.DEFER)

    def respond(self, view: GameView, var: int) -> Decision:
        return self.CHOICES[int(view.rng.integers(len(self.CHOICES)))]


def _check_small(tree: AndOrTree, max_leaves: int) -> None:
    leaves = len(leaf_ids(tree))
    if leaves > max_leaves:
        raise SizeLimitError(f"exhaustive policy allows {max_leaves} leaves, tree has {leaves}")


class ExhaustiveProver:
    """
    Minimizes the final score by searching the game tree.

    Against a given deterministic Delayer the search follows that Delayer's replies; without
    one it assumes the worst reply every round (the game value).
    """

    def __init__(self, opponent: DelayerPolicy | None = None, max_leaves: int = MAX_EXHAUSTIVE_LEAVES):
        self.opponent = opponent
        self.max_leaves = max_leaves
        self._memo: dict[AndOrTree, int] = {}

    def _outcome(self, tree: AndOrTree, var: int) -> int:
        v0 = self.value(next_tree(tree, var, 0))
        v1 = self.value(next_tree(tree, var, 1))
        if self.opponent is None:
            return max(v0, v1, 1 + min(v0, v1))
        decision = self.opponent.respond(GameView(tree, 0), var)
        if decision is Decision.DEFER:
            return 1 + min(v0, v1)
        return v0 if decision.bit == 0 else v1

    def value(self, tree: AndOrTree) -> int:
        if tree.is_empty:
            return 0
        if tree not in self._memo:
            self._memo[tree] = min(self._outcome(tree, var) for var in leaf_ids(tree))
        return self._memo[tree]

    def choose_variable(self, view: GameView) -> int:
        _check_small(view.tree, self.max_leaves)
        return min(leaf_ids(view.tree), key=lambda var: self._outcome(view.tree, var))

    def choose_bit(self, view: GameView, var: int) -> int:
        return min((0, 1), key=lambda bit: self.value(next_tree(view.tree, var, bit)))


class ExhaustiveDelayer:
    """
    Maximizes the final score by searching the game tree, against a given deterministic Prover
    or, without one, against a Prover that plays optimally.
    """

    ORDER = (Decision.ANSWER0, Decision.ANSWER1, Decision.DEFER)

    def __init__(self, opponent: ProverPolicy | None = None, max_leaves: int = MAX_EXHAUSTIVE_LEAVES):
        self.opponent = opponent
        self.max_leaves = max_leaves
        self._memo: dict[AndOrTree, int] = {}

    def _options(self, tree: AndOrTree, var: int) -> dict[Decision, int]:
        v0 = self.value(next_tree(tree, var, 0))
        v1 = self.value(next_tree(tree, var, 1))
        if self.opponent is None:
            defer = 1 + min(v0, v1)
        else:
            bit = self.opponent.choose_bit(GameView(tree, 0), var)
            defer = 1 + (v1 if bit else v0)
        return {Decision.ANSWER0: v0, Decision.ANSWER1: v1, Decision.DEFER: defer}

    def value(self, tree: AndOrTree) -> int:
        if tree.is_empty:
            return 0
        if tree not in self._memo:
            if self.opponent is None:
                candidates = leaf_ids(tree)
            else:
                candidates = [self.opponent.choose_variable(GameView(tree, 0))]
            self._memo[tree] = min(max(self._options(tree, var).values()) for var in candidates)
        return self._memo[tree]

    def respond(self, view: GameView, var: int) -> Decision:
        _check_small(view.tree, self.max_leaves)
        options = self._options(view.tree, var)
        best = max(options.values())
        return next(decision for decision in self.ORDER if options[decision] == best)


class HumanPolicy:
    """
    Reads moves line by line, printing the current tree, score, P and S before each prompt.

    Works for either side; `stream_in` is a terminal or a scripted moves file.
    """

    def __init__(self, stream_in: TextIO, stream_out: TextIO, role: str):
        self.stream_in = stream_in
        self.stream_out = stream_out
        self.role = role

    def _ask(self, view: GameView, prompt: str, parse: Callable) -> int | Decision:
        m = measures(view.tree)
        print(f"tree: {render(view.tree)}  score={view.score}  P={m.p}  S={m.s}", file=self.stream_out)
        while True:
            print(f"{self.role}> {prompt}: ", end="", file=self.stream_out, flush=True)
            line = self.stream_in.readline()
            if not line:
                raise GameError(f"{self.role} ran out of moves")
            result = parse(line)
            if result.found:
                return result.value
            print(f"unrecognised move {line.strip()!r}", file=self.stream_out)

    def choose_variable(self, view: GameView) -> int:
        return self._ask(view, "variable to query", parse_variable)

    def choose_bit(self, view: GameView, var: int) -> int:
        return self._ask(view, f"bit for x{var} after the defer", parse_bit)

    def respond(self, view: GameView, var: int) -> Decision:
        return self._ask(view, f"answer for x{var} (0 / 1 / defer)", parse_decision)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def play(
    t0: AndOrTree,
    prover: ProverPolicy,
    delayer: DelayerPolicy,
    seed: int = 0,
    max_rounds: int | None = None,
) -> GameTranscript:
    """
    Plays one game to the end.

    A query of a variable with no leaf in the current tree is answered 0 without consulting the
    Delayer and without scoring; the tree stays the same.

    Args:
        t0 (AndOrTree): Reduced starting tree.
        prover (ProverPolicy): Prover side.
        delayer (DelayerPolicy): Delayer side.
        seed (int): Seed of the generator handed to random policies.
        max_rounds (int | None): Optional cap on the number of rounds.

    Returns:
        GameTranscript: The full record.

    Raises:
        AndOrError: If t0 is not reduced.
        GameError: On illegal moves or when `max_rounds` is exceeded.
    """
    if not is_reduced(t0):
        raise AndOrError("games start from a reduced tree")
    rng = np.random.default_rng(seed)
    tree = t0
    start = measures(tree)
    transcript = GameTranscript(initial_p=start.p, initial_s=start.s)
    score, before = 0, start
    logger.debug(f"Game start: {render(tree)} P={start.p} S={start.s}")

    while not tree.is_empty:
        if max_rounds is not None and len(transcript.rounds) >= max_rounds:
            raise GameError(f"game exceeded {max_rounds} rounds")
        view = GameView(tree, score, rng)
        var = prover.choose_variable(view)
        if var not in leaf_ids(tree):
            decision = Decision.ANSWER0
        else:
            decision = delayer.respond(view, var)
        if not isinstance(decision, Decision):
            raise GameError(f"delayer returned {decision!r}, not a decision")
        if decision is Decision.DEFER:
            score += 1
            bit = prover.choose_bit(GameView(tree, score, rng), var)
        else:
            bit = decision.bit
        if bit not in (0, 1):
            raise GameError(f"prover chose bit {bit!r}")

        tree = next_tree(tree, var, bit)
        after = measures(tree)
        transcript.rounds.append(
            Round(var=var, decision=decision, bit=bit, score=score, p=after.p, s=after.s, p_before=before.p, s_before=before.s)
        )
        logger.debug(f"Round {len(transcript.rounds)}: x{var} {decision.value} -> {bit}, score {score}, P={after.p} S={after.s}")
        before = after

    transcript.final_score = score
    transcript.result = tree.constant
    logger.info(f"Game over after {len(transcript.rounds)} rounds: score {score}, value {tree.constant}")
    return transcript


def sweep(
    tree: AndOrTree,
    make_prover: Callable[[], ProverPolicy],
    make_delayer: Callable[[], DelayerPolicy],
    seeds: Iterable[int],
    jobs: int = 1,
) -> list[GameTranscript]:
    """Plays one game per seed with fresh policies; transcripts come back in seed order."""

    def one(seed: int) -> GameTranscript:
        return play(tree, make_prover(), make_delayer(), seed=seed)

    seeds = list(seeds)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, seeds))
    return [one(seed) for seed in seeds]
