"""
policy_factory.py

This module provides a simple factory for creating Prover and Delayer
policies by name, as the `game` command and batch sweeps need.

Key Concepts:
- Factory pattern: create policy objects without naming their classes.
- Roles: every kind exists for both the 'prover' and the 'delayer' side.
- Exhaustive policies may be given a deterministic opponent to search against.

Example usage:
    prover = PolicyFactory.create("paper", role="prover")
    delayer = PolicyFactory.create("exhaustive", role="delayer", opponent=prover)
"""

import sys

from treequery.game import (
    ExhaustiveDelayer,
    ExhaustiveProver,
    HumanPolicy,
    LadderDelayer,
    LeftmostProver,
    RandomDelayer,
    RandomProver,
)

POLICY_KINDS = ("paper", "random", "human", "exhaustive")


class PolicyFactory:
    @staticmethod
    def create(kind: str, role: str, **kwargs):
        """
        Factory method to create policies by kind and role.

        Args:
            kind (str): 'paper', 'random', 'human' or 'exhaustive'.
            role (str): 'prover' or 'delayer'.
            **kwargs: `opponent` for exhaustive policies; `stream_in` / `stream_out` for human ones.

        Returns:
            A policy object for the requested side.
        """
        kind, role = kind.lower(), role.lower()
        if role not in ("prover", "delayer"):
            raise ValueError(f"Unknown role: {role}")
        prover = role == "prover"
        if kind == "paper":
            return LeftmostProver() if prover else LadderDelayer()
        elif kind == "random":
            return RandomProver() if prover else RandomDelayer()
        elif kind == "exhaustive":
            opponent = kwargs.get("opponent")
            return ExhaustiveProver(opponent=opponent) if prover else ExhaustiveDelayer(opponent=opponent)
        elif kind == "human":
            return HumanPolicy(
                stream_in=kwargs.get("stream_in") or sys.stdin,
                stream_out=kwargs.get("stream_out") or sys.stderr,
                role=role,
            )
        else:
            raise ValueError(f"Unknown policy kind: {kind}")
