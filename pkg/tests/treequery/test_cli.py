"""
test_cli.py

These tests drive the `treequery` command line through `main([...])` and
check outputs and the exit-code contract: 0 success, 1 a verification
failed, 2 bad input.

Example usage:
    pytest tests/treequery/test_cli.py
"""

import io
import json
import sys

import pytest

from treequery.cli import build_parser, main
from treequery.dtree import serialize
from treequery.helpers.generators import generate
from treequery.weights import canonical_weights, parse_weights, serialize_weights
from utils.logging import get_logger

logger = get_logger("TestCli")


@pytest.fixture
def tree_file(tmp_path):
    def write(kind, **params):
        path = tmp_path / f"{kind}.json"
        path.write_text(serialize(generate(kind, **params)), encoding="utf-8")
        return str(path)

    return write


def test_parser_defaults():
    args = build_parser().parse_args(["report", "tree.json"])
    assert args.command == "report"
    assert args.tree == "tree.json"
    assert args.oracle is False
    assert args.seed == 0
    assert args.tol == 1e-2
    assert args.jobs == 1
    assert args.max_n == 12

    args = build_parser().parse_args(["game", "--depth", "2"])
    assert (args.prover, args.delayer, args.moves) == ("paper", "paper", None)


def test_gen_piped_to_opt(capsys, monkeypatch):
    assert main(["gen", "complete", "--depth", "3"]) == 0
    document = capsys.readouterr().out
    monkeypatch.setattr(sys, "stdin", io.StringIO(document))
    assert main(["opt"]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_gen_requires_size(capsys):
    assert main(["gen", "parity"]) == 2
    assert "needs --n" in capsys.readouterr().err


def test_func_rank(capsys):
    assert main(["func-rank", "--n", "3", "--table", "FE"]) == 0
    out = capsys.readouterr().out
    assert "rank: 1" in out
    assert "game value: 1" in out


def test_game_published_strategies(capsys):
    assert main(["game", "--depth", "2", "--prover", "paper", "--delayer", "paper", "--trace"]) == 0
    out = capsys.readouterr().out
    assert "round 1: x0 defer -> 0" in out
    assert out.strip().endswith("final score: 2")


def test_game_json(capsys):
    assert main(["game", "--depth", "4", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["final_score"] == 6
    assert doc["initial_p"] == doc["initial_s"] == 6


def test_human_game_refuses_without_terminal(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert main(["game", "--depth", "2", "--prover", "human"]) == 2
    assert "--moves" in capsys.readouterr().err


def test_human_game_with_moves_file(tmp_path, capsys):
    moves = tmp_path / "moves.txt"
    moves.write_text("# prover moves\nx0\n0\nx2\nx3\n1\n", encoding="utf-8")
    assert main(["game", "--depth", "2", "--prover", "human", "--moves", str(moves)]) == 0
    captured = capsys.readouterr()
    assert "final score: 2" in captured.out
    assert "prover>" in captured.err


def test_report_parity(tree_file, capsys):
    assert main(["report", tree_file("parity", n=3), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rank"] == 3
    assert doc["opt"] == pytest.approx(3.0, abs=1e-9)
    assert doc["bounds"]["rank_depth"] >= 3
    assert doc["bounds"]["size"] >= 3
    assert doc["passed"] is True
    assert all(value is True for value in doc["verdicts"].values())
    assert doc["weightings"]["canonical"]["wsize"] == pytest.approx(3.0, rel=1e-9)


def test_report_and_chain_table(tree_file, capsys):
    assert main(["report", tree_file("and-chain", n=3)]) == 0
    out = capsys.readouterr().out
    assert "OPT (recurrence): 2.09529" in out
    assert "canonical_balanced" in out
    assert "PASS" in out


def test_report_with_oracle(tree_file, capsys):
    assert main(["report", tree_file("and-chain", n=3), "--oracle", "--seed", "3", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["oracle"]["seed"] == 3
    assert doc["verdicts"]["oracle"] is True


def test_report_flags_corrupted_weights(tree_file, tmp_path, capsys):
    path = tree_file("and-chain", n=3)
    tree = generate("and-chain", n=3)
    w = canonical_weights(tree)
    w[next(iter(w))] = 0.0
    weights = tmp_path / "weights.json"
    weights.write_text(serialize_weights(w), encoding="utf-8")
    assert main(["report", path, "--weights", str(weights)]) == 1
    out = capsys.readouterr().out
    assert "supplied weights" in out
    assert "must be positive" in out


def test_verify_span_and_dual(tree_file, capsys):
    path = tree_file("random", seed=4, budget=21)
    assert main(["verify", "span", path, "--scheme", "appendix-b"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert doc["inputs_checked"] == 1024

    assert main(["verify", "span", path, "--input", "0000000000"]) == 0
    assert json.loads(capsys.readouterr().out)["failing"] == []

    assert main(["verify", "dual", path, "--jobs", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_verify_with_bad_weights_fails(tree_file, tmp_path, capsys):
    path = tree_file("parity", n=2)
    weights = tmp_path / "weights.json"
    weights.write_text('{"weights": [{"parent": 0, "bit": 0, "w": 1.0}]}', encoding="utf-8")
    assert main(["verify", "span", path, str(weights)]) == 1
    assert "missing weight" in capsys.readouterr().err


def test_input_errors_exit_2(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["opt", str(broken)]) == 2
    assert main(["rank", str(tmp_path / "missing.json")]) == 2
    assert main(["func-rank", "--n", "2", "--table", "zz"]) == 2
    assert main(["andor", "rank", "--depth", "-1"]) == 2
    err = capsys.readouterr().err
    assert err.count("error:") == 4


def test_weights_command_balances(tree_file, capsys):
    assert main(["weights", tree_file("or-list", n=3), "--scheme", "unit", "--balance"]) == 0
    w = parse_weights(capsys.readouterr().out)
    assert len(w) == 6


def test_rank_variants(tree_file, tmp_path, capsys):
    path = tree_file("complete", depth=3)
    assert main(["rank", path, "--exhaustive", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"rank": 3, "coloring_cost": 3, "exhaustive": 3}

    assert main(["rank", path, "--dot"]) == 0
    assert capsys.readouterr().out.startswith("digraph")

    support = {
        "support": [
            {"p": 0.5, "tree": json.loads(serialize(generate("parity", n=2)))},
            {"p": 0.5, "tree": json.loads(serialize(generate("and-chain", n=2)))},
        ]
    }
    randomized = tmp_path / "randomized.json"
    randomized.write_text(json.dumps(support), encoding="utf-8")
    assert main(["rank", str(randomized), "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == {"rrank": 2, "rdtsize": 7, "support": 2}


def test_andor_measures(capsys):
    assert main(["andor", "measures", "--depth", "4", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["p"] == doc["s"] == doc["expected"] == 6

    assert main(["andor", "rank", "--depth", "2", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["game_score"] == doc["func_rank"] == doc["expected"] == 2


def test_formula_check(tree_file, capsys):
    path = tree_file("parity", n=3)
    assert main(["formula", path, "--check"]) == 0
    out = capsys.readouterr().out
    assert "5*DTSize: 75" in out
    assert "equivalent: PASS" in out

    assert main(["formula", path, "--simplify", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["size"] <= 75
    assert doc["formula"].startswith("(")


def test_formula_rejects_unlabelled_tree(tree_file):
    assert main(["formula", tree_file("complete", depth=2)]) == 2


def test_oracle_json(tree_file, capsys):
    assert main(["oracle", tree_file("parity", n=2), "--json", "--seed", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["objective"] == pytest.approx(2.0, rel=1e-2)
    assert doc["seed"] == 5


def test_verify_and_report_with_huge_node_ids(tmp_path, capsys):
    big = 10**12
    doc = {
        "n": 1,
        "root": 0,
        "nodes": [{"id": 0, "var": 0, "zero": 1, "one": big}, {"id": 1, "leaf": "A"}, {"id": big, "leaf": "B"}],
    }
    path = tmp_path / "sparse.json"
    path.write_text(json.dumps(doc), encoding="utf-8")

    assert main(["verify", "span", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert main(["verify", "dual", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert main(["report", str(path), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_func_rank_help_states_bit_order(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["func-rank", "--help"])
    assert exc.value.code == 0
    out = " ".join(capsys.readouterr().out.split())
    assert "least significant bit first" in out
    assert "--table FE is OR" in out
