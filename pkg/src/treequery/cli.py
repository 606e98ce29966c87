"""
cli.py

This module provides the `treequery` command line: one binary with a
subcommand per operation family.

Key Concepts:
- Inputs: tree, weight and randomized-tree documents are read from a path, or
  from standard input when the path is '-'.
- Output: human-readable text by default, JSON with --json; tree and weight
  documents are always JSON.
- Exit codes: 0 success, 1 a verification failed, 2 bad input.
- Environment: NO_COLOR turns off colored PASS/FAIL; LOG_LEVEL and LOG_DIR
  only affect diagnostics on stderr and in the log file.

Example usage:
    treequery gen complete --depth 3 | treequery opt
    treequery report tree.json --oracle --seed 1
    treequery game --depth 2 --prover paper --delayer paper --trace
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

from dotenv import load_dotenv

from treequery import dualadv, spanprog
from treequery.andor import complete_tree, measures, render, truth_table
from treequery.dtree import (
    DTree,
    as_bits,
    from_document,
    parse_randomized,
    rdtsize,
    serialize,
)
from treequery.errors import GameError, TreeFormatError, WeightError
from treequery.formula import formula_eval, formula_size, simplify, to_formula
from treequery.formula import render as render_formula
from treequery.game import play
from treequery.helpers.generators import KINDS, generate
from treequery.helpers.policy_factory import POLICY_KINDS, PolicyFactory
from treequery.helpers.render import to_digraph
from treequery.rank import (
    TruthTable,
    coloring_cost,
    exhaustive_guessing_complexity,
    func_rank,
    game_value,
    optimal_coloring,
    rrank,
    tree_rank,
    tree_truth_table,
)
from treequery.settings import CLOSED_FORM_RTOL, DEFAULT_PAIRWISE_N, MAX_DP_N, MAX_EXHAUSTIVE_INTERNAL, ORACLE_DEFAULT_RTOL
from treequery.weights import (
    appendix_b_weights,
    bounds,
    brute_force_opt,
    canonical_weights,
    check_weights,
    evaluate,
    opt_value,
    parse_weights,
    rescale,
    serialize_weights,
    unit_weights,
)
from utils.logging import get_logger

logger = get_logger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2
SCHEMES = ("canonical", "appendix-b", "unit")


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _load_document(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"{path}: malformed document: {exc}") from exc


def _load_tree(path: str) -> DTree:
    return from_document(_load_document(path))


def _scheme_weights(tree: DTree, scheme: str) -> dict:
    if scheme == "canonical":
        return canonical_weights(tree)
    elif scheme == "appendix-b":
        return appendix_b_weights(tree)
    elif scheme == "unit":
        return unit_weights(tree)
    raise ValueError(f"Unknown weight scheme: {scheme}")


def _weights_for(tree: DTree, args) -> dict:
    w = parse_weights(_read_text(args.weights)) if args.weights else _scheme_weights(tree, args.scheme)
    check_weights(tree, w)
    return w


def _verdict(passed: bool) -> str:
    text = "PASS" if passed else "FAIL"
    if os.getenv("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\033[32m{text}\033[0m" if passed else f"\033[31m{text}\033[0m"


def _emit_json(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _fmt(value: float) -> str:
    return format(value, ".12g")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    params = {"seed": args.seed, "budget": args.budget}
    if args.kind == "complete":
        if args.depth is None:
            raise ValueError("gen complete needs --depth")
        params["depth"] = args.depth
    elif args.kind != "random" and args.n is None:
        raise ValueError(f"gen {args.kind} needs --n")
    params["n"] = args.n
    print(serialize(generate(args.kind, **params)))
    return EXIT_OK


def cmd_rank(args) -> int:
    doc = _load_document(args.tree)
    if isinstance(doc, dict) and "support" in doc:
        r = parse_randomized(json.dumps(doc))
        result = {"rrank": rrank(r), "rdtsize": rdtsize(r), "support": len(r.support)}
    else:
        tree = from_document(doc)
        coloring = optimal_coloring(tree)
        result = {"rank": tree_rank(tree), "coloring_cost": coloring_cost(tree, coloring)}
        if args.exhaustive:
            result["exhaustive"] = exhaustive_guessing_complexity(tree)
        if args.dot:
            print(to_digraph(tree, coloring=coloring).source)
            return EXIT_OK
    if args.json:
        _emit_json(result)
    else:
        for key, value in result.items():
            print(f"{key}: {value}")
    return EXIT_OK


def cmd_opt(args) -> int:
    value = opt_value(_load_tree(args.tree))
    if args.json:
        _emit_json({"opt": value})
    else:
        print(_fmt(value))
    return EXIT_OK


def cmd_weights(args) -> int:
    tree = _load_tree(args.tree)
    w = _scheme_weights(tree, args.scheme)
    if args.balance and w:
        value = evaluate(tree, w)
        w = rescale(w, value.alpha, value.beta)
    print(serialize_weights(w))
    return EXIT_OK


def cmd_oracle(args) -> int:
    tree = _load_tree(args.tree)
    result = brute_force_opt(tree, seed=args.seed, rel_tol=args.tol)
    if args.json:
        _emit_json(
            {
                "objective": result.objective,
                "seed": args.seed,
                "tol": args.tol,
                "box_hits": [list(edge) for edge in result.box_hits],
            }
        )
    else:
        print(_fmt(result.objective))
        if result.box_hits:
            print(f"box hits: {[tuple(edge) for edge in result.box_hits]}")
    return EXIT_OK


def cmd_verify_span(args) -> int:
    tree = _load_tree(args.tree)
    inst = spanprog.build(tree, _weights_for(tree, args))
    if args.input is not None:
        report = spanprog.verify(inst, tree, as_bits(args.input, tree.n))
        doc = {"input": report.x, "passed": report.passed, "residuals": report.residuals, "failing": report.failing}
        passed = report.passed
    else:
        result = spanprog.verify_all(inst, tree, jobs=args.jobs)
        sizes = spanprog.witness_sizes(inst, tree)
        passed = result.passed and sizes.consistent
        doc = {
            "passed": passed,
            "inputs_checked": result.inputs_checked,
            "max_residual": result.max_residual,
            "worst": {"condition": result.worst[0], "input": result.worst[1], "residual": result.worst[2]},
            "witness_sizes": asdict(sizes),
        }
    _emit_json(doc)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_verify_dual(args) -> int:
    tree = _load_tree(args.tree)
    w = _weights_for(tree, args)
    sol = dualadv.build(tree, w, limit=args.max_n)
    report = dualadv.check_feasibility(sol, tree, jobs=args.jobs, limit=args.max_n)
    _emit_json(
        {
            "passed": report.passed,
            "pairs_checked": report.pairs_checked,
            "max_residual": report.max_residual,
            "worst_pair": list(report.worst_pair),
            "objective": dualadv.objective(sol),
        }
    )
    return EXIT_OK if report.passed else EXIT_FAILED


@dataclass
class Report:
    """
    Everything `report` computes for one tree.

    Attributes:
        n, size, depth: Tree statistics.
        rank (int): Tree rank.
        opt (float): OPT from the recurrence.
        oracle (dict | None): Numeric OPT with its seed and tolerance, when requested.
        bounds (dict): rank_depth and size upper bounds.
        weightings (dict): Per weighting: alpha, beta, objective, witness sizes, dual objective.
        verdicts (dict): Check name -> True / False / "skipped".
        details (list[str]): One line per failed check.
    """

    n: int
    size: int
    depth: int
    rank: int
    opt: float
    bounds: dict
    oracle: dict | None = None
    weightings: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(value is not False for value in self.verdicts.values())


def _close(a: float, b: float, rtol: float = CLOSED_FORM_RTOL) -> bool:
    return math.isclose(a, b, rel_tol=rtol, abs_tol=rtol)


def _weighting_section(report: Report, tree: DTree, name: str, w: dict, args) -> None:
    value = evaluate(tree, w)
    section = {"alpha": value.alpha, "beta": value.beta, "objective": value.objective}
    if tree.n > args.max_n:
        report.verdicts[f"span[{name}]"] = report.verdicts[f"dual[{name}]"] = "skipped"
        report.weightings[name] = section
        return

    inst = spanprog.build(tree, w)
    span = spanprog.verify_all(inst, tree, jobs=args.jobs)
    sizes = spanprog.witness_sizes(inst, tree)
    section.update(wsize_plus=sizes.plus, wsize_minus=sizes.minus, wsize=sizes.wsize)
    report.verdicts[f"span[{name}]"] = span.passed and sizes.consistent
    if not span.passed:
        condition, x, residual = span.worst
        report.details.append(f"span[{name}]: {condition} fails on x={x} (residual {residual:.3g})")
    if not sizes.consistent:
        report.details.append(f"span[{name}]: witness norms disagree with path sums")

    sol = dualadv.build(tree, w)
    feasibility = dualadv.check_feasibility(sol, tree, jobs=args.jobs, limit=args.max_n)
    section["dual_objective"] = dualadv.objective(sol)
    consistent = _close(section["dual_objective"], max(value.alpha, value.beta))
    report.verdicts[f"dual[{name}]"] = feasibility.passed and consistent
    if not feasibility.passed:
        x, y = feasibility.worst_pair
        report.details.append(f"dual[{name}]: pair ({x}, {y}) off by {feasibility.max_residual:.3g}")
    if not consistent:
        report.details.append(f"dual[{name}]: objective differs from max(alpha, beta)")
    report.weightings[name] = section


def build_report(tree: DTree, args) -> Report:
    opt = opt_value(tree)
    b = bounds(tree)
    report = Report(
        n=tree.n,
        size=tree.size,
        depth=tree.depth,
        rank=tree_rank(tree),
        opt=opt,
        bounds={"rank_depth": b.rank_depth, "size": b.size},
    )
    report.verdicts["coloring"] = coloring_cost(tree, optimal_coloring(tree)) == report.rank
    if len(tree.internal) <= MAX_EXHAUSTIVE_INTERNAL:
        report.verdicts["guessing_complexity"] = exhaustive_guessing_complexity(tree) == report.rank
    report.verdicts["bounds"] = opt <= b.rank_depth + CLOSED_FORM_RTOL and opt <= b.size + CLOSED_FORM_RTOL

    weightings = {"unit": unit_weights(tree), "canonical": canonical_weights(tree)}
    if not tree.is_trivial:
        weightings["appendix-b"] = appendix_b_weights(tree)
    if args.weights:
        supplied = parse_weights(_read_text(args.weights))
        try:
            check_weights(tree, supplied)
        except WeightError as exc:
            report.verdicts["supplied_weights"] = False
            report.details.append(f"supplied weights: {exc}")
        else:
            report.verdicts["supplied_weights"] = True
            weightings["supplied"] = supplied
    for name, w in weightings.items():
        _weighting_section(report, tree, name, w, args)

    canonical = report.weightings["canonical"]
    report.verdicts["canonical_balanced"] = _close(canonical["alpha"], opt) and _close(canonical["beta"], opt)

    if args.oracle:
        result = brute_force_opt(tree, seed=args.seed, rel_tol=args.tol)
        report.oracle = {"objective": result.objective, "seed": args.seed, "tol": args.tol}
        report.verdicts["oracle"] = math.isclose(result.objective, opt, rel_tol=args.tol, abs_tol=args.tol)
        if not report.verdicts["oracle"]:
            report.details.append(f"oracle: {result.objective:.9g} vs OPT {opt:.9g}")
    return report


def _print_report(report: Report) -> None:
    print(f"n: {report.n}  size: {report.size}  depth: {report.depth}")
    print(f"rank: {report.rank}")
    print(f"OPT (recurrence): {_fmt(report.opt)}")
    if report.oracle is not None:
        print(f"OPT (oracle, seed {report.oracle['seed']}): {_fmt(report.oracle['objective'])}")
    print(f"bound 2*sqrt(rank*depth): {_fmt(report.bounds['rank_depth'])}")
    print(f"bound sqrt(2*size): {_fmt(report.bounds['size'])}")
    print()
    print(f"{'weighting':<12} {'alpha':>12} {'beta':>12} {'objective':>12} {'wsize':>12} {'dual':>12}")
    for name, section in report.weightings.items():
        cells = [section.get(key) for key in ("alpha", "beta", "objective", "wsize", "dual_objective")]
        print(f"{name:<12} " + " ".join(f"{'-' if cell is None else _fmt(cell):>12}" for cell in cells))
    print()
    for name, verdict in report.verdicts.items():
        shown = verdict if verdict == "skipped" else _verdict(verdict)
        print(f"{name:<28} {shown}")
    for line in report.details:
        print(f"  {line}")


def cmd_report(args) -> int:
    report = build_report(_load_tree(args.tree), args)
    if args.json:
        doc = asdict(report)
        doc["passed"] = report.passed
        _emit_json(doc)
    else:
        _print_report(report)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_andor(args) -> int:
    tree = complete_tree(args.depth)
    n = 1 << args.depth
    doc = {"depth": args.depth, "n": n}
    if args.depth % 2 == 0:
        doc["expected"] = (n + 2) // 3
    if args.action == "measures":
        m = measures(tree)
        doc.update(p=m.p, s=m.s, marked=len(m.marked))
    else:
        doc["game_score"] = play(tree, PolicyFactory.create("paper", "prover"), PolicyFactory.create("paper", "delayer")).final_score
        if n <= MAX_DP_N:
            doc["func_rank"] = func_rank(truth_table(tree, n))
    if args.json:
        _emit_json(doc)
    else:
        for key, value in doc.items():
            print(f"{key}: {value}")
    return EXIT_OK


def _policy(kind: str, role: str, opponent_kind: str, moves):
    kwargs = {}
    if kind == "human":
        if moves is None and not sys.stdin.isatty():
            raise GameError("human policy needs a terminal or --moves FILE")
        kwargs.update(stream_in=moves or sys.stdin, stream_out=sys.stderr)
    elif kind == "exhaustive" and opponent_kind == "paper":
        kwargs["opponent"] = PolicyFactory.create("paper", "delayer" if role == "prover" else "prover")
    return PolicyFactory.create(kind, role, **kwargs)


def cmd_game(args) -> int:
    tree = complete_tree(args.depth)
    moves = open(args.moves, encoding="utf-8") if args.moves else None
    try:
        prover = _policy(args.prover, "prover", args.delayer, moves)
        delayer = _policy(args.delayer, "delayer", args.prover, moves)
        transcript = play(tree, prover, delayer, seed=args.seed)
    finally:
        if moves is not None:
            moves.close()
    if args.json:
        _emit_json(transcript.to_dict())
        return EXIT_OK
    if args.trace:
        print(f"start: {render(tree)}  P={transcript.initial_p} S={transcript.initial_s}")
        for number, r in enumerate(transcript.rounds, start=1):
            print(f"round {number}: x{r.var} {r.decision.value} -> {r.bit}  score={r.score} P={r.p} S={r.s}")
    print(f"final score: {transcript.final_score}")
    return EXIT_OK


def cmd_func_rank(args) -> int:
    table = TruthTable.from_hex(args.n, args.table)
    doc = {"n": args.n, "table": table.to_hex(), "rank": func_rank(table), "game_value": game_value(table)}
    if args.json:
        _emit_json(doc)
    else:
        print(f"rank: {doc['rank']}")
        print(f"game value: {doc['game_value']}")
    return EXIT_OK


def cmd_formula(args) -> int:
    tree = _load_tree(args.tree)
    f = to_formula(tree)
    if args.simplify:
        f = simplify(f)
    doc = {"size": formula_size(f), "bound": 5 * tree.size}
    passed = doc["size"] <= doc["bound"]
    if args.check:
        table = tree_truth_table(tree)
        doc["equivalent"] = all(formula_eval(f, tuple((x >> i) & 1 for i in range(tree.n))) == table.value(x) for x in range(1 << tree.n))
        passed = passed and doc["equivalent"]
    if args.json:
        doc["formula"] = render_formula(f)
        _emit_json(doc)
    else:
        print(f"size: {doc['size']}")
        print(f"5*DTSize: {doc['bound']}")
        if args.check:
            print(f"equivalent: {_verdict(doc['equivalent'])}")
    return EXIT_OK if passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treequery", description="Decision-tree rank, weights, span programs and games")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="Generate a tree document")
    s.add_argument("kind", choices=KINDS)
    s.add_argument("--n", type=int, default=None, help="Number of variables / chain length")
    s.add_argument("--depth", type=int, default=None, help="Depth for complete trees")
    s.add_argument("--seed", type=int, default=0, help="Seed for random trees")
    s.add_argument("--budget", type=int, default=21, help="Node budget for random trees")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("rank", help="Rank, G-coloring cost, or randomized rank")
    s.add_argument("tree", nargs="?", default="-")
    s.add_argument("--exhaustive", action="store_true", help="Also run the exhaustive coloring search")
    s.add_argument("--dot", action="store_true", help="Print Graphviz DOT of the optimal coloring")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("opt", help="OPT from the recurrence")
    s.add_argument("tree", nargs="?", default="-")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_opt)

    s = sub.add_parser("weights", help="Print a weight document")
    s.add_argument("tree", nargs="?", default="-")
    s.add_argument("--scheme", choices=SCHEMES, default="canonical")
    s.add_argument("--balance", action="store_true", help="Rescale so alpha = beta")
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("oracle", help="Numeric OPT by coordinate descent")
    s.add_argument("tree", nargs="?", default="-")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=ORACLE_DEFAULT_RTOL)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("verify", help="Verify the span program or the dual adversary solution")
    targets = s.add_subparsers(dest="target", required=True)
    t = targets.add_parser("span")
    t.add_argument("tree")
    t.add_argument("weights", nargs="?", default=None, help="Weight document (default: --scheme)")
    t.add_argument("--scheme", choices=SCHEMES, default="canonical")
    group = t.add_mutually_exclusive_group()
    group.add_argument("--input", default=None, help="Single input, x_0 first")
    group.add_argument("--all", action="store_true", help="All inputs (default)")
    t.add_argument("--jobs", type=int, default=1)
    t.set_defaults(func=cmd_verify_span)
    t = targets.add_parser("dual")
    t.add_argument("tree")
    t.add_argument("weights", nargs="?", default=None)
    t.add_argument("--scheme", choices=SCHEMES, default="canonical")
    t.add_argument("--max-n", type=int, default=DEFAULT_PAIRWISE_N)
    t.add_argument("--jobs", type=int, default=1)
    t.set_defaults(func=cmd_verify_dual)

    s = sub.add_parser("report", help="Full measure and verification report")
    s.add_argument("tree", nargs="?", default="-")
    s.add_argument("--weights", default=None, help="Extra weight document to report on")
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=ORACLE_DEFAULT_RTOL)
    s.add_argument("--max-n", type=int, default=DEFAULT_PAIRWISE_N)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("andor", help="Complete AND-OR tree measures or rank")
    s.add_argument("action", choices=("measures", "rank"))
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_andor)

    s = sub.add_parser("game", help="Play the Prover-Delayer game on a complete AND-OR tree")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--prover", choices=POLICY_KINDS, default="paper")
    s.add_argument("--delayer", choices=POLICY_KINDS, default="paper")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--moves", default=None, help="Scripted moves for human policies")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_game)

    s = sub.add_parser(
        "func-rank",
        help="Rank and game value of a truth table",
        description=(
            "The hex table is read least significant bit first: bit k is f(x) for the input x with "
            "index sum(x_i * 2**i) = k, so the lowest bit is f(0...0). Example: --n 3 --table FE is OR."
        ),
    )
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--table", required=True, help="hex truth table, least significant bit = f(0...0)")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_func_rank)

    s = sub.add_parser("formula", help="Convert a 0/1-labelled tree to a formula")
    s.add_argument("tree", nargs="?", default="-")
    s.add_argument("--check", action="store_true", help="Compare truth tables")
    s.add_argument("--simplify", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_formula)
    return p


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WeightError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
