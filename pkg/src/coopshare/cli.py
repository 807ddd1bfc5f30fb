"""Command-line front end.

Exit codes: 0 when every verdict is the expected one, 1 when some verdict
is not, 2 for invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import axioms
from .decomposition import decomposition_document, gm_decompose
from .errors import CoopShareError, ZeroGame
from .gen import CLASSES, GenSpec, generate
from .model import Game, game_document, load_game, parse_order, trajectory_document, vector_document
from .registry import RULES, TABLE_RULES, get_rule

EXIT_OK, EXIT_UNEXPECTED, EXIT_INVALID = 0, 1, 2


class InputError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _load(args) -> Game:
    try:
        data = Path(args.game).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {args.game}: {exc.strerror}") from None
    game = load_game(data)
    if getattr(args, "order", None):
        game = game.with_order(parse_order(args.order, game.n))
    return game


def cmd_run(args) -> int:
    rule = get_rule(args.rule)
    game = _load(args)
    final = rule(game).final
    _emit(_json({"rule": rule.name, "final": vector_document(final)}), args.out)
    return EXIT_OK


def cmd_trajectory(args) -> int:
    rule = get_rule(args.rule)
    game = _load(args)
    _emit(_json(trajectory_document(rule(game), rule.name)), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    game = _load(args)
    try:
        doc = decomposition_document(gm_decompose(game.valuation))
    except ZeroGame:
        doc = {"components": []}
    _emit(_json(doc), args.out)
    return EXIT_OK


def _expected_exit(ok: bool, expect: str) -> int:
    if expect == "any" or (expect == "pass") == ok:
        return EXIT_OK
    return EXIT_UNEXPECTED


def cmd_check(args) -> int:
    axiom = axioms.normalize_axiom(args.axiom)
    if args.game:
        game = _load(args)
        scope = "all" if args.scope == "all" else game.order
        verdict = axioms.check_axiom(axiom, args.rule, game, scope)
    else:
        if not (args.pool and args.n):
            raise InputError("check needs --game FILE, or --pool CLASS with --n")
        verdict = axioms.search(args.rule, axiom, args.pool, args.n, args.seeds)
    _emit(_json(verdict.document()), args.out)
    return _expected_exit(verdict.ok, args.expect)


def cmd_search(args) -> int:
    verdict = axioms.search(args.rule, args.axiom, args.pool, args.n, args.seeds, start=args.start)
    _emit(_json(verdict.document()), args.out)
    return _expected_exit(verdict.ok, args.expect)


def _matrix_table(cells) -> str:
    rules = list(dict.fromkeys(c.rule for c in cells))
    ax = list(dict.fromkeys(c.axiom for c in cells))
    width = max([len(get_rule(r).label) for r in rules] + [4])
    lines = ["rule".ljust(width) + "".join(a.rjust(8) for a in ax)]
    by_key = {(c.rule, c.axiom): c for c in cells}
    for r in rules:
        row = get_rule(r).label.ljust(width)
        for a in ax:
            c = by_key[(r, a)]
            mark = "ok" if c.verdict.ok else "fail"
            row += (mark + ("" if c.matches else "!")).rjust(8)
        lines.append(row)
    lines.append("ok = no counterexample found; fail = witness found; ! = differs from the published table")
    return "\n".join(lines) + "\n"


def _matrix_csv(cells) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rule", "axiom", "expected", "status", "matches", "games_checked", "witness"])
    for c in cells:
        doc = c.document()
        witness = c.verdict.witness.describe() if c.verdict.witness else ""
        w.writerow([c.rule, c.axiom, doc["expected"], doc["status"], doc["matches"], doc["games_checked"], witness])
    return buf.getvalue()


def cmd_matrix(args) -> int:
    rules = [get_rule(r).name for r in args.rules.split(",") if r] if args.rules is not None else list(TABLE_RULES)
    axiom_list = args.axioms.split(",") if args.axioms else list(axioms.TABLE_AXIOMS)
    if args.fixtures_only:
        budget = axioms.Budget(n_max=0, small_count=0, n_seeded=0, seeded_count=0)
    else:
        budget = axioms.Budget(
            n_max=args.n_max, small_count=args.small_seeds, n_seeded=args.n_seeded, seeded_count=args.seeds
        )
    cells = axioms.satisfaction_matrix(rules, axiom_list, budget, jobs=args.jobs)
    if args.format == "csv":
        text = _matrix_csv(cells)
    elif args.format == "table":
        text = _matrix_table(cells)
    else:
        text = _json({"cells": [c.document() for c in cells], "mismatches": sum(not c.matches for c in cells)})
    _emit(text, args.out)
    return EXIT_OK if all(c.matches for c in cells) else EXIT_UNEXPECTED


def cmd_gen(args) -> int:
    spec = GenSpec(args.n, args.cls, args.seed, value_grid=args.value_grid, levels=args.levels)
    v = generate(spec)
    order = parse_order(args.order, args.n) if args.order else tuple(range(args.n))
    _emit(_json(game_document(Game.new(v, order))), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopshare", description="Exact online value-sharing rules and axiom checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    rule_names = sorted(RULES)

    def game_args(p, order=True):
        p.add_argument("--game", required=True, help="game document (JSON)")
        if order:
            p.add_argument("--order", help='arrival order overriding the file, e.g. "1,2,4,3"')
        p.add_argument("--out", help="write to this file instead of stdout")

    p = sub.add_parser("run", help="final allocation of one rule")
    p.add_argument("--rule", required=True, choices=rule_names)
    game_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trajectory", help="every per-arrival row of one rule")
    p.add_argument("--rule", required=True, choices=rule_names)
    game_args(p)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("decompose", help="greedy monotone decomposition into 0-1 games")
    game_args(p, order=False)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("check", help="check one axiom on a game file or a generated pool")
    p.add_argument("--axiom", required=True)
    p.add_argument("--rule", required=True, choices=rule_names)
    p.add_argument("--game")
    p.add_argument("--order")
    p.add_argument("--scope", choices=["order", "all"], default="order", help="EA base orders for --game")
    p.add_argument("--pool", choices=CLASSES)
    p.add_argument("--n", type=int)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--expect", choices=["pass", "fail", "any"], default="pass")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("matrix", help="reproduce the rule x axiom satisfaction table")
    p.add_argument("--rules", help="comma-separated rule names (default: the eight table rows)")
    p.add_argument("--axioms", help="comma-separated axioms (default: the seven table columns)")
    p.add_argument("--n-max", type=int, default=4, help="sizes checked under every arrival order")
    p.add_argument("--small-seeds", type=int, default=100, help="seeded games per class and size up to --n-max")
    p.add_argument("--n-seeded", type=int, default=5, help="extra size with one seeded order per game")
    p.add_argument("--seeds", type=int, default=1000, help="seeded games per class at --n-seeded")
    p.add_argument("--fixtures-only", action="store_true")
    p.add_argument("--format", choices=["json", "csv", "table"], default="json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("search", help="first counterexample in a generated pool")
    p.add_argument("--axiom", required=True)
    p.add_argument("--rule", required=True, choices=rule_names)
    p.add_argument("--pool", required=True, choices=CLASSES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--expect", choices=["pass", "fail", "any"], default="any")
    p.add_argument("--jobs", type=int, default=1, help="accepted for symmetry with matrix; search is sequential")
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("gen", help="emit a seeded game document")
    p.add_argument("--class", dest="cls", required=True, choices=CLASSES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--value-grid", type=int, default=2)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--order")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CoopShareError, InputError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"coopshare: error: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
