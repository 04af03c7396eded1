"""Batch command-line front end.

Subcommands: eval (member / includes / leq / closure queries), iterate
(refinement stages with JSON/DOT dumps), badchain, good (goodness of a
sequence file), cover (backward coverability of a JSON system), and
divisibility (unfold-order checks for a functor).

Output is a single JSON document on stdout, serialized with sorted keys so
identical invocations are byte-identical.  Exit codes: 0 success, 1 domain
error, 2 syntax error.  NOETHKIT_ORACLE_BOUND overrides the default extent
bound of 4.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Optional

from . import expanders as E
from . import inductive as I
from . import sets as S
from . import wsts as W
from .ordinal import OrdinalError, parse_ordinal
from .sexpr import (
    SexprError,
    ordinal_token,
    parse_point,
    parse_set,
    parse_space,
    print_point,
    print_set,
)
from .space import discrete, point_leq, typecheck


class DomainError(ValueError):
    pass


def _expander(name: str, alphabet: str, alpha: str):
    base = discrete(*alphabet.split())
    if name == "div":
        return E.NatShiftExpander()
    if name == "baditer":
        return E.PrefixExpander(base)
    if name == "subword":
        return E.SubwordExpander(base)
    if name == "tree":
        return E.TreeExpander(base)
    if name == "ordsubword":
        return E.OrdinalSubwordExpander(base, parse_ordinal(alpha))
    if name == "ordtree":
        return E.OrdinalTreeExpander(base, parse_ordinal(alpha))
    if name == "unfold-words":
        return I.UnfoldExpander(I.words_functor(base))
    if name == "unfold-trees":
        return I.UnfoldExpander(I.trees_functor(base))
    raise DomainError("unknown expander %r" % name)


EXPANDERS = ("div", "baditer", "subword", "tree", "ordsubword", "ordtree",
             "unfold-words", "unfold-trees")


def _extent_hash(space, expr, bound: int) -> str:
    ext = S.extent(space, expr, bound)
    blob = "\n".join(print_point(p) for p in ext).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _stage_doc(stage: E.TopologyStage, bound: int) -> dict:
    return {
        "step": stage.step,
        "capped": stage.capped,
        "generators": [
            {
                "expr": print_set(g),
                "depth": ordinal_token(d),
                "extent_hash": _extent_hash(stage.space, g, bound),
            }
            for g, d in stage.generators
        ],
    }


def cmd_eval(args) -> dict:
    space = parse_space(args.space)
    bound = args.bound if args.bound is not None else S.default_bound()
    if args.query == "member":
        point = parse_point(args.args[0])
        expr = parse_set(args.args[1])
        if S._is_closed_expr(expr):
            value = S.member_closed(space, point, expr)
        else:
            value = S.member_open(space, point, expr)
        return {"query": "member", "result": value}
    if args.query == "includes":
        a = parse_set(args.args[0])
        b = parse_set(args.args[1])
        r = S.includes(space, a, b, bound)
        return {
            "query": "includes",
            "result": r.value,
            "via": r.via,
            "bound": r.bound,
            "witness": print_point(r.witness) if r.witness is not None else None,
        }
    if args.query == "leq":
        x = parse_point(args.args[0])
        y = parse_point(args.args[1])
        return {"query": "leq", "result": point_leq(space, x, y)}
    if args.query == "closure":
        p = parse_point(args.args[0])
        if not typecheck(space, p):
            raise DomainError("point does not typecheck")
        return {"query": "closure", "result": print_set(S.closure_point(space, p))}
    if args.query == "extent":
        expr = parse_set(args.args[0])
        points = S.extent(space, expr, bound)
        return {
            "query": "extent",
            "bound": bound,
            "count": len(points),
            "points": [print_point(p) for p in points],
        }
    raise DomainError("unknown eval query %r" % args.query)


def cmd_iterate(args) -> dict:
    expander = _expander(args.expander, args.alphabet, args.alpha)
    bound = args.bound if args.bound is not None else S.default_bound()
    result = E.iterate(expander, args.steps, bound, cap=args.cap)
    doc = {
        "expander": args.expander,
        "bound": bound,
        "fixed_point_at": result.fixed_point_at,
        "stages": [_stage_doc(stage, bound) for stage in result.stages],
    }
    if args.dot_out:
        dot = E.export_dot(result.stages[-1], bound)
        with open(args.dot_out, "w") as handle:
            handle.write(dot)
        doc["dot_out"] = args.dot_out
    if args.json_out:
        with open(args.json_out, "w") as handle:
            json.dump(doc, handle, sort_keys=True, indent=2)
            handle.write("\n")
        doc["json_out"] = args.json_out
    return doc


def cmd_badchain(args) -> dict:
    expander = _expander(args.expander, args.alphabet, args.alpha)
    bound = args.bound if args.bound is not None else S.default_bound()
    chain = E.find_bad_chain(expander, args.length, bound, cap=args.cap)
    if chain is None:
        return {"expander": args.expander, "chain": None, "bound": bound}
    return {
        "expander": args.expander,
        "bound": bound,
        "chain": {
            "picks": [print_set(g) for g in chain.picks],
            "unions": [print_set(u) for u in chain.unions],
        },
    }


def cmd_good(args) -> dict:
    space = parse_space(args.space)
    bound = args.bound if args.bound is not None else S.default_bound()
    with open(args.sequence) as handle:
        lines = [line.strip() for line in handle if line.strip()]
    seq = [parse_set(line) for line in lines]
    hit = S.find_good_index(space, seq, bound)
    if hit is None:
        return {"good_index": None, "length": len(seq), "bound": bound}
    index, evidence = hit
    return {
        "good_index": index,
        "via": evidence.via,
        "bound": evidence.bound,
        "length": len(seq),
    }


def cmd_cover(args) -> dict:
    with open(args.system) as handle:
        doc = json.load(handle)
    system, init, targets = W.system_from_json(doc)
    result = W.backward_coverability(system, init, targets, fuel=args.fuel)
    out = W.result_to_json(result, fuel=args.fuel)
    if args.json_out:
        with open(args.json_out, "w") as handle:
            json.dump(out, handle, sort_keys=True, indent=2)
            handle.write("\n")
    return out


def cmd_divisibility(args) -> dict:
    functor = I.parse_functor(args.functor)
    size_cap = args.size_cap
    if size_cap is None and I._has_list(functor):
        size_cap = 2 * args.depth
    if args.check == "stability":
        ok = I.check_preorder_stability(functor, args.depth, size_cap)
        return {"check": "stability", "depth": args.depth, "stable": ok}
    if args.check == "embedding":
        table = I.DivisibilityTable(functor, args.depth, size_cap)
        universe = table.universe()
        try:
            base = I.word_base(functor)
            from .space import Words
            space, convert = Words(base), I.mu_to_word
        except I.FunctorError:
            base = I.tree_base(functor)
            from .space import Trees
            space, convert = Trees(base), I.mu_to_tree
        mismatches = sum(
            1 for x in universe for y in universe
            if table.leq(x, y) != point_leq(space, convert(x), convert(y)))
        return {
            "check": "embedding",
            "depth": args.depth,
            "universe": len(universe),
            "equal": mismatches == 0,
            "mismatches": mismatches,
        }
    if args.check == "coincidence":
        bound = args.bound if args.bound is not None else 3
        expander = I.UnfoldExpander(functor)
        result = E.iterate(expander, args.depth, bound)
        oracle = S.oracle_for(expander.space, bound)
        table = I.DivisibilityTable(functor, args.depth + 1, size_cap)
        convert = I.mu_to_word if expander.kind == "words" else I.mu_to_tree
        points = {convert(m): m for m in table.universe()}
        alex = []
        for p in oracle.universe:
            if p not in points:
                continue
            alex.append(frozenset(
                q for q in oracle.universe
                if q in points and table.leq(points[p], points[q])))
        whole = frozenset(oracle.universe)
        stage_exts = [oracle.extent(g) for g in result.stages[-1].opens()]
        equal = (all(S.in_generated_lattice(e, stage_exts, whole) for e in alex)
                 and all(S.in_generated_lattice(e, alex, whole)
                         for e in stage_exts))
        return {
            "check": "coincidence",
            "depth": args.depth,
            "bound": bound,
            "equal": equal,
        }
    raise DomainError("unknown divisibility check %r" % args.check)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noethkit",
        description="Symbolic workbench for Noetherian-style topologies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a membership/inclusion query")
    p.add_argument("query",
                   choices=["member", "includes", "leq", "closure", "extent"])
    p.add_argument("args", nargs="+", help="query arguments (s-expressions)")
    p.add_argument("--space", required=True)
    p.add_argument("--bound", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("iterate", help="iterate a refinement rule")
    p.add_argument("expander", choices=EXPANDERS)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--cap", type=int, default=E.DEFAULT_CAP)
    p.add_argument("--alphabet", default="a b")
    p.add_argument("--alpha", default="w*2")
    p.add_argument("--dot-out", default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("badchain", help="search for a depth-increasing bad chain")
    p.add_argument("expander", choices=EXPANDERS)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--cap", type=int, default=E.DEFAULT_CAP)
    p.add_argument("--alphabet", default="a b")
    p.add_argument("--alpha", default="w*2")
    p.set_defaults(func=cmd_badchain)

    p = sub.add_parser("good", help="least good index of a sequence of opens")
    p.add_argument("sequence", help="file with one open per line")
    p.add_argument("--space", required=True)
    p.add_argument("--bound", type=int, default=None)
    p.set_defaults(func=cmd_good)

    p = sub.add_parser("cover", help="backward coverability of a JSON system")
    p.add_argument("system", help="system description file")
    p.add_argument("--fuel", type=int, default=10 ** 6)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("divisibility", help="unfold-order checks for a functor")
    p.add_argument("functor")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--check", choices=["stability", "coincidence", "embedding"],
                   required=True)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--size-cap", type=int, default=None)
    p.set_defaults(func=cmd_divisibility)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except (SexprError, OrdinalError) as exc:
        print(json.dumps({"error": str(exc), "kind": "syntax"}, sort_keys=True))
        return 2
    except (DomainError, S.SetError, E.ExpanderError, I.FunctorError,
            W.WstsError, OSError, json.JSONDecodeError, KeyError,
            IndexError) as exc:
        print(json.dumps({"error": str(exc), "kind": "domain"}, sort_keys=True))
        return 1
    print(json.dumps(doc, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
