"""Command line interface.  Data goes to stdout, diagnostics to stderr.

Exit codes: 0 success, 1 analysis failure (budget exhausted, verdict
unknown, regression mismatch), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .automaton import (ParseError, automaton_index, canonical_form, dual_automaton,
                        format_recursion, minimize, moore_dot, parse_recursion,
                        validate_invertible)
from .element import (DEFAULT_SECTION_CAP, Finite, Infinite, Ray, SectionCapExceeded, act_ray,
                      is_spherically_transitive, order, verify_certificate)
from .group import (CapExceeded, FinitenessUnknown, GroupHandle, SelfReplicationUnknown,
                    find_relators, finiteness, growth_series, is_abelian, nucleus,
                    self_replicating, sf_exponents, verdict_json)
from .presets import preset_text

GRAMMAR = """automaton grammar: one state per line (or ';' separated)
  name = perm(section_0, ..., section_{d-1})
  perm is 's' (binary swap), a product of cycles such as (0 1), or empty
  example: a = s(c, a); b = (b, a); c = (a, a)
words: names, inverses x^-1, powers x^n, brackets (ab)^2, commutators [a,b],
  conjugates w^u = u w u^-1
rays: head:period, e.g. 11:0 for 110000..."""


class UsageError(Exception):
    pass


class AnalysisFailure(Exception):
    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


# ------------------------------------------------------------------ helpers

def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}")
    return v


def _load(args):
    if args.preset is not None:
        try:
            text = preset_text(args.preset)
        except KeyError as exc:
            raise UsageError(str(exc.args[0]))
    elif args.file is not None:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}")
    else:
        text = args.inline
    try:
        return parse_recursion(text)
    except ParseError as exc:
        raise UsageError(f"{exc}\n{GRAMMAR}")


def _group(args) -> GroupHandle:
    return GroupHandle(_load(args), section_cap=args.budget_cap)


def _element(G: GroupHandle, word: str):
    try:
        return G.element(word)
    except (ParseError, ValueError) as exc:
        raise UsageError(f"bad word {word!r}: {exc}\n{GRAMMAR}")


def _emit(data, fmt: str, rows=None, header=None):
    """JSON by default; CSV from ``rows`` when requested."""
    if fmt == "csv":
        if rows is None:
            raise UsageError("this subcommand has no CSV output")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    elif fmt == "dot":
        raise UsageError("this subcommand has no DOT output")
    else:
        sys.stdout.write(json.dumps(data, indent=2) + "\n")


def _order_json(v) -> dict:
    if isinstance(v, Finite):
        return {"verdict": "finite", "order": v.order}
    if isinstance(v, Infinite):
        return {"verdict": "infinite", "certificate": type(v.certificate).__name__}
    return {"verdict": "unknown", "reason": v.reason}


def _require_known(payload: dict, verdict_key: str = "verdict"):
    if payload.get(verdict_key) == "unknown":
        raise AnalysisFailure(payload.get("reason", "verdict unknown"), payload)


# -------------------------------------------------------------- subcommands

def cmd_info(args):
    A = _load(args)
    G = GroupHandle(A, section_cap=args.budget_cap)
    birev = dual_automaton(A)[2] if A.n_states > 1 else None
    out = {
        "recursion": format_recursion(A, "; "),
        "states": A.n_states,
        "alphabet": A.d,
        "minimized_states": minimize(A).n_states,
        "invertible": validate_invertible(A),
        "bireversible": birev,
        "trivial_group": G.is_trivial_group(),
        "generators": [g.label for g in G.generators],
        "abelian": is_abelian(G),
    }
    if (A.n_states, A.d) == (3, 2):
        out["index"] = automaton_index(A)
    _emit(out, args.format)


def cmd_act(args):
    G = _group(args)
    g = _element(G, args.word)
    text = args.input.strip()
    if ":" in text:
        try:
            r = Ray.parse(text)
        except ValueError as exc:
            raise UsageError(str(exc))
        im = act_ray(g, r)
        out = {"word": args.word, "input": str(r), "output": str(im),
               "prefix": "".join(map(str, im.prefix(args.prefix)))}
    else:
        dots = text.endswith("...")
        digits = text.rstrip(".")
        try:
            w = tuple(int(c) for c in digits)
        except ValueError:
            raise UsageError("input must be digits, optionally ending in '...', or head:period")
        if any(x >= G.d for x in w):
            raise UsageError(f"letters must be below {G.d}")
        image = "".join(map(str, g.act(w)))
        out = {"word": args.word, "input": text, "output": image + ("..." if dots else "")}
    _emit(out, args.format)


def cmd_mul(args):
    G = _group(args)
    els = [_element(G, w) for w in args.words]
    p = G.identity()
    for e in els:
        p = p * e
    out = {"words": args.words, "trivial": p.is_trivial(), "states": p.n_states,
           "root_permutation": list(p.root_perm), "code": list(p.code)}
    _emit(out, args.format)


def cmd_order(args):
    G = _group(args)
    g = _element(G, args.word)
    v = order(g, max_nodes=args.budget_nodes)
    out = {"word": args.word, **_order_json(v)}
    if isinstance(v, Infinite):
        out["verified"] = verify_certificate(g, v.certificate)
    _emit(out, args.format)
    _require_known(out)


def cmd_transitive(args):
    G = _group(args)
    if G.d != 2:
        raise UsageError("spherical transitivity is decided on the binary tree only")
    g = _element(G, args.word)
    _emit({"word": args.word, "spherically_transitive": is_spherically_transitive(g)}, args.format)


def cmd_growth(args):
    G = _group(args)
    gr = growth_series(G, args.radius)
    _emit({"gr": gr}, args.format, [(r, v) for r, v in enumerate(gr)], ["radius", "ball_size"])


def cmd_sf(args):
    G = _group(args)
    sf = sf_exponents(G, args.levels)
    _emit({"sf": sf}, args.format, [(n, e) for n, e in enumerate(sf)], ["level", "log2_order"])


def cmd_relators(args):
    G = _group(args)
    rels = find_relators(G, args.max_len).as_text()
    _emit({"max_len": args.max_len, "relators": rels}, args.format, [(r,) for r in rels], ["relator"])


def cmd_nucleus(args):
    G = _group(args)
    v = nucleus(G, cap=args.budget_nucleus)
    out = verdict_json(v)
    if not isinstance(v, CapExceeded) and hasattr(v, "nucleus") and args.list:
        out["elements"] = [list(e.code) for e in v.nucleus]
    _emit(out, args.format)
    _require_known(out)


def cmd_selfrep(args):
    G = _group(args)
    v = self_replicating(G, args.budget_selfrep_len, args.budget_selfrep_level)
    out = verdict_json(v)
    _emit(out, args.format)
    if isinstance(v, SelfReplicationUnknown):
        raise AnalysisFailure(v.reason, out)


def cmd_finite(args):
    G = _group(args)
    v = finiteness(G, cap=args.budget_finite or 100_000)
    out = verdict_json(v)
    _emit(out, args.format)
    if isinstance(v, FinitenessUnknown):
        raise AnalysisFailure(v.reason, out)


def cmd_schreier(args):
    from .spectra import MAX_LEVEL, schreier_graph
    if args.levels > MAX_LEVEL:
        raise UsageError(f"--levels must be at most {MAX_LEVEL}")
    S = schreier_graph(_group(args), args.levels)
    if args.format == "dot":
        sys.stdout.write(S.to_dot())
    elif args.format == "csv":
        _emit(None, "csv", [(S.word(v), S.word(u), lab) for lab, v, u in S.edges()],
              ["source", "target", "generator"])
    else:
        _emit({"level": S.level, "vertices": S.n_vertices, "components": S.n_components(),
               "edges": [[S.word(v), S.word(u), lab] for lab, v, u in S.edges()]}, "json")


def cmd_spectrum(args):
    from .spectra import MAX_LEVEL, level_spectrum
    if args.levels > MAX_LEVEL:
        raise UsageError(f"--levels must be at most {MAX_LEVEL}")
    res = level_spectrum(_group(args), args.levels, tol=args.tol)
    if args.format == "csv":
        sys.stdout.write(res.histogram(args.bins).to_csv())
    elif args.format == "dot":
        raise UsageError("spectrum has no DOT output")
    else:
        sys.stdout.write(res.to_json() + "\n")
    if res.off_norm >= res.tol:
        raise AnalysisFailure(f"Jacobi did not converge: off-diagonal norm {res.off_norm:.3g}")


def cmd_dual(args):
    A = _load(args)
    try:
        D, dual_inv, birev = dual_automaton(A)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = {"dual": format_recursion(D, "; "), "dual_invertible": dual_inv,
           "bireversible": birev, "canonical": canonical_form(D).hex()}
    if args.format == "dot":
        sys.stdout.write(moore_dot(D, "dual"))
    else:
        _emit(out, args.format)


def cmd_dot(args):
    if args.format == "csv":
        raise UsageError("dot writes DOT only")
    sys.stdout.write(moore_dot(_load(args)))


def cmd_classify(args):
    from .classify import Budgets, _stderr_progress, run_classification
    budgets = Budgets(sf_depth=args.levels or 5, gr_radius=args.radius or 4,
                      finite_cap=args.budget_finite or 1000, nucleus_cap=args.budget_nucleus,
                      selfrep_len=args.budget_selfrep_len, selfrep_level=args.budget_selfrep_level)
    C = run_classification(budgets, jobs=args.jobs, progress=_stderr_progress)
    if args.out:
        C.write(args.out)
        print(f"wrote {args.out}/summary.json, classes.csv, classes/", file=sys.stderr)
    if args.format == "csv":
        sys.stdout.write(C.classes_csv())
    else:
        sys.stdout.write(C.summary_json())


def cmd_regress(args):
    from .classify import Budgets, regression_against_tables, regression_report
    budgets = Budgets(nucleus_cap=args.budget_nucleus, selfrep_len=args.budget_selfrep_len,
                      selfrep_level=args.budget_selfrep_level)
    indices = [args.preset] if args.preset is not None else None
    try:
        items = regression_against_tables(indices, budgets)
    except KeyError as exc:
        raise UsageError(f"no table row for {exc.args[0]}")
    rep = regression_report(items)
    if args.format == "csv":
        _emit(None, "csv", [(i.index, i.check, {True: "pass", False: "fail", None: "unknown"}[i.ok],
                             i.detail) for i in items], ["index", "check", "result", "detail"])
    else:
        _emit(rep, "json")
    if rep["failed"]:
        raise AnalysisFailure(f"{len(rep['failed'])} regression checks failed")


# ------------------------------------------------------------------ parser

def _source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--preset", type=int, help="registry index")
    g.add_argument("--file", help="recursion file")
    g.add_argument("--inline", help="recursion text")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "dot"), default="json")
    common.add_argument("--budget-cap", type=_positive, default=DEFAULT_SECTION_CAP,
                        help="maximum states of a product element")
    common.add_argument("--budget-nodes", type=_positive, default=4096,
                        help="orbit-section graph size for order decisions")
    common.add_argument("--budget-finite", type=_positive,
                        help="element cap when enumerating a finite group "
                             "(default 100000, classify 1000)")
    common.add_argument("--budget-nucleus", type=_positive, default=512)
    common.add_argument("--budget-selfrep-len", type=_positive, default=12)
    common.add_argument("--budget-selfrep-level", type=_positive, default=6)

    parser = argparse.ArgumentParser(
        prog="mealygroups", description="Groups generated by invertible Mealy automata.",
        epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, source=True):
        p = sub.add_parser(name, parents=[common], help=help_, epilog=GRAMMAR,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if source:
            _source(p)
        p.set_defaults(func=fn)
        return p

    add("info", cmd_info, "summary of an automaton")
    p = add("act", cmd_act, "image of a word or ray")
    p.add_argument("--word", required=True)
    p.add_argument("--input", required=True, help="digits (optionally '...') or head:period")
    p.add_argument("--prefix", type=_positive, default=16, help="ray prefix length to print")
    p = add("mul", cmd_mul, "product of group words")
    p.add_argument("words", nargs="+")
    p = add("order", cmd_order, "order of an element with certificate")
    p.add_argument("--word", required=True)
    p = add("transitive", cmd_transitive, "spherical transitivity of an element")
    p.add_argument("--word", required=True)
    p = add("growth", cmd_growth, "ball sizes")
    p.add_argument("--radius", type=_nonneg, default=5)
    p = add("sf", cmd_sf, "log2 orders of level quotients")
    p.add_argument("--levels", type=_nonneg, default=8)
    p = add("relators", cmd_relators, "cyclically reduced relators up to a length")
    p.add_argument("--max-len", type=_nonneg, default=8)
    p = add("nucleus", cmd_nucleus, "contraction verdict")
    p.add_argument("--list", action="store_true", help="include nucleus element codes")
    add("selfrep", cmd_selfrep, "self-replication verdict")
    add("finite", cmd_finite, "finiteness verdict")
    p = add("schreier", cmd_schreier, "Schreier graph of a level (json, csv edge list, dot)")
    p.add_argument("--levels", type=_nonneg, default=4)
    p = add("spectrum", cmd_spectrum, "Markov operator spectrum (json dump or csv histogram)")
    p.add_argument("--levels", type=_nonneg, default=6)
    p.add_argument("--bins", type=_positive, default=64)
    p.add_argument("--tol", type=float, default=1e-10)
    add("dual", cmd_dual, "dual automaton")
    add("dot", cmd_dot, "Moore diagram")
    p = add("classify", cmd_classify, "classify all 3-state binary automata", source=False)
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--levels", type=_positive, help="cheap-pass SF depth (default 5)")
    p.add_argument("--radius", type=_positive, help="cheap-pass growth radius (default 4)")
    p = add("regress", cmd_regress, "compare registry automata against stored tables", source=False)
    p.add_argument("--preset", type=int, help="only this index")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except AnalysisFailure as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1
    except SectionCapExceeded as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
