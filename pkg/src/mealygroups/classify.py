"""Classification of every 3-state automaton over two letters.

The pipeline enumerates all labeled automata, reduces them by the symmetry
group (state relabeling, letter swap, state inversion), analyses one
representative per class under cheap budgets, and reruns the classes that
contain registry automata under larger ones.  Reports are plain dicts so
the output files are deterministic JSON/CSV.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .automaton import (enumerate_all, format_recursion, parse_recursion, symmetry_key,
                        symmetry_reduce)
from .element import Element, verify_certificate
from .group import (Contracting, FiniteGroup, GroupHandle,
                    InfiniteWitness, NonContracting, NotSelfReplicating, SelfReplicating,
                    finiteness, fingerprint, growth_series, is_abelian, nucleus,
                    self_replicating, sf_exponents, validate_witness, verdict_json,
                    verify_relator)
from .presets import preset, preset_indices, tables

REFERENCE_CLASS_COUNT = 194
REFERENCE_GROUP_BOUND = 124


@dataclass(frozen=True)
class Budgets:
    sf_depth: int = 5
    gr_radius: int = 4
    finite_cap: int = 1000
    relation_bound: int = 4
    deep_sf_depth: int = 8
    deep_gr_radius: int = 5
    nucleus_cap: int = 512
    selfrep_len: int = 12
    selfrep_level: int = 6

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"budget {k} must be a positive integer")


# ------------------------------------------------------- isomorphism types

_FINITE_NAMES = {
    (1, ((1, 1),), True, 1): "{1}",
    (2, ((1, 1), (2, 1)), True, 2): "C2",
    (4, ((1, 1), (2, 3)), True, 4): "C2xC2",
    (4, ((1, 1), (2, 1), (4, 2)), True, 4): "C4",
    (8, ((1, 1), (2, 7)), True, 8): "C2xC2xC2",
    (8, ((1, 1), (2, 5), (4, 2)), False, 2): "D4",
    (8, ((1, 1), (2, 1), (4, 6)), False, 2): "Q8",
    (16, ((1, 1), (2, 11), (4, 4)), False, 4): "D4xC2",
}


def _element_order(g: Element, limit: int) -> int:
    p = g
    for k in range(1, limit + 1):
        if p.is_trivial():
            return k
        p = p * g
    raise RuntimeError("element order exceeds the group order")


def finite_invariant(G: GroupHandle, fin: FiniteGroup) -> tuple:
    """(order, element-order histogram, abelian, centre order).

    Separates all groups of order < 16 and the order-16 groups met here; it
    is an invariant, not a proof of isomorphism in general."""
    n = fin.order
    hist = Counter(_element_order(g, n) for g in fin.elements)
    gens = [s.element for s in G.generators]
    centre = sum(1 for g in fin.elements if all(g * s == s * g for s in gens))
    return (n, tuple(sorted(hist.items())), is_abelian(G), centre)


def finite_type_name(inv: tuple) -> str:
    return _FINITE_NAMES.get(inv, f"order-{inv[0]}")


@dataclass(frozen=True)
class AbelianType:
    """``Z^rank x torsion`` read off the exponent relations found among the
    generators.  The group is a quotient of this, so the rank is an upper
    bound; it is exact when ``certified`` (rank 1 with no torsion and an
    infinite group, or a finite group)."""

    rank: int
    torsion: tuple[int, ...]
    relations: int
    certified: bool

    @property
    def name(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts += [f"C{t}" for t in self.torsion]
        return "x".join(parts) or "{1}"


def abelian_type(G: GroupHandle, bound: int, infinite: bool) -> AbelianType:
    """Relations ``prod s_i^e_i = 1`` with ``|e_i| <= bound`` and their
    Smith normal form."""
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import invariant_factors

    gens = [s.element for s in G.generators]
    k = len(gens)
    powers = []
    for g in gens:
        row = {0: G.identity()}
        pos, neg = G.identity(), G.identity()
        gi = g.inverse()
        for e in range(1, bound + 1):
            pos, neg = pos * g, neg * gi
            row[e], row[-e] = pos, neg
        powers.append(row)
    rels = []
    for e in itertools.product(range(-bound, bound + 1), repeat=k):
        nz = [x for x in e if x]
        if not nz or nz[0] < 0:
            continue
        x = G.identity()
        for i in range(k):
            x = x * powers[i][e[i]]
        if x.is_trivial():
            rels.append(list(e))
    factors = [abs(int(x)) for x in invariant_factors(Matrix(rels), domain=ZZ)] if rels else []
    nonzero = [x for x in factors if x]
    rank = k - len(nonzero)
    torsion = tuple(x for x in nonzero if x > 1)
    certified = (rank == 1 and not torsion and infinite)
    return AbelianType(rank, torsion, len(rels), certified)


# --------------------------------------------------------- class analysis

def _finite_json(fin) -> dict:
    out = verdict_json(fin)
    if isinstance(fin, InfiniteWitness):
        out["certificate"] = type(fin.certificate.certificate).__name__
        out["verified"] = verify_certificate(fin.element, fin.certificate.certificate)
    return out


def analyze(text: str, budgets: Budgets, deep: bool = False) -> dict:
    """Report for one automaton given as recursion text."""
    G = GroupHandle(parse_recursion(text))
    fin = finiteness(G, cap=budgets.finite_cap)
    abelian = is_abelian(G)
    out: dict = {"finite": _finite_json(fin), "abelian": abelian}
    if isinstance(fin, FiniteGroup):
        inv = finite_invariant(G, fin)
        out["type"] = finite_type_name(inv)
        out["invariant"] = [inv[0], [list(p) for p in inv[1]], inv[2], inv[3]]
        out["type_certified"] = inv in _FINITE_NAMES
    elif abelian:
        at = abelian_type(G, budgets.relation_bound, isinstance(fin, InfiniteWitness))
        out["type"] = at.name
        out["type_certified"] = at.certified
        out["relations_found"] = at.relations
    else:
        out["type"] = None
    fp = fingerprint(G, budgets.sf_depth, budgets.gr_radius)
    out["fingerprint"] = fp.as_dict()
    if deep:
        out["sf"] = sf_exponents(G, budgets.deep_sf_depth)
        out["gr"] = growth_series(G, budgets.deep_gr_radius)
        nuc = nucleus(G, cap=budgets.nucleus_cap)
        out["contracting"] = verdict_json(nuc)
        if isinstance(nuc, NonContracting):
            out["contracting"]["verified"] = validate_witness(nuc)
        out["self_replicating"] = verdict_json(
            self_replicating(G, budgets.selfrep_len, budgets.selfrep_level))
    return out


@dataclass
class ClassRecord:
    key: str
    label: int                     # smallest index among the members
    representative: str
    member_count: int
    minimized_states: int
    presets: list[int] = field(default_factory=list)
    report: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("seconds")
        return d


def _run_one(args):
    text, budgets, deep = args
    t = time.perf_counter()
    try:
        rep = analyze(text, budgets, deep)
    except Exception as exc:  # never fatal for the run
        rep = {"error": f"{type(exc).__name__}: {exc}"}
    return rep, time.perf_counter() - t


@dataclass
class Classification:
    records: list[ClassRecord]
    summary: dict
    manifest: dict

    def summary_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True) + "\n"

    def classes_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "label", "member_count", "minimized_states", "finite", "order",
                    "abelian", "type", "contracting", "self_replicating", "presets"])
        for r in self.records:
            rep = r.report
            fin = rep.get("finite", {})
            w.writerow([r.key, r.label, r.member_count, r.minimized_states,
                        fin.get("verdict", "error"), fin.get("order", ""),
                        rep.get("abelian", ""), rep.get("type") or "",
                        rep.get("contracting", {}).get("verdict", ""),
                        rep.get("self_replicating", {}).get("verdict", ""),
                        " ".join(map(str, r.presets))])
        return buf.getvalue()

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        (out / "classes").mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(self.summary_json())
        (out / "classes.csv").write_text(self.classes_csv())
        (out / "manifest.json").write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")
        for r in self.records:
            (out / "classes" / f"{r.label}.json").write_text(
                json.dumps(r.as_dict(), indent=2, sort_keys=True) + "\n")


def _preset_keys() -> dict[bytes, list[int]]:
    out: dict[bytes, list[int]] = {}
    for i in preset_indices():
        out.setdefault(symmetry_key(preset(i)), []).append(i)
    return out


def run_classification(budgets: Budgets | None = None, jobs: int = 1,
                       progress=None) -> Classification:
    """Cheap pass over every symmetry class, deep pass on registry classes."""
    from . import __version__

    budgets = budgets or Budgets()
    t0 = time.perf_counter()
    automata = list(enumerate_all())
    reduction = symmetry_reduce(automata)
    pkeys = _preset_keys()
    records = []
    tasks = []
    for c in reduction.classes:
        label = min(c.members)
        presets = sorted(pkeys.get(c.key, []))
        records.append(ClassRecord(c.key.decode("ascii"), label, format_recursion(c.representative, "; "),
                                   len(c.members), c.minimized_states, presets))
        tasks.append((format_recursion(c.representative), budgets, bool(presets)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_one, tasks, chunksize=4))
    else:
        results = []
        for i, t in enumerate(tasks):
            results.append(_run_one(t))
            if progress:
                progress(i + 1, len(tasks))
    for r, (rep, secs) in zip(records, results):
        r.report, r.seconds = rep, secs
    summary = summarize(records, reduction, len(automata))
    manifest = {
        "version": __version__,
        "budgets": asdict(budgets),
        "seed": 0,
        "jobs": jobs,
        "wall_clock_seconds": round(time.perf_counter() - t0, 3),
        "status": {str(r.label): ("error" if "error" in r.report else "ok") for r in records},
        "class_seconds": {str(r.label): round(r.seconds, 3) for r in records},
    }
    return Classification(records, summary, manifest)


def summarize(records: list[ClassRecord], reduction, total: int) -> dict:
    finite_types: dict[str, list[int]] = {}
    finite_orders: dict[str, int] = {}
    abelian_types: dict[str, list[int]] = {}
    verdicts = Counter()
    buckets = set()
    small_buckets = set()
    witnesses_ok = True
    for r in records:
        rep = r.report
        if "error" in rep:
            verdicts["error"] += 1
            continue
        fin = rep["finite"]
        verdicts[fin["verdict"]] += 1
        if fin["verdict"] == "infinite" and not fin.get("verified", False):
            witnesses_ok = False
        if fin["verdict"] == "finite":
            finite_types.setdefault(rep["type"], []).append(r.label)
            finite_orders[rep["type"]] = fin["order"]
        if rep["abelian"] and rep["type"]:
            abelian_types.setdefault(rep["type"], []).append(r.label)
        bucket = json.dumps([rep["fingerprint"], fin.get("order")], sort_keys=True)
        buckets.add(bucket)
        if r.minimized_states < 3:
            small_buckets.add(bucket)
    return {
        "total_labeled": total,
        "member_sum": sum(r.member_count for r in records),
        "symmetry_classes": reduction.class_count,
        "three_state_minimal_classes": reduction.minimal_class_count,
        "three_state_minimal_target": REFERENCE_CLASS_COUNT,
        "distinct_minimized_classes": reduction.minimized_class_count,
        "finite_verdicts": dict(sorted(verdicts.items())),
        "finite_types": {k: {"order": finite_orders[k], "classes": len(v), "first": min(v)}
                         for k, v in sorted(finite_types.items())},
        "finite_type_count": len(finite_types),
        "finite_orders": sorted(finite_orders.values()),
        "abelian_types": {k: {"classes": len(v), "first": min(v)}
                          for k, v in sorted(abelian_types.items())},
        "abelian_type_count": len(abelian_types),
        "fingerprint_buckets": len(buckets),
        "fingerprint_buckets_small": len(small_buckets),
        "reference_group_bound": REFERENCE_GROUP_BOUND,
        "witnesses_verified": witnesses_ok,
        "presets": {str(p): r.label for r in records for p in r.presets},
    }


# ------------------------------------------------------------ regression

@dataclass
class RegressionItem:
    index: int
    check: str
    ok: bool | None            # None: downgraded to unknown
    detail: str = ""


def _flag_check(verdict, yes_type, no_type, validate=None):
    """(value, reason) with value True/False, or None and a reason."""
    if isinstance(verdict, yes_type):
        return True, ""
    if isinstance(verdict, no_type):
        if validate is not None and not validate(verdict):
            return None, "witness failed validation"
        return False, ""
    return None, getattr(verdict, "reason", "budget exhausted")


def regression_against_tables(indices=None, budgets: Budgets | None = None,
                              checks=("relators", "sf", "gr", "contracting", "self_replicating")
                              ) -> list[RegressionItem]:
    budgets = budgets or Budgets()
    rows = tables()
    out = []
    for idx in indices if indices is not None else sorted(rows):
        row = rows[idx]
        G = GroupHandle(preset(idx))
        if "relators" in checks:
            bad = [w for w in row["relators"] if not verify_relator(G, w)]
            out.append(RegressionItem(idx, "relators", not bad,
                                      f"{len(row['relators'])} relators" if not bad else f"nontrivial: {bad}"))
        if "sf" in checks:
            got = sf_exponents(G, len(row["sf"]) - 1)
            out.append(RegressionItem(idx, "sf", got == row["sf"], f"got {got}"))
        if "gr" in checks:
            got = growth_series(G, len(row["gr"]) - 1)
            out.append(RegressionItem(idx, "gr", got == row["gr"], f"got {got}"))
        if "contracting" in checks:
            v, why = _flag_check(nucleus(G, cap=budgets.nucleus_cap), Contracting, NonContracting,
                                 validate_witness)
            out.append(_flag_item(idx, "contracting", v, row["contracting"], why))
        if "self_replicating" in checks:
            v, why = _flag_check(self_replicating(G, budgets.selfrep_len, budgets.selfrep_level),
                                 SelfReplicating, NotSelfReplicating)
            out.append(_flag_item(idx, "self_replicating", v, row["self_replicating"], why))
    return out


def _flag_item(idx, check, got, want, why):
    if got is None:
        return RegressionItem(idx, check, None, f"unknown: {why}")
    return RegressionItem(idx, check, got == want, f"got {got}, table {want}")


def regression_report(items: list[RegressionItem]) -> dict:
    return {
        "passed": sum(1 for i in items if i.ok is True),
        "failed": [asdict(i) for i in items if i.ok is False],
        "unknown": [asdict(i) for i in items if i.ok is None],
        "items": [asdict(i) for i in items],
    }


# --------------------------------------------------------- preset matching

def match_presets(records: list[ClassRecord]) -> dict[int, ClassRecord]:
    """Registry index -> the class record containing that automaton."""
    by_key = {r.key: r for r in records}
    out = {}
    for i in preset_indices():
        key = symmetry_key(preset(i)).decode("ascii")
        if key not in by_key:
            raise LookupError(f"preset {i} matches no class")
        out[i] = by_key[key]
    return out


def same_sf(a: int, b: int, depth: int = 8) -> bool:
    """Registry automata ``a`` and ``b`` have equal level quotient orders.
    Growth is left out: it depends on the generating set."""
    return (sf_exponents(GroupHandle(preset(a)), depth)
            == sf_exponents(GroupHandle(preset(b)), depth))


def _stderr_progress(done, total):
    if done % 50 == 0 or done == total:
        print(f"classified {done}/{total}", file=sys.stderr)
