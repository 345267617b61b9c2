"""Bounded exhaustive discharge of obligations.

An obligation is Discharged when its formula holds under every total
assignment of domain values to its free symbols, Failed with the
lexicographically first falsifying assignment otherwise, and Error when
it cannot be evaluated at all (Unsupported constructs).

The search walks symbols in sorted-name order, binding one value at a
time and constant-folding the remainder; a residual that folds to true
prunes the whole subtree, one that folds to false makes every leaf below
it a falsifier, so the first one is the current prefix extended with
each remaining symbol's first domain value.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import ast
from . import formula as F
from .analyzer import CheckedProgram
from .vcgen import Obligation, UNSUPPORTED, UNSUPPORTED_REASON, VerifyOptions, generate_obligations

DISCHARGED = "Discharged"
FAILED = "Failed"
ERROR = "Error"


@dataclass(frozen=True)
class Domains:
    int_range: tuple[int, int]
    string_pool: tuple[str, ...]
    max_refs: int = 1

    def __post_init__(self):
        lo, hi = self.int_range
        if hi - lo + 1 < 2:
            raise ValueError(f"int_range [{lo}, {hi}] must span at least two values")


@dataclass(frozen=True)
class Verdict:
    status: str
    counterexample: dict | None = None
    reason: str | None = None

    @property
    def discharged(self) -> bool:
        return self.status == DISCHARGED


def derive_domains(checked: CheckedProgram, opts: VerifyOptions) -> Domains:
    return Domains(int_range=opts.int_range, string_pool=checked.program.string_pool)


def symbol_domain(ty: ast.Type, domains: Domains) -> list[F.Value]:
    """Every value a symbol of the given type can take, in enumeration
    order: ints ascending, false before true, strings in pool order with
    Void last, sets in characteristic-bitvector order over the pool,
    references before Void. One representative object stands for all
    non-Void references of a class, a deliberately coarse heap model
    that ignores aliasing between distinct objects."""
    if ty.kind == ast.INTEGER:
        lo, hi = domains.int_range
        return list(range(lo, hi + 1))
    if ty.kind == ast.BOOLEAN:
        return [False, True]
    if ty.kind == ast.STRING:
        return list(domains.string_pool) + [None]
    if ty.kind == ast.SET_OF_STRING:
        pool = domains.string_pool
        return [
            frozenset(pool[i] for i in range(len(pool)) if mask >> i & 1)
            for mask in range(1 << len(pool))
        ]
    if ty.kind == ast.REF:
        return [F.Ref(ty.class_name), None]
    raise ValueError(f"no enumerable domain for type {ty}")


def enumerate_environments(obligation: Obligation, domains: Domains):
    """Every total assignment over the obligation's free symbols, in
    lexicographic order; assignments violating the hypotheses are
    included (the hypotheses live inside the formula)."""
    syms = F.free_syms(obligation.formula)
    names = list(syms)
    value_lists = [symbol_domain(syms[n], domains) for n in names]

    def rec(i: int, env: dict):
        if i == len(names):
            yield dict(env)
            return
        for v in value_lists[i]:
            env[names[i]] = v
            yield from rec(i + 1, env)
        del env[names[i]]

    yield from rec(0, {})


def discharge(obligation: Obligation, domains: Domains) -> Verdict:
    if obligation.kind == UNSUPPORTED:
        return Verdict(ERROR, reason=obligation.unsupported_reason or UNSUPPORTED_REASON)
    try:
        return _search(obligation.formula, domains)
    except Exception as exc:  # never raise: mirror the error verdict class
        return Verdict(ERROR, reason=f"{type(exc).__name__}: {exc}")


def _search(f: F.Formula, domains: Domains) -> Verdict:
    if F.old_syms(f):
        return Verdict(ERROR, reason="entry snapshot left unresolved")
    syms = F.free_syms(f)
    names = list(syms)
    value_lists = [symbol_domain(syms[n], domains) for n in names]

    def first_leaf(prefix: dict, depth: int) -> dict:
        env = dict(prefix)
        for j in range(depth, len(names)):
            env[names[j]] = value_lists[j][0]
        return env

    def walk(g: F.Formula, depth: int, prefix: dict) -> dict | None:
        if g == F.TRUE:
            return None
        if g == F.FALSE:
            return first_leaf(prefix, depth)
        if depth == len(names):
            raise ValueError(f"formula did not fold under a total assignment: {F.to_text(g)}")
        name = names[depth]
        for v in value_lists[depth]:
            residual = F.specialize(g, {name: v})
            hit = walk(residual, depth + 1, {**prefix, name: v})
            if hit is not None:
                return hit
        return None

    counterexample = walk(F.fold(f), 0, {})
    if counterexample is None:
        return Verdict(DISCHARGED)
    return Verdict(FAILED, counterexample=counterexample)


# -- batch driver ---------------------------------------------------------------


def _discharge_item(item: tuple[Obligation, Domains]) -> Verdict:
    return discharge(*item)


def worker_count() -> int:
    raw = os.environ.get("MINIPROOF_WORKERS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def discharge_all(
    obligations: list[Obligation], domains: Domains, workers: int | None = None
) -> list[tuple[Obligation, Verdict]]:
    """Discharge every obligation; verdict order follows obligation
    order regardless of how many workers ran."""
    if workers is None:
        workers = worker_count()
    if workers <= 1 or len(obligations) <= 1:
        return [(o, discharge(o, domains)) for o in obligations]
    items = [(o, domains) for o in obligations]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        verdicts = list(pool.map(_discharge_item, items))
    return list(zip(obligations, verdicts))


def verify_program(
    checked: CheckedProgram, opts: VerifyOptions, workers: int | None = None
) -> "Report":
    started = time.perf_counter()
    obligations = generate_obligations(checked, opts)
    domains = derive_domains(checked, opts)
    pairs = discharge_all(obligations, domains, workers)
    duration_ms = int((time.perf_counter() - started) * 1000)
    return build_report(pairs, domains, duration_ms)


# -- reporting ------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    id: str
    kind: str
    class_name: str
    feature_name: str
    provenance: str
    verdict: Verdict


@dataclass(frozen=True)
class Report:
    rows: tuple[ReportRow, ...]
    counts: dict[str, int]
    percentages: dict[str, int]
    domains: Domains
    duration_ms: int

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def exit_status(self) -> int:
        if self.counts[ERROR]:
            return 2
        if self.counts[FAILED]:
            return 1
        return 0


def _percent(count: int, total: int) -> int:
    if total == 0:
        return 0
    # integer rounding, halves away from zero
    return (200 * count + total) // (2 * total)


def _row_key(row: ReportRow) -> tuple:
    head, _, index = row.id.rpartition(".")
    return (head, int(index)) if index.isdigit() else (row.id, 0)


def build_report(
    pairs: list[tuple[Obligation, Verdict]], domains: Domains, duration_ms: int = 0
) -> Report:
    rows = sorted(
        (
            ReportRow(o.id, o.kind, o.class_name, o.feature_name, o.provenance, v)
            for o, v in pairs
        ),
        key=_row_key,
    )
    counts = {DISCHARGED: 0, FAILED: 0, ERROR: 0}
    for row in rows:
        counts[row.verdict.status] += 1
    total = len(rows)
    percentages = {status: _percent(counts[status], total) for status in counts}
    return Report(tuple(rows), counts, percentages, domains, duration_ms)


def summary_line(report: Report) -> str:
    c, p = report.counts, report.percentages
    return (
        f"{report.total} obligations: "
        f"{c[DISCHARGED]} discharged ({p[DISCHARGED]}%), "
        f"{c[FAILED]} failed ({p[FAILED]}%), "
        f"{c[ERROR]} errors ({p[ERROR]}%)"
    )


def _counterexample_text(env: dict) -> str:
    return ", ".join(f"{name} = {F.value_text(env[name])}" for name in sorted(env))


def render_text(report: Report) -> str:
    lines = []
    if report.rows:
        id_width = max(len(r.id) for r in report.rows)
        kind_width = max(len(r.kind) for r in report.rows)
        for r in report.rows:
            line = f"{r.id:<{id_width}}  {r.kind:<{kind_width}}  {r.verdict.status}"
            if r.verdict.status == FAILED:
                line += f"  {_counterexample_text(r.verdict.counterexample)}"
            elif r.verdict.status == ERROR:
                line += f"  {r.verdict.reason}"
            lines.append(line)
        lines.append("")
    lines.append(summary_line(report))
    return "\n".join(lines)


def encode_value(v: F.Value):
    if isinstance(v, F.Ref):
        return {"ref": v.class_name}
    if isinstance(v, frozenset):
        return sorted(v)
    return v


def decode_value(raw) -> F.Value:
    if isinstance(raw, dict):
        return F.Ref(raw["ref"])
    if isinstance(raw, list):
        return frozenset(raw)
    return raw


def report_payload(report: Report) -> dict:
    rows = []
    for r in report.rows:
        v = r.verdict
        rows.append(
            {
                "id": r.id,
                "kind": r.kind,
                "class": r.class_name,
                "feature": r.feature_name,
                "provenance": r.provenance,
                "verdict": v.status,
                "counterexample": (
                    {name: encode_value(v.counterexample[name]) for name in sorted(v.counterexample)}
                    if v.counterexample is not None
                    else None
                ),
                "reason": v.reason,
            }
        )
    c, p = report.counts, report.percentages
    return {
        "summary": {
            "total": report.total,
            "discharged": c[DISCHARGED],
            "failed": c[FAILED],
            "error": c[ERROR],
            "percentages": {
                "discharged": p[DISCHARGED],
                "failed": p[FAILED],
                "error": p[ERROR],
            },
        },
        "rows": rows,
        "domains": {
            "int_range": list(report.domains.int_range),
            "string_pool": list(report.domains.string_pool),
            "max_refs": report.domains.max_refs,
        },
        "duration_ms": report.duration_ms,
    }


def render_json(report: Report) -> str:
    return json.dumps(report_payload(report), indent=2)
