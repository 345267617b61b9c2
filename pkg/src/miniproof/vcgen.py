"""Verification-condition generation.

Every provable fact about a feature becomes one Obligation: a closed
formula over the feature's entry state (attributes, parameters, and
entry snapshots), produced by a weakest-precondition pass over the body.

State paths are formula atoms. ``balance`` is the attribute, ``r.a`` is
one level of dereference, and ``r.a@3`` is the unknown value path
``r.a`` holds right after statement 3 rebound it (creation or call
havoc). Calls and creations are reasoned about modularly: assert the
callee's precondition, forget what the callee may modify, assume its
postcondition and invariant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import ast
from . import formula as F
from .analyzer import CheckedProgram, ClassInfo
from .pretty import expr_text

POSTCONDITION = "Postcondition"
INVARIANT_MAINTENANCE = "InvariantMaintenance"
FRAME = "Frame"
CALLEE_PRECONDITION = "CalleePrecondition"
OVERFLOW = "Overflow"
VOID_DEREFERENCE = "VoidDereference"
CHECK_ASSERTION = "CheckAssertion"
UNSUPPORTED = "Unsupported"

ALL_KINDS = (
    POSTCONDITION,
    INVARIANT_MAINTENANCE,
    FRAME,
    CALLEE_PRECONDITION,
    OVERFLOW,
    VOID_DEREFERENCE,
    CHECK_ASSERTION,
    UNSUPPORTED,
)

_ID_TAGS = {
    POSTCONDITION: "postcondition",
    INVARIANT_MAINTENANCE: "invariant_maintenance",
    FRAME: "frame",
    CALLEE_PRECONDITION: "callee_precondition",
    OVERFLOW: "overflow",
    VOID_DEREFERENCE: "void_dereference",
    CHECK_ASSERTION: "check_assertion",
    UNSUPPORTED: "unsupported",
}

UNSUPPORTED_REASON = "creation expression in contract"


@dataclass(frozen=True)
class VerifyOptions:
    int_range: tuple[int, int] = (-8, 8)
    check_overflow: bool = False
    overflow_width: int = 32

    def __post_init__(self):
        lo, hi = self.int_range
        if not lo <= 0 <= hi:
            raise ValueError(f"int_range [{lo}, {hi}] must contain 0")
        if self.overflow_width < 2 or self.overflow_width & (self.overflow_width - 1):
            raise ValueError(f"overflow_width {self.overflow_width} must be a power of two")

    @property
    def overflow_bounds(self) -> tuple[int, int]:
        half = 1 << (self.overflow_width - 1)
        return -half, half - 1


@dataclass(frozen=True)
class Obligation:
    id: str
    kind: str
    class_name: str
    feature_name: str
    formula: F.Formula
    provenance: str
    unsupported_reason: str | None = None


def type_default(ty: ast.Type) -> F.Value:
    if ty.kind == ast.INTEGER:
        return 0
    if ty.kind == ast.BOOLEAN:
        return False
    if ty.kind == ast.SET_OF_STRING:
        return frozenset()
    return None  # STRING and REF start detached


def mentions_creation(e: ast.Expr) -> bool:
    return any(isinstance(n, ast.CreateExpr) for n in ast.walk_expr(e))


class _Creation(Exception):
    """Raised when lowering hits a creation expression."""


# -- lowering own-feature expressions ------------------------------------------


def _lower(e: ast.Expr, in_old: bool = False) -> F.Formula:
    """Lower an analyzed expression of the feature under verification.
    Attribute and parameter reads become path symbols; everything under
    `old` becomes entry-snapshot symbols."""
    if isinstance(e, ast.IntLit):
        return F.Lit(e.value)
    if isinstance(e, ast.BoolLit):
        return F.Lit(e.value)
    if isinstance(e, ast.StrLit):
        return F.Lit(e.value)
    if isinstance(e, ast.VoidLit):
        return F.Lit(None)
    if isinstance(e, ast.SetLit):
        return F.Lit(frozenset(e.items))
    if isinstance(e, ast.Name):
        cls = F.OldSym if in_old else F.Sym
        return cls(e.name, e.ty)
    if isinstance(e, ast.Qualified):
        cls = F.OldSym if in_old else F.Sym
        return cls(f"{e.receiver}.{e.attr}", e.ty)
    if isinstance(e, ast.Old):
        return _lower(e.expr, in_old=True)
    if isinstance(e, ast.Unary):
        return F.Not(_lower(e.expr, in_old))
    if isinstance(e, ast.Has):
        return F.HasF(_lower(e.receiver, in_old), _lower(e.item, in_old))
    if isinstance(e, ast.Binary):
        left, right = _lower(e.left, in_old), _lower(e.right, in_old)
        if e.op in ast.ARITH_OPS:
            return F.Arith(e.op, left, right)
        if e.op in ast.COMPARISON_OPS:
            return F.Cmp(e.op, left, right)
        if e.op == "and":
            return F.And((left, right))
        if e.op == "or":
            return F.Or((left, right))
        return F.Implies(left, right)
    if isinstance(e, ast.CreateExpr):
        raise _Creation
    raise TypeError(f"unexpected expression {e!r}")


def _lower_prefixed(
    e: ast.Expr,
    prefix: str,
    param_map: dict[str, F.Formula],
    rename_post,
    old_to_default: ClassInfo | None = None,
    in_old: bool = False,
) -> F.Formula:
    """Lower a clause of another class as seen through a receiver path.

    Attribute reads of that class become ``prefix.attr`` symbols, passed
    through rename_post in the current (post) state; under `old` they
    are either the pre-call path unrenamed, or - for creators, where the
    entry state is the default state - default-value literals
    (old_to_default gives the class to look the defaults up in).
    """

    def go(e: ast.Expr, in_old: bool) -> F.Formula:
        if isinstance(e, (ast.IntLit, ast.BoolLit, ast.StrLit, ast.VoidLit, ast.SetLit)):
            return _lower(e)
        if isinstance(e, ast.Name):
            if e.name in param_map:
                return param_map[e.name]
            if in_old and old_to_default is not None:
                return F.Lit(type_default(old_to_default.attributes[e.name]))
            path = f"{prefix}.{e.name}"
            return F.Sym(path if in_old else rename_post(path), e.ty)
        if isinstance(e, ast.Qualified):
            path = f"{prefix}.{e.receiver}.{e.attr}"
            if in_old and old_to_default is not None:
                # the receiver defaults to Void in a fresh object; its
                # fields have no defined entry value
                raise _Creation
            return F.Sym(path if in_old else rename_post(path), e.ty)
        if isinstance(e, ast.Old):
            return go(e.expr, True)
        if isinstance(e, ast.Unary):
            return F.Not(go(e.expr, in_old))
        if isinstance(e, ast.Has):
            return F.HasF(go(e.receiver, in_old), go(e.item, in_old))
        if isinstance(e, ast.Binary):
            left, right = go(e.left, in_old), go(e.right, in_old)
            if e.op in ast.ARITH_OPS:
                return F.Arith(e.op, left, right)
            if e.op in ast.COMPARISON_OPS:
                return F.Cmp(e.op, left, right)
            if e.op == "and":
                return F.And((left, right))
            if e.op == "or":
                return F.Or((left, right))
            return F.Implies(left, right)
        if isinstance(e, ast.CreateExpr):
            raise _Creation
        raise TypeError(f"unexpected expression {e!r}")

    return go(e, in_old)


# -- the weakest-precondition transformer ---------------------------------------


class _WpEngine:
    def __init__(self, checked: CheckedProgram, info: ClassInfo, feat: ast.Feature):
        self.checked = checked
        self.info = info
        self.feat = feat
        # a stable index per statement so havoc symbols like r.a@3 are
        # identical across all obligations of the feature
        self.stmt_index = {
            id(s): k for k, s in enumerate(ast.walk_statements(feat.body), start=1)
        }

    def receiver_class(self, name: str) -> ClassInfo:
        for p in self.feat.params:
            if p.name == name:
                return self.checked.info(p.ty.class_name)
        return self.checked.info(self.info.attributes[name].class_name)

    def wp_all(self, stmts: list[ast.Statement], post: F.Formula) -> F.Formula:
        for s in reversed(stmts):
            post = self.wp(s, post)
        return post

    def wp(self, s: ast.Statement, post: F.Formula) -> F.Formula:
        if isinstance(s, ast.Assign):
            return F.subst(post, {s.target: _lower(s.value)})
        if isinstance(s, ast.QualifiedAssign):
            return F.subst(post, {f"{s.receiver}.{s.attr}": _lower(s.value)})
        if isinstance(s, ast.CreateStmt):
            return self.wp_create(s, post)
        if isinstance(s, ast.CallStmt):
            return self.wp_call(s, post)
        if isinstance(s, ast.IfStmt):
            cond = _lower(s.cond)
            return F.conj(
                F.implies(cond, self.wp_all(s.then_branch, post)),
                F.implies(F.neg(cond), self.wp_all(s.else_branch, post)),
            )
        if isinstance(s, ast.CheckStmt):
            if mentions_creation(s.expr):
                return post  # flagged as Unsupported elsewhere
            return F.conj(_lower(s.expr), post)
        raise TypeError(f"unexpected statement {s!r}")

    def _freshen(self, f: F.Formula, receiver: str, havocked, k: int) -> F.Formula:
        """Rename every symbol naming a havocked path under receiver to
        its post-statement-k unknown. Symbols already anchored to a later
        statement (containing @) are left alone."""
        mapping: dict[str, F.Formula] = {}
        for name, ty in F.free_syms(f).items():
            if "@" in name or not name.startswith(receiver + "."):
                continue
            first = name[len(receiver) + 1 :].split(".", 1)[0]
            if first in havocked:
                mapping[name] = F.Sym(f"{name}@{k}", ty)
        return F.subst(f, mapping) if mapping else f

    def wp_create(self, s: ast.CreateStmt, post: F.Formula) -> F.Formula:
        target_info = self.receiver_class(s.target)
        k = self.stmt_index[id(s)]
        creator = target_info.routines[target_info.creator]
        rename = lambda path: f"{path}@{k}"
        assumed: list[F.Formula] = []
        for clause in creator.ensure:
            try:
                assumed.append(
                    _lower_prefixed(
                        clause.expr, s.target, {}, rename, old_to_default=target_info
                    )
                )
            except _Creation:
                pass
        for clause in target_info.decl.invariant:
            try:
                assumed.append(_lower_prefixed(clause.expr, s.target, {}, rename))
            except _Creation:
                pass
        out = F.implies(F.conj(*assumed), self._freshen(post, s.target, target_info.attributes, k))
        return F.subst(out, {s.target: F.Lit(F.Ref(target_info.name))})

    def wp_call(self, s: ast.CallStmt, post: F.Formula) -> F.Formula:
        callee_info = self.receiver_class(s.receiver)
        callee = callee_info.routines[s.feature]
        k = self.stmt_index[id(s)]
        havocked = self._havoc_set(callee_info, callee)
        param_map = {p.name: _lower(a) for p, a in zip(callee.params, s.args)}

        def rename(path: str) -> str:
            first = path[len(s.receiver) + 1 :].split(".", 1)[0]
            return f"{path}@{k}" if first in havocked else path

        assumed: list[F.Formula] = []
        for clause in callee.ensure:
            try:
                assumed.append(
                    _lower_prefixed(clause.expr, s.receiver, param_map, rename)
                )
            except _Creation:
                pass
        for clause in callee_info.decl.invariant:
            try:
                assumed.append(_lower_prefixed(clause.expr, s.receiver, {}, rename))
            except _Creation:
                pass
        return F.implies(
            F.conj(*assumed), self._freshen(post, s.receiver, havocked, k)
        )

    @staticmethod
    def _havoc_set(callee_info: ClassInfo, callee: ast.Feature) -> set[str]:
        # what the callee may change: its modify list, or every model
        # query when it declares none - plus attributes outside the
        # model, which no frame condition ever constrains
        base = set(callee.modify) if callee.modify is not None else set(callee_info.model_queries)
        non_model = set(callee_info.attributes) - set(callee_info.model_queries)
        return base | non_model

    # -- assertion collection (facts that must hold mid-body) --------------------

    def collect_assertions(self, opts: VerifyOptions) -> list[tuple[str, str, F.Formula]]:
        """All (kind, provenance, entry-state formula) assertions of the
        feature, in program order: require-site dereferences, body-site
        obligations, then exit-site dereferences from ensure clauses."""
        out: list[tuple[str, str, F.Formula]] = []
        for clause in self.feat.require:
            out.extend(self._deref_asserts(clause.expr, include_old=True))
        body_asserts = self._collect_body(self.feat.body, opts)
        exit_asserts: list[tuple[str, str, F.Formula]] = []
        for clause in self.feat.ensure:
            for kind, prov, f, under_old in self._ensure_derefs(clause.expr):
                if under_old:
                    out.append((kind, prov, f))
                else:
                    exit_asserts.append((kind, prov, f))
        exit_at_entry = [
            (kind, prov, self.wp_all(self.feat.body, f)) for kind, prov, f in exit_asserts
        ]
        return out + body_asserts + exit_at_entry

    def _guaranteed_not_void(self, receiver: str) -> bool:
        """A class-invariant clause `receiver /= Void` discharges the
        dereference obligation outright - except inside the creator,
        which cannot assume the invariant."""
        if self.feat.is_creator:
            return False
        if receiver not in self.info.attributes:
            return False
        for clause in self.info.decl.invariant:
            e = clause.expr
            if (
                isinstance(e, ast.Binary)
                and e.op == "/="
                and isinstance(e.left, ast.Name)
                and e.left.name == receiver
                and isinstance(e.right, ast.VoidLit)
            ):
                return True
            if (
                isinstance(e, ast.Binary)
                and e.op == "/="
                and isinstance(e.right, ast.Name)
                and e.right.name == receiver
                and isinstance(e.left, ast.VoidLit)
            ):
                return True
        return False

    def _receiver_not_void(self, receiver: str) -> F.Formula:
        ty = None
        for p in self.feat.params:
            if p.name == receiver:
                ty = p.ty
        if ty is None:
            ty = self.info.attributes[receiver]
        return F.Cmp("/=", F.Sym(receiver, ty), F.Lit(None))

    def _deref_asserts(self, e: ast.Expr, include_old: bool) -> list[tuple[str, str, F.Formula]]:
        """VoidDereference assertions for qualified reads of an
        expression evaluated in the current state."""
        out = []
        for node in ast.walk_expr(e):
            if isinstance(node, ast.CreateExpr):
                return []  # clause is Unsupported; no derived obligations
        for node in ast.walk_expr(e):
            if isinstance(node, ast.Qualified) and not self._guaranteed_not_void(node.receiver):
                out.append(
                    (
                        VOID_DEREFERENCE,
                        f"{node.receiver}.{node.attr}",
                        self._receiver_not_void(node.receiver),
                    )
                )
            elif isinstance(node, ast.Has) and isinstance(node.receiver, ast.Qualified):
                pass  # the Qualified walk above already covered it
        return out

    def _ensure_derefs(self, e: ast.Expr) -> list[tuple[str, str, F.Formula, bool]]:
        """Dereference assertions of an ensure clause; old-wrapped reads
        evaluate at entry, the rest at exit."""
        if mentions_creation(e):
            return []
        out = []

        def scan(node: ast.Expr, under_old: bool):
            if isinstance(node, ast.Old):
                scan(node.expr, True)
                return
            if isinstance(node, ast.Qualified) and not self._guaranteed_not_void(node.receiver):
                out.append(
                    (
                        VOID_DEREFERENCE,
                        f"{node.receiver}.{node.attr}",
                        self._receiver_not_void(node.receiver),
                        under_old,
                    )
                )
            for child in _expr_children(node):
                scan(child, under_old)

        scan(e, False)
        return out

    def _collect_body(
        self, stmts: list[ast.Statement], opts: VerifyOptions
    ) -> list[tuple[str, str, F.Formula]]:
        """Assertions arising inside stmts, each expressed at the entry
        of stmts by pulling it back through the preceding statements."""
        collected: list[tuple[str, str, F.Formula]] = []
        for s in reversed(stmts):
            collected = [(kind, prov, self.wp(s, f)) for kind, prov, f in collected]
            collected = self._statement_asserts(s, opts) + collected
        return collected

    def _statement_asserts(
        self, s: ast.Statement, opts: VerifyOptions
    ) -> list[tuple[str, str, F.Formula]]:
        out: list[tuple[str, str, F.Formula]] = []

        def value_asserts(exprs: list[ast.Expr]):
            for e in exprs:
                out.extend(self._deref_asserts(e, include_old=False))
                if opts.check_overflow:
                    out.extend(self._overflow_asserts(e, opts))

        if isinstance(s, ast.Assign):
            value_asserts([s.value])
        elif isinstance(s, ast.QualifiedAssign):
            value_asserts([s.value])
            if not self._guaranteed_not_void(s.receiver):
                out.append(
                    (
                        VOID_DEREFERENCE,
                        f"{s.receiver}.{s.attr}",
                        self._receiver_not_void(s.receiver),
                    )
                )
        elif isinstance(s, ast.CallStmt):
            if not self._guaranteed_not_void(s.receiver):
                out.append(
                    (
                        VOID_DEREFERENCE,
                        f"{s.receiver}.{s.feature}",
                        self._receiver_not_void(s.receiver),
                    )
                )
            value_asserts(list(s.args))
            out.extend(self._callee_precondition_asserts(s))
        elif isinstance(s, ast.IfStmt):
            value_asserts([s.cond])
            cond = _lower(s.cond)
            for kind, prov, f in self._collect_body(s.then_branch, opts):
                out.append((kind, prov, F.implies(cond, f)))
            for kind, prov, f in self._collect_body(s.else_branch, opts):
                out.append((kind, prov, F.implies(F.neg(cond), f)))
        elif isinstance(s, ast.CheckStmt):
            if not mentions_creation(s.expr):
                out.extend(self._deref_asserts(s.expr, include_old=False))
                out.append((CHECK_ASSERTION, s.label, _lower(s.expr)))
        return out

    def _callee_precondition_asserts(self, s: ast.CallStmt) -> list[tuple[str, str, F.Formula]]:
        callee_info = self.receiver_class(s.receiver)
        callee = callee_info.routines[s.feature]
        param_map = {p.name: _lower(a) for p, a in zip(callee.params, s.args)}
        out = []
        for clause in callee.require:
            try:
                f = _lower_prefixed(clause.expr, s.receiver, param_map, lambda p: p)
            except _Creation:
                continue  # flagged Unsupported where the clause lives
            out.append((CALLEE_PRECONDITION, clause.label, f))
        return out

    def _overflow_asserts(self, e: ast.Expr, opts: VerifyOptions) -> list[tuple[str, str, F.Formula]]:
        lo, hi = opts.overflow_bounds
        out = []
        for node in _arith_postorder(e):
            lowered = _lower(node)
            bounds = F.And(
                (
                    F.Cmp(">=", lowered, F.Lit(lo)),
                    F.Cmp("<=", lowered, F.Lit(hi)),
                )
            )
            out.append((OVERFLOW, expr_text(node), bounds))
        return out


def _expr_children(e: ast.Expr):
    if isinstance(e, ast.Unary):
        yield e.expr
    elif isinstance(e, ast.Old):
        yield e.expr
    elif isinstance(e, ast.Binary):
        yield e.left
        yield e.right
    elif isinstance(e, ast.Has):
        yield e.receiver
        yield e.item


def _arith_postorder(e: ast.Expr):
    for child in _expr_children(e):
        yield from _arith_postorder(child)
    if isinstance(e, ast.Binary) and e.op in ast.ARITH_OPS:
        yield e


def wp(
    checked: CheckedProgram,
    class_name: str,
    feature_name: str,
    statements: list[ast.Statement],
    post: F.Formula,
) -> F.Formula:
    """Weakest precondition of a statement list against a postcondition
    formula, in the scope of the named feature."""
    info = checked.info(class_name)
    engine = _WpEngine(checked, info, info.routines[feature_name])
    return engine.wp_all(statements, post)


# -- obligation generation ------------------------------------------------------


class _FeatureObligations:
    def __init__(
        self,
        checked: CheckedProgram,
        info: ClassInfo,
        feat: ast.Feature,
        opts: VerifyOptions,
        counters: dict[tuple[str, str, str], "itertools.count"],
    ):
        self.checked = checked
        self.info = info
        self.feat = feat
        self.opts = opts
        self.engine = _WpEngine(checked, info, feat)
        self.counters = counters
        self.out: list[Obligation] = []

    def emit(self, kind: str, provenance: str, entry_formula: F.Formula, reason: str | None = None):
        key = (self.info.name, self.feat.name, kind)
        index = next(self.counters.setdefault(key, itertools.count()))
        closed = self._close(entry_formula) if kind != UNSUPPORTED else entry_formula
        self.out.append(
            Obligation(
                id=f"{self.info.name}.{self.feat.name}.{_ID_TAGS[kind]}.{index}",
                kind=kind,
                class_name=self.info.name,
                feature_name=self.feat.name,
                formula=closed,
                provenance=provenance,
                unsupported_reason=reason,
            )
        )

    def _close(self, goal: F.Formula) -> F.Formula:
        """Unify entry snapshots, attach hypotheses, and for creators
        replace attribute symbols by their default values."""
        goal = F.unify_old(goal)
        hyps: list[F.Formula] = []
        if not self.feat.is_creator:
            for clause in self.info.decl.invariant:
                if not mentions_creation(clause.expr):
                    hyps.append(_lower(clause.expr))
        for clause in self.feat.require:
            if not mentions_creation(clause.expr):
                hyps.append(_lower(clause.expr))
        if not self.feat.is_creator:
            hyps.extend(self._referenced_invariants(goal, hyps))
        closed = F.implies(F.conj(*hyps), goal)
        if self.feat.is_creator:
            defaults = {
                name: F.Lit(type_default(ty)) for name, ty in self.info.attributes.items()
            }
            closed = F.subst(closed, defaults)
        return closed

    def _referenced_invariants(
        self, goal: F.Formula, hyps: list[F.Formula]
    ) -> list[F.Formula]:
        """Invariants of objects one dereference away, guarded by their
        attachment and sliced to the clauses whose symbols the obligation
        already mentions - anything else would only widen the search."""
        scope: dict[str, ast.Type] = dict(F.free_syms(goal))
        for h in hyps:
            scope.update(F.free_syms(h))
        refs: list[tuple[str, ast.Type]] = []
        for p in self.feat.params:
            if p.ty.kind == ast.REF:
                refs.append((p.name, p.ty))
        for name, ty in self.info.attributes.items():
            if ty.kind == ast.REF:
                refs.append((name, ty))
        out: list[F.Formula] = []
        for r, ty in sorted(refs):
            if r not in scope:
                continue
            ref_info = self.checked.info(ty.class_name)
            for clause in ref_info.decl.invariant:
                if mentions_creation(clause.expr):
                    continue
                lifted = _lower_prefixed(clause.expr, r, {}, lambda p: p)
                if set(F.free_syms(lifted)) <= set(scope):
                    out.append(
                        F.disj(F.Cmp("=", F.Sym(r, ty), F.Lit(None)), lifted)
                    )
        return out

    def generate(self):
        feat, info = self.feat, self.info
        for clause in feat.ensure:
            if mentions_creation(clause.expr):
                continue
            goal = self.engine.wp_all(feat.body, _lower(clause.expr))
            self.emit(POSTCONDITION, clause.label, goal)
        for clause in info.decl.invariant:
            if mentions_creation(clause.expr):
                continue
            goal = self.engine.wp_all(feat.body, _lower(clause.expr))
            self.emit(INVARIANT_MAINTENANCE, clause.label, goal)
        if feat.modify is not None:
            modified = set(feat.modify)
            for q in info.model_queries:
                if q in modified:
                    continue
                ty = info.attributes[q]
                unchanged = F.Cmp("=", F.Sym(q, ty), F.OldSym(q, ty))
                goal = self.engine.wp_all(feat.body, unchanged)
                self.emit(FRAME, q, goal)
        for kind, provenance, entry_f in self.engine.collect_assertions(self.opts):
            self.emit(kind, provenance, entry_f)
        for clause in feat.require:
            if mentions_creation(clause.expr):
                self.emit(UNSUPPORTED, clause.label, F.TRUE, UNSUPPORTED_REASON)
        for clause in feat.ensure:
            if mentions_creation(clause.expr):
                self.emit(UNSUPPORTED, clause.label, F.TRUE, UNSUPPORTED_REASON)
        for stmt in ast.walk_statements(feat.body):
            if isinstance(stmt, ast.CheckStmt) and mentions_creation(stmt.expr):
                self.emit(UNSUPPORTED, stmt.label, F.TRUE, UNSUPPORTED_REASON)


def generate_obligations(checked: CheckedProgram, opts: VerifyOptions) -> list[Obligation]:
    """Every obligation of the program, in a deterministic order:
    classes and features as declared; within a feature postconditions,
    invariant maintenance, frames, then body assertions in program
    order; invariant clauses that cannot be expressed come last."""
    obligations: list[Obligation] = []
    counters: dict = {}
    for cls in checked.program.classes:
        info = checked.info(cls.name)
        for feat in cls.features:
            gen = _FeatureObligations(checked, info, feat, opts, counters)
            gen.generate()
            obligations.extend(gen.out)
        for i, clause in enumerate(cls.invariant):
            if mentions_creation(clause.expr):
                obligations.append(
                    Obligation(
                        id=f"{cls.name}.invariant.unsupported.{i}",
                        kind=UNSUPPORTED,
                        class_name=cls.name,
                        feature_name="invariant",
                        formula=F.TRUE,
                        provenance=clause.label,
                        unsupported_reason=UNSUPPORTED_REASON,
                    )
                )
    return obligations
