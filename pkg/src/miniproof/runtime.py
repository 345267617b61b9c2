"""Runtime contract monitoring.

The interpreter executes features under full monitoring: preconditions
in declaration order on entry, entry snapshots of every `old` operand
and every model query, a step budget over the body, then postconditions,
the frame condition, and the class invariant on exit. The invariant is
checked after creation and after every call, including nested ones.

Replay turns a discharge counterexample back into a concrete execution:
it materializes the described entry state, invokes the owning feature
under monitoring, and reports whether the violation named by the
obligation fires.
"""

from __future__ import annotations

import json
from collections import ChainMap
from dataclasses import dataclass, field
from typing import Mapping

from . import ast
from . import formula as F
from .analyzer import CheckedProgram, ClassInfo
from .errors import (
    ContractViolation,
    ParseError,
    ReplayImpossible,
    StepBudgetExceeded,
    UnsupportedInContract,
    VoidCall,
    VoidDereference,
)
from .pretty import expr_text
from .vcgen import (
    CALLEE_PRECONDITION,
    CHECK_ASSERTION,
    FRAME,
    INVARIANT_MAINTENANCE,
    OVERFLOW,
    POSTCONDITION,
    VOID_DEREFERENCE,
    Obligation,
    VerifyOptions,
    _arith_postorder,
    type_default,
)

DEFAULT_STEP_BUDGET = 10_000


class RuntimeObject:
    """One heap object: a class name and its mutable fields."""

    __slots__ = ("class_name", "fields")

    def __init__(self, class_name: str, fields: dict):
        self.class_name = class_name
        self.fields = fields

    def __repr__(self):
        return f"<{self.class_name} {self.fields!r}>"


def blank_object(info: ClassInfo) -> RuntimeObject:
    return RuntimeObject(
        info.name, {name: type_default(ty) for name, ty in info.attributes.items()}
    )


# -- expression evaluation ------------------------------------------------------


def eval_expr(expr: ast.Expr, env: Mapping, old_env: Mapping | None = None):
    """Strict evaluation of a contract or body expression. env maps
    parameter and attribute names to values; old_env maps the source
    text of each `old` operand to its entry snapshot."""
    if isinstance(expr, ast.IntLit):
        return expr.value
    if isinstance(expr, ast.BoolLit):
        return expr.value
    if isinstance(expr, ast.StrLit):
        return expr.value
    if isinstance(expr, ast.VoidLit):
        return None
    if isinstance(expr, ast.SetLit):
        return frozenset(expr.items)
    if isinstance(expr, ast.Name):
        return env[expr.name]
    if isinstance(expr, ast.Qualified):
        receiver = env[expr.receiver]
        if receiver is None:
            raise VoidDereference(f"{expr.receiver}.{expr.attr}")
        return receiver.fields[expr.attr]
    if isinstance(expr, ast.Old):
        if old_env is None:
            raise ValueError("old outside a postcondition context")
        return old_env[expr_text(expr.expr)]
    if isinstance(expr, ast.Unary):
        return not eval_expr(expr.expr, env, old_env)
    if isinstance(expr, ast.Has):
        item = eval_expr(expr.item, env, old_env)
        collection = eval_expr(expr.receiver, env, old_env)
        return item is not None and item in collection
    if isinstance(expr, ast.Binary):
        if expr.op == "and":
            return eval_expr(expr.left, env, old_env) and eval_expr(expr.right, env, old_env)
        if expr.op == "or":
            return eval_expr(expr.left, env, old_env) or eval_expr(expr.right, env, old_env)
        if expr.op == "implies":
            return (not eval_expr(expr.left, env, old_env)) or bool(
                eval_expr(expr.right, env, old_env)
            )
        left = eval_expr(expr.left, env, old_env)
        right = eval_expr(expr.right, env, old_env)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "=":
            return left == right
        if expr.op == "/=":
            return left != right
        if expr.op == "<":
            return left < right
        if expr.op == "<=":
            return left <= right
        if expr.op == ">":
            return left > right
        return left >= right
    if isinstance(expr, ast.CreateExpr):
        raise UnsupportedInContract(f"creation expression create {expr.class_name}")
    raise TypeError(f"unexpected expression {expr!r}")


# -- the monitored interpreter ---------------------------------------------------


class Interpreter:
    def __init__(
        self,
        checked: CheckedProgram,
        options: VerifyOptions | None = None,
        step_budget: int = DEFAULT_STEP_BUDGET,
    ):
        self.checked = checked
        self.options = options or VerifyOptions()
        self.step_budget = step_budget
        self._steps_left = 0
        self._frames: list[tuple[str, str]] = []  # (class, feature) call stack

    # entry points: each top-level create/call gets a fresh step budget

    def create(self, class_name: str) -> RuntimeObject:
        info = self.checked.info(class_name)
        obj = blank_object(info)
        self._steps_left = self.step_budget
        self._invoke(obj, info.routines[info.creator], [])
        return obj

    def call(self, obj: RuntimeObject | None, feature_name: str, args: list) -> None:
        if obj is None:
            raise VoidCall(feature_name)
        info = self.checked.info(obj.class_name)
        self._steps_left = self.step_budget
        self._invoke(obj, info.routines[feature_name], args)

    # monitored invocation (shared by top-level and nested calls)

    def _invoke(self, obj: RuntimeObject, feat: ast.Feature, args: list):
        info = self.checked.info(obj.class_name)
        params = {p.name: v for p, v in zip(feat.params, args)}
        env = ChainMap(params, obj.fields)

        def violation(kind: str, label: str) -> ContractViolation:
            return ContractViolation(kind, label, info.name, feat.name, dict(env))

        for clause in feat.require:
            if not eval_expr(clause.expr, env):
                raise violation("precondition", clause.label)

        old_env: dict = {}
        for clause in feat.ensure:
            for node in ast.walk_expr(clause.expr):
                if isinstance(node, ast.Old):
                    key = expr_text(node.expr)
                    if key not in old_env:
                        old_env[key] = eval_expr(node.expr, env)
        entry_queries = {q: obj.fields[q] for q in info.model_queries}

        self._frames.append((info.name, feat.name))
        try:
            self._exec_block(obj, env, feat.body)
        finally:
            self._frames.pop()

        for clause in feat.ensure:
            if not eval_expr(clause.expr, env, old_env):
                raise violation("postcondition", clause.label)
        if feat.modify is not None:
            allowed = set(feat.modify)
            for q in info.model_queries:
                if q not in allowed and obj.fields[q] != entry_queries[q]:
                    raise violation("frame", q)
        self._check_invariant(obj, env, feat)

    def _check_invariant(self, obj: RuntimeObject, env, feat: ast.Feature):
        info = self.checked.info(obj.class_name)
        for clause in info.decl.invariant:
            if not eval_expr(clause.expr, env):
                raise ContractViolation(
                    "invariant", clause.label, info.name, feat.name, dict(env)
                )

    # body execution

    def _exec_block(self, obj: RuntimeObject, env, stmts: list[ast.Statement]):
        for s in stmts:
            self._exec(obj, env, s)

    def _exec(self, obj: RuntimeObject, env, s: ast.Statement):
        if self._steps_left <= 0:
            raise StepBudgetExceeded(
                f"step budget of {self.step_budget} statements exceeded"
            )
        self._steps_left -= 1
        if isinstance(s, ast.Assign):
            obj.fields[s.target] = self._eval_body(s.value, env)
        elif isinstance(s, ast.QualifiedAssign):
            value = self._eval_body(s.value, env)
            receiver = env[s.receiver]
            if receiver is None:
                raise VoidDereference(f"{s.receiver}.{s.attr}")
            receiver.fields[s.attr] = value
        elif isinstance(s, ast.CreateStmt):
            target_class = self.checked.info(obj.class_name).attributes[s.target].class_name
            target_info = self.checked.info(target_class)
            created = blank_object(target_info)
            self._invoke(created, target_info.routines[target_info.creator], [])
            obj.fields[s.target] = created
        elif isinstance(s, ast.CallStmt):
            receiver = env[s.receiver]
            if receiver is None:
                raise VoidCall(f"{s.receiver}.{s.feature}")
            arg_values = [self._eval_body(a, env) for a in s.args]
            callee_info = self.checked.info(receiver.class_name)
            self._invoke(receiver, callee_info.routines[s.feature], arg_values)
        elif isinstance(s, ast.IfStmt):
            if self._eval_body(s.cond, env):
                self._exec_block(obj, env, s.then_branch)
            else:
                self._exec_block(obj, env, s.else_branch)
        elif isinstance(s, ast.CheckStmt):
            if not eval_expr(s.expr, env):
                cls, feat = self._frames[-1]
                raise ContractViolation("check", s.label, cls, feat, dict(env))
        else:
            raise TypeError(f"unexpected statement {s!r}")

    def _eval_body(self, expr: ast.Expr, env):
        """Body expressions evaluate like contract expressions, except
        that each arithmetic result is bounds-checked when overflow
        monitoring is on - the dynamic mirror of Overflow obligations."""
        if isinstance(expr, ast.Binary) and expr.op in ast.ARITH_OPS:
            left = self._eval_body(expr.left, env)
            right = self._eval_body(expr.right, env)
            if expr.op == "+":
                value = left + right
            elif expr.op == "-":
                value = left - right
            else:
                value = left * right
            if self.options.check_overflow:
                lo, hi = self.options.overflow_bounds
                if not lo <= value <= hi:
                    cls, feat = self._frames[-1]
                    raise ContractViolation("overflow", expr_text(expr), cls, feat, dict(env))
            return value
        if isinstance(expr, ast.Binary):
            # rebuild on children so nested arithmetic stays monitored
            if expr.op == "and":
                return self._eval_body(expr.left, env) and self._eval_body(expr.right, env)
            if expr.op == "or":
                return self._eval_body(expr.left, env) or self._eval_body(expr.right, env)
            if expr.op == "implies":
                return (not self._eval_body(expr.left, env)) or bool(
                    self._eval_body(expr.right, env)
                )
            left = self._eval_body(expr.left, env)
            right = self._eval_body(expr.right, env)
            if expr.op == "=":
                return left == right
            if expr.op == "/=":
                return left != right
            if expr.op == "<":
                return left < right
            if expr.op == "<=":
                return left <= right
            if expr.op == ">":
                return left > right
            return left >= right
        if isinstance(expr, ast.Has):
            item = self._eval_body(expr.item, env)
            collection = self._eval_body(expr.receiver, env)
            return item is not None and item in collection
        if isinstance(expr, ast.Unary):
            return not self._eval_body(expr.expr, env)
        return eval_expr(expr, env)


# -- scenarios ------------------------------------------------------------------


@dataclass
class Command:
    kind: str  # "create" | "call"
    var: str
    target: str  # class name for create, feature name for call
    args: list = field(default_factory=list)
    expect: tuple | None = None  # ("ok",) or ("violation", label)
    line: int = 0

    @property
    def text(self) -> str:
        if self.kind == "create":
            return f"create {self.var} : {self.target}"
        rendered = ", ".join(_literal_text(a) for a in self.args)
        return f"call {self.var}.{self.target}({rendered})"


@dataclass
class Scenario:
    commands: list[Command]


def _literal_text(v) -> str:
    if v is None:
        return "Void"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    return str(v)


def _parse_literal(token: str, line_no: int):
    token = token.strip()
    if token == "Void":
        return None
    if token == "true":
        return True
    if token == "false":
        return False
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad scenario literal {token!r}", line_no, 1) from None


def parse_scenario(text: str) -> Scenario:
    commands: list[Command] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "create":
            var, sep, class_name = rest.partition(":")
            if not sep or not var.strip() or not class_name.strip():
                raise ParseError("expected: create <var> : <class>", line_no, 1)
            commands.append(Command("create", var.strip(), class_name.strip(), line=line_no))
        elif head == "call":
            target, paren, arg_text = rest.partition("(")
            if not paren or not arg_text.endswith(")"):
                raise ParseError("expected: call <var>.<feature>(<args>)", line_no, 1)
            var, dot, feature = target.strip().partition(".")
            if not dot or not var or not feature:
                raise ParseError("expected: call <var>.<feature>(<args>)", line_no, 1)
            arg_text = arg_text[:-1].strip()
            args = (
                [_parse_literal(t, line_no) for t in arg_text.split(",")] if arg_text else []
            )
            commands.append(Command("call", var, feature, args, line=line_no))
        elif head == "expect_violation":
            if not commands or commands[-1].expect is not None:
                raise ParseError("expectation must follow a command", line_no, 1)
            if not rest:
                raise ParseError("expected: expect_violation <label>", line_no, 1)
            commands[-1].expect = ("violation", rest)
        elif head == "expect_ok":
            if not commands or commands[-1].expect is not None:
                raise ParseError("expectation must follow a command", line_no, 1)
            commands[-1].expect = ("ok",)
        else:
            raise ParseError(f"unknown scenario command {head!r}", line_no, 1)
    return Scenario(commands)


@dataclass
class Step:
    command: str
    expected: str
    outcome: str  # "ok" | "violation <kind> <label>" | "error <text>"
    matched: bool
    violation: ContractViolation | None = None


@dataclass
class Trace:
    steps: list[Step]
    objects: dict[str, RuntimeObject]
    ok: bool

    def final_state(self, var: str) -> dict:
        return dict(self.objects[var].fields)


def run_scenario(
    checked: CheckedProgram,
    scenario: Scenario,
    options: VerifyOptions | None = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> Trace:
    interp = Interpreter(checked, options, step_budget)
    objects: dict[str, RuntimeObject] = {}
    steps: list[Step] = []
    ok = True
    for cmd in scenario.commands:
        expected = "ok" if cmd.expect is None or cmd.expect[0] == "ok" else cmd.expect[1]
        violation = None
        outcome = "ok"
        try:
            if cmd.kind == "create":
                objects[cmd.var] = interp.create(cmd.target)
            else:
                if cmd.var not in objects:
                    raise ParseError(f"unknown scenario variable {cmd.var}", cmd.line, 1)
                interp.call(objects[cmd.var], cmd.target, list(cmd.args))
        except ContractViolation as cv:
            violation = cv
            outcome = f"violation {cv.kind} {cv.label}"
        except (VoidDereference, StepBudgetExceeded, UnsupportedInContract) as exc:
            outcome = f"error {type(exc).__name__}: {exc}"
        if cmd.expect is not None and cmd.expect[0] == "violation":
            matched = violation is not None and violation.label == cmd.expect[1]
        else:
            matched = outcome == "ok"
        steps.append(Step(cmd.text, expected, outcome, matched, violation))
        if not matched:
            ok = False
            break
    return Trace(steps, objects, ok)


def snapshot_value(v):
    if isinstance(v, RuntimeObject):
        return {"ref": v.class_name}
    if isinstance(v, frozenset):
        return sorted(v)
    return v


def trace_text(trace: Trace) -> str:
    lines = []
    for step in trace.steps:
        status = "ok" if step.matched else "MISMATCH"
        lines.append(f"{status:8s} {step.command}  ->  {step.outcome}")
    for var in trace.objects:
        fields = trace.objects[var].fields
        rendered = ", ".join(
            f"{name} = {F.value_text(_as_formula_value(fields[name]))}" for name in fields
        )
        lines.append(f"{var}: {rendered}")
    lines.append("scenario " + ("ok" if trace.ok else "failed"))
    return "\n".join(lines)


def _as_formula_value(v):
    if isinstance(v, RuntimeObject):
        return F.Ref(v.class_name)
    return v


def trace_payload(trace: Trace) -> dict:
    return {
        "steps": [
            {
                "command": s.command,
                "expected": s.expected,
                "outcome": s.outcome,
                "matched": s.matched,
            }
            for s in trace.steps
        ],
        "objects": {
            var: {name: snapshot_value(value) for name, value in obj.fields.items()}
            for var, obj in trace.objects.items()
        },
        "ok": trace.ok,
    }


def trace_json(trace: Trace) -> str:
    return json.dumps(trace_payload(trace), indent=2)


# -- counterexample replay -------------------------------------------------------

_RUNTIME_KIND = {
    POSTCONDITION: "postcondition",
    INVARIANT_MAINTENANCE: "invariant",
    FRAME: "frame",
    CALLEE_PRECONDITION: "precondition",
    OVERFLOW: "overflow",
    CHECK_ASSERTION: "check",
}


def synthesize_entry_state(
    checked: CheckedProgram, obligation: Obligation, counterexample: dict
) -> tuple[RuntimeObject, list]:
    """Materialize the receiver object and argument list a counterexample
    describes. Paths are set directly on the object graph; one shared
    representative object realizes all non-Void references of a class,
    matching the heap model the formulas were built on. Havoc symbols
    (name@k) describe mid-body states and are skipped. Raises
    ReplayImpossible for contradictory descriptions, such as attribute
    values under a reference the counterexample binds to Void."""
    info = checked.info(obligation.class_name)
    feat = info.routines[obligation.feature_name]
    param_names = [p.name for p in feat.params]
    representatives: dict[str, RuntimeObject] = {}

    def materialize(value):
        if isinstance(value, F.Ref):
            if value.class_name not in representatives:
                representatives[value.class_name] = blank_object(checked.info(value.class_name))
            return representatives[value.class_name]
        return value

    obj = blank_object(info)
    params: dict[str, object] = {name: None for name in param_names}
    roots: dict[str, tuple] = {}  # first path segment -> (holder dict, key)

    entries = sorted(counterexample.items(), key=lambda kv: (kv[0].count("."), kv[0]))
    for name, value in entries:
        if "@" in name:
            continue  # mid-body havoc value, not part of the entry state
        segments = name.split(".")
        head, rest = segments[0], segments[1:]
        if head in params:
            holder: dict = params
        elif head in info.attributes:
            holder = obj.fields
        else:
            raise ReplayImpossible(f"counterexample symbol {name} is not in scope")
        if not rest:
            holder[head] = materialize(value)
            continue
        current = holder.get(head)
        if current is None:
            if head in counterexample and counterexample[head] is None:
                raise ReplayImpossible(
                    f"counterexample sets {head} to Void but describes {name}"
                )
            ty = info.attributes.get(head)
            if ty is None:
                ty = next(p.ty for p in feat.params if p.name == head)
            current = materialize(F.Ref(ty.class_name))
            holder[head] = current
        for seg in rest[:-1]:
            nxt = current.fields.get(seg)
            if nxt is None:
                seg_ty = checked.info(current.class_name).attributes[seg]
                if seg_ty.kind != ast.REF:
                    raise ReplayImpossible(f"path {name} crosses non-reference {seg}")
                nxt = materialize(F.Ref(seg_ty.class_name))
                current.fields[seg] = nxt
            current = nxt
        current.fields[rest[-1]] = materialize(value)
    args = [params[name] for name in param_names]
    return obj, args


def replay_counterexample(
    checked: CheckedProgram,
    obligation: Obligation,
    counterexample: dict | None,
    options: VerifyOptions | None = None,
) -> bool:
    """True iff running the owning feature from the counterexample's
    entry state reproduces the violation the obligation stands for.
    Discharged obligations have no counterexample: replay is a no-op."""
    if counterexample is None:
        return False
    obj, args = synthesize_entry_state(checked, obligation, counterexample)
    info = checked.info(obligation.class_name)
    feat = info.routines[obligation.feature_name]
    interp = Interpreter(checked, options)
    interp._steps_left = interp.step_budget
    try:
        interp._invoke(obj, feat, args)
    except ContractViolation as cv:
        expected_kind = _RUNTIME_KIND.get(obligation.kind)
        if cv.kind != expected_kind:
            return False
        if obligation.kind == OVERFLOW:
            # the monitor reports the innermost node that leaves the
            # bounds, which may be a subexpression of the obligation's
            return cv.label in _overflow_labels(feat, obligation.provenance)
        return cv.label == obligation.provenance
    except VoidDereference as exc:
        return obligation.kind == VOID_DEREFERENCE and exc.path == obligation.provenance
    return False


def _overflow_labels(feat: ast.Feature, provenance: str) -> frozenset[str]:
    """Texts of the arithmetic node named by an Overflow obligation and
    of every arithmetic node nested inside it."""
    for s in ast.walk_statements(feat.body):
        for e in ast.statement_exprs(s):
            nodes = list(_arith_postorder(e))
            for node in nodes:
                if expr_text(node) == provenance:
                    return frozenset(expr_text(n) for n in _arith_postorder(node))
    return frozenset((provenance,))
