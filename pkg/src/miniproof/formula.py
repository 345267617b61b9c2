"""First-order formulas over finite-domain symbols.

Proof obligations are closed formulas whose leaves are symbols standing
for entry-state values. A symbol's name is a path such as ``balance`` or
``constants.display_message``: paths are atoms here, there is no
dereference operator, so a formula never gets stuck. The heap model this
encodes is deliberately coarse - every non-Void reference of class C is
one representative object - which is documented where domains are built.

Values are Python values: int, bool, str, frozenset[str], Ref, and None
for Void. Arithmetic is unbounded; overflow is expressed by explicit
bound-comparison obligations, not by wrapping here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from . import ast


@dataclass(frozen=True)
class Ref:
    """The representative object of a class; compares equal to itself."""

    class_name: str

    def __str__(self):
        return f"<{self.class_name}>"


Value = Union[int, bool, str, frozenset, Ref, None]


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Sym(Formula):
    name: str
    ty: ast.Type


@dataclass(frozen=True)
class OldSym(Formula):
    """Entry-state value of a path, produced while lowering ensure
    clauses; replaced by a plain Sym once weakest preconditions reach
    the entry point."""

    name: str
    ty: ast.Type


@dataclass(frozen=True)
class Lit(Formula):
    value: Value


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Cmp(Formula):
    op: str  # = /= < <= > >=
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Arith(Formula):
    op: str  # + - *
    left: Formula
    right: Formula


@dataclass(frozen=True)
class HasF(Formula):
    set_expr: Formula
    item: Formula


TRUE = Lit(True)
FALSE = Lit(False)


# -- smart constructors -------------------------------------------------------


def conj(*items: Formula) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if isinstance(f, And):
            flat.extend(f.items)
        elif f == TRUE:
            continue
        elif f == FALSE:
            return FALSE
        else:
            flat.append(f)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*items: Formula) -> Formula:
    flat: list[Formula] = []
    for f in items:
        if isinstance(f, Or):
            flat.extend(f.items)
        elif f == FALSE:
            continue
        elif f == TRUE:
            return TRUE
        else:
            flat.append(f)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: Formula) -> Formula:
    if isinstance(f, Lit) and isinstance(f.value, bool):
        return Lit(not f.value)
    if isinstance(f, Not):
        return f.operand
    return Not(f)


def implies(left: Formula, right: Formula) -> Formula:
    if left == TRUE:
        return right
    if left == FALSE or right == TRUE:
        return TRUE
    if right == FALSE:
        return neg(left)
    return Implies(left, right)


# -- traversal ----------------------------------------------------------------


def children(f: Formula) -> Iterator[Formula]:
    if isinstance(f, Not):
        yield f.operand
    elif isinstance(f, (And, Or)):
        yield from f.items
    elif isinstance(f, (Implies, Cmp, Arith)):
        yield f.left
        yield f.right
    elif isinstance(f, HasF):
        yield f.set_expr
        yield f.item


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from walk(c)


def free_syms(f: Formula) -> dict[str, ast.Type]:
    """Symbols of the formula keyed by name, in sorted-name order."""
    found: dict[str, ast.Type] = {}
    for node in walk(f):
        if isinstance(node, Sym):
            found[node.name] = node.ty
    return dict(sorted(found.items()))


def old_syms(f: Formula) -> dict[str, ast.Type]:
    found: dict[str, ast.Type] = {}
    for node in walk(f):
        if isinstance(node, OldSym):
            found[node.name] = node.ty
    return dict(sorted(found.items()))


# -- substitution and folding ---------------------------------------------------


def _rebuild(f: Formula, parts: list[Formula]) -> Formula:
    if isinstance(f, Not):
        return Not(parts[0])
    if isinstance(f, And):
        return And(tuple(parts))
    if isinstance(f, Or):
        return Or(tuple(parts))
    if isinstance(f, Implies):
        return Implies(parts[0], parts[1])
    if isinstance(f, Cmp):
        return Cmp(f.op, parts[0], parts[1])
    if isinstance(f, Arith):
        return Arith(f.op, parts[0], parts[1])
    if isinstance(f, HasF):
        return HasF(parts[0], parts[1])
    raise TypeError(f"unexpected formula node {f!r}")


def subst(f: Formula, mapping: dict[str, Formula]) -> Formula:
    """Replace symbols by formulas. OldSym leaves are left alone."""
    if isinstance(f, Sym):
        return mapping.get(f.name, f)
    if isinstance(f, (OldSym, Lit)):
        return f
    parts = [subst(c, mapping) for c in children(f)]
    return _rebuild(f, parts)


def unify_old(f: Formula) -> Formula:
    """Turn every OldSym into the plain Sym of the same path: at the
    entry point the current value is the old value."""
    if isinstance(f, OldSym):
        return Sym(f.name, f.ty)
    if isinstance(f, (Sym, Lit)):
        return f
    parts = [unify_old(c) for c in children(f)]
    return _rebuild(f, parts)


def _apply_cmp(op: str, a: Value, b: Value) -> bool:
    if op == "=":
        return a == b
    if op == "/=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _apply_arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    return a * b


def fold(f: Formula) -> Formula:
    """Bottom-up constant folding. Conjunctions and disjunctions collapse
    as soon as one operand decides them, so a formula can fold to a
    literal while some symbols are still unbound."""
    if isinstance(f, (Sym, OldSym, Lit)):
        return f
    if isinstance(f, Not):
        return neg(fold(f.operand))
    if isinstance(f, And):
        return conj(*(fold(c) for c in f.items))
    if isinstance(f, Or):
        return disj(*(fold(c) for c in f.items))
    if isinstance(f, Implies):
        return implies(fold(f.left), fold(f.right))
    if isinstance(f, Cmp):
        left, right = fold(f.left), fold(f.right)
        if isinstance(left, Lit) and isinstance(right, Lit):
            return Lit(_apply_cmp(f.op, left.value, right.value))
        if left == right:
            # reflexivity: values are total, x = x regardless of binding
            if f.op in ("=", "<=", ">="):
                return TRUE
            if f.op in ("/=", "<", ">"):
                return FALSE
        return Cmp(f.op, left, right)
    if isinstance(f, Arith):
        left, right = fold(f.left), fold(f.right)
        if isinstance(left, Lit) and isinstance(right, Lit):
            return Lit(_apply_arith(f.op, left.value, right.value))
        return Arith(f.op, left, right)
    if isinstance(f, HasF):
        s, item = fold(f.set_expr), fold(f.item)
        if isinstance(s, Lit) and isinstance(item, Lit):
            return Lit(item.value is not None and item.value in s.value)
        return HasF(s, item)
    raise TypeError(f"unexpected formula node {f!r}")


def specialize(f: Formula, env: dict[str, Value]) -> Formula:
    """Bind some symbols to values and fold."""
    return fold(subst(f, {name: Lit(value) for name, value in env.items()}))


def evaluate(f: Formula, env: dict[str, Value]) -> Value:
    """Total evaluation; every free symbol must be bound."""
    if isinstance(f, Sym):
        return env[f.name]
    if isinstance(f, OldSym):
        raise ValueError(f"old symbol {f.name} survived to evaluation")
    if isinstance(f, Lit):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.operand, env)
    if isinstance(f, And):
        return all(evaluate(c, env) for c in f.items)
    if isinstance(f, Or):
        return any(evaluate(c, env) for c in f.items)
    if isinstance(f, Implies):
        return (not evaluate(f.left, env)) or bool(evaluate(f.right, env))
    if isinstance(f, Cmp):
        return _apply_cmp(f.op, evaluate(f.left, env), evaluate(f.right, env))
    if isinstance(f, Arith):
        return _apply_arith(f.op, evaluate(f.left, env), evaluate(f.right, env))
    if isinstance(f, HasF):
        item = evaluate(f.item, env)
        return item is not None and item in evaluate(f.set_expr, env)
    raise TypeError(f"unexpected formula node {f!r}")


# -- rendering ----------------------------------------------------------------


def value_text(v: Value) -> str:
    if v is None:
        return "Void"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, frozenset):
        return "{" + ", ".join(f'"{s}"' for s in sorted(v)) + "}"
    if isinstance(v, Ref):
        return str(v)
    raise TypeError(f"unexpected value {v!r}")


_PREC = {
    "implies": 1,
    "or": 2,
    "and": 3,
    "cmp": 4,
    "+": 5,
    "-": 5,
    "*": 6,
}


def to_text(f: Formula) -> str:
    text, _ = _text(f)
    return text


def _text(f: Formula) -> tuple[str, int]:
    atom = 9
    if isinstance(f, Sym):
        return f.name, atom
    if isinstance(f, OldSym):
        return f"old {f.name}", 7
    if isinstance(f, Lit):
        return value_text(f.value), atom
    if isinstance(f, Not):
        inner = _wrap(f.operand, 7)
        return f"not {inner}", 7
    if isinstance(f, And):
        return " and ".join(_wrap(c, _PREC["and"]) for c in f.items), _PREC["and"]
    if isinstance(f, Or):
        return " or ".join(_wrap(c, _PREC["or"]) for c in f.items), _PREC["or"]
    if isinstance(f, Implies):
        left = _wrap(f.left, _PREC["implies"] + 1)
        right = _wrap(f.right, _PREC["implies"])
        return f"{left} implies {right}", _PREC["implies"]
    if isinstance(f, Cmp):
        left = _wrap(f.left, _PREC["cmp"] + 1)
        right = _wrap(f.right, _PREC["cmp"] + 1)
        return f"{left} {f.op} {right}", _PREC["cmp"]
    if isinstance(f, Arith):
        prec = _PREC[f.op]
        left = _wrap(f.left, prec)
        right = _wrap(f.right, prec + 1)
        return f"{left} {f.op} {right}", prec
    if isinstance(f, HasF):
        recv = _wrap(f.set_expr, 9)
        return f"{recv}.has({to_text(f.item)})", 9
    raise TypeError(f"unexpected formula node {f!r}")


def _wrap(f: Formula, min_prec: int) -> str:
    text, prec = _text(f)
    if prec < min_prec:
        return f"({text})"
    return text
