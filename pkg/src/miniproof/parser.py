"""Recursive-descent parser for .ccl sources.

Stops at the first syntax error and reports it with line and column.
"""

from __future__ import annotations

from . import ast
from .errors import ParseError
from .lexer import Token, tokenize

# keywords that terminate a clause or statement list
_CLAUSE_STOP = {"do", "modify", "end", "ensure", "invariant", "feature", "then", "else"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.value in words

    def at_symbol(self, sym: str) -> bool:
        tok = self.peek()
        return tok.kind == "SYMBOL" and tok.value == sym

    def expect_keyword(self, word: str) -> Token:
        tok = self.next()
        if tok.kind != "KEYWORD" or tok.value != word:
            raise ParseError(f"expected '{word}', found {tok.value!r}", tok.line, tok.col)
        return tok

    def expect_symbol(self, sym: str) -> Token:
        tok = self.next()
        if tok.kind != "SYMBOL" or tok.value != sym:
            raise ParseError(f"expected '{sym}', found {tok.value!r}", tok.line, tok.col)
        return tok

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.next()
        if tok.kind != "IDENT":
            raise ParseError(f"expected {what}, found {tok.value!r}", tok.line, tok.col)
        return tok

    @staticmethod
    def pos(tok: Token) -> ast.Pos:
        return ast.Pos(tok.line, tok.col)

    # -- program ----------------------------------------------------------

    def parse_program(self) -> ast.Program:
        classes = [self.parse_class()]
        while self.at_keyword("class"):
            classes.append(self.parse_class())
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"expected 'class' or end of input, found {tok.value!r}", tok.line, tok.col)
        pool = set()
        for cls in classes:
            for clause in cls.invariant:
                pool.update(_strings_in(clause.expr))
            for feat in cls.features:
                for clause in feat.require + feat.ensure:
                    pool.update(_strings_in(clause.expr))
                for stmt in ast.walk_statements(feat.body):
                    for e in ast.statement_exprs(stmt):
                        pool.update(_strings_in(e))
        return ast.Program(classes=classes, string_pool=tuple(sorted(pool)))

    def parse_class(self) -> ast.ClassDecl:
        start = self.expect_keyword("class")
        name = self.expect_ident("class name").value
        model_note = None
        if self.at_keyword("note"):
            self.next()
            key = self.expect_ident("note key")
            if key.value != "model":
                raise ParseError(f"unknown class note {key.value!r}", key.line, key.col)
            self.expect_symbol(":")
            model_note = self.parse_name_list()
        create_name = None
        if self.at_keyword("create"):
            self.next()
            create_name = self.expect_ident("creation feature name").value
        attributes: list[ast.Attribute] = []
        features: list[ast.Feature] = []
        while self.at_keyword("feature"):
            self.next()
            while not self.at_keyword("feature", "invariant", "end"):
                self.parse_member(attributes, features)
        invariant: list[ast.Clause] = []
        if self.at_keyword("invariant"):
            self.next()
            invariant = self.parse_clauses("invariant")
        self.expect_keyword("end")
        if create_name is not None:
            for feat in features:
                if feat.name == create_name:
                    feat.is_creator = True
        return ast.ClassDecl(
            name=name,
            model_note=model_note,
            create_name=create_name,
            attributes=attributes,
            features=features,
            invariant=invariant,
            pos=self.pos(start),
        )

    def parse_name_list(self) -> list[str]:
        names = [self.expect_ident().value]
        while self.at_symbol(","):
            self.next()
            names.append(self.expect_ident().value)
        return names

    # -- class members ----------------------------------------------------

    def parse_member(self, attributes: list[ast.Attribute], features: list[ast.Feature]):
        name = self.expect_ident("feature or attribute name")
        if self.at_symbol(":"):
            self.next()
            ty = self.parse_type()
            attributes.append(ast.Attribute(name.value, ty, pos=self.pos(name)))
            return
        features.append(self.parse_routine(name))

    def parse_type(self) -> ast.Type:
        tok = self.expect_ident("type name")
        if tok.value in ast.BUILTIN_TYPES:
            return ast.Type(tok.value)
        return ast.ref(tok.value)

    def parse_routine(self, name: Token) -> ast.Feature:
        params: list[ast.Param] = []
        if self.at_symbol("("):
            self.next()
            while True:
                pname = self.expect_ident("parameter name")
                self.expect_symbol(":")
                pty = self.parse_type()
                params.append(ast.Param(pname.value, pty, pos=self.pos(pname)))
                if self.at_symbol(";") or self.at_symbol(","):
                    self.next()
                    continue
                break
            self.expect_symbol(")")
        is_creator = False
        if self.at_keyword("note"):
            self.next()
            key = self.expect_ident("note key")
            if key.value != "status":
                raise ParseError(f"unknown feature note {key.value!r}", key.line, key.col)
            self.expect_symbol(":")
            status = self.expect_ident("status value")
            if status.value != "creator":
                raise ParseError(f"unknown status {status.value!r}", status.line, status.col)
            is_creator = True
        require: list[ast.Clause] = []
        if self.at_keyword("require"):
            self.next()
            require = self.parse_clauses("require")
        modify: list[str] | None = None
        if self.at_keyword("modify"):
            self.next()
            modify = self.parse_name_list() if self.peek().kind == "IDENT" else []
        self.expect_keyword("do")
        body = self.parse_statements()
        ensure: list[ast.Clause] = []
        if self.at_keyword("ensure"):
            self.next()
            ensure = self.parse_clauses("ensure")
        self.expect_keyword("end")
        return ast.Feature(
            name=name.value,
            params=params,
            is_creator=is_creator,
            require=require,
            modify=modify,
            body=body,
            ensure=ensure,
            pos=self.pos(name),
        )

    def parse_clauses(self, section: str) -> list[ast.Clause]:
        clauses: list[ast.Clause] = []
        while True:
            tok = self.peek()
            if tok.kind == "EOF":
                break
            if tok.kind == "KEYWORD" and tok.value in _CLAUSE_STOP:
                break
            label = None
            if tok.kind == "IDENT" and self.peek(1).kind == "SYMBOL" and self.peek(1).value == ":":
                label = self.next().value
                self.next()
            expr = self.parse_expr()
            if label is None:
                clauses.append(
                    ast.Clause(f"{section}_{len(clauses) + 1}", expr, synthesized=True, pos=self.pos(tok))
                )
            else:
                clauses.append(ast.Clause(label, expr, pos=self.pos(tok)))
        return clauses

    # -- statements -------------------------------------------------------

    def parse_statements(self) -> list[ast.Statement]:
        stmts: list[ast.Statement] = []
        while True:
            tok = self.peek()
            if tok.kind == "KEYWORD" and tok.value in ("end", "else", "ensure"):
                break
            if tok.kind == "EOF":
                break
            stmts.append(self.parse_statement())
        return stmts

    def parse_statement(self) -> ast.Statement:
        tok = self.peek()
        if self.at_keyword("create"):
            self.next()
            target = self.expect_ident("creation target").value
            creator = None
            if self.at_symbol("."):
                self.next()
                creator = self.expect_ident("creator name").value
            return ast.CreateStmt(target, creator, pos=self.pos(tok))
        if self.at_keyword("if"):
            self.next()
            cond = self.parse_expr()
            self.expect_keyword("then")
            then_branch = self.parse_statements()
            else_branch: list[ast.Statement] = []
            if self.at_keyword("else"):
                self.next()
                else_branch = self.parse_statements()
            self.expect_keyword("end")
            return ast.IfStmt(cond, then_branch, else_branch, pos=self.pos(tok))
        if self.at_keyword("check"):
            self.next()
            label = "check_1"
            synthesized = True
            if self.peek().kind == "IDENT" and self.peek(1).kind == "SYMBOL" and self.peek(1).value == ":":
                label = self.next().value
                self.next()
                synthesized = False
            expr = self.parse_expr()
            self.expect_keyword("end")
            return ast.CheckStmt(label, expr, synthesized=synthesized, pos=self.pos(tok))
        name = self.expect_ident("statement")
        if self.at_symbol(":="):
            self.next()
            return ast.Assign(name.value, self.parse_expr(), pos=self.pos(name))
        if self.at_symbol("."):
            self.next()
            member = self.expect_ident("feature or attribute name").value
            if self.at_symbol(":="):
                self.next()
                return ast.QualifiedAssign(name.value, member, self.parse_expr(), pos=self.pos(name))
            args: list[ast.Expr] = []
            if self.at_symbol("("):
                self.next()
                if not self.at_symbol(")"):
                    args.append(self.parse_expr())
                    while self.at_symbol(","):
                        self.next()
                        args.append(self.parse_expr())
                self.expect_symbol(")")
            return ast.CallStmt(name.value, member, args, pos=self.pos(name))
        raise ParseError(f"expected statement, found {name.value!r}", name.line, name.col)

    # -- expressions --------------------------------------------------------
    # precedence, loosest first: implies | or | and | comparison | + - | * | unary | postfix

    def parse_expr(self) -> ast.Expr:
        return self.parse_implies()

    def parse_implies(self) -> ast.Expr:
        left = self.parse_or()
        if self.at_keyword("implies"):
            tok = self.next()
            right = self.parse_implies()  # right associative
            return ast.Binary("implies", left, right, pos=self.pos(tok))
        return left

    def parse_or(self) -> ast.Expr:
        left = self.parse_and()
        while self.at_keyword("or"):
            tok = self.next()
            left = ast.Binary("or", left, self.parse_and(), pos=self.pos(tok))
        return left

    def parse_and(self) -> ast.Expr:
        left = self.parse_comparison()
        while self.at_keyword("and"):
            tok = self.next()
            left = ast.Binary("and", left, self.parse_comparison(), pos=self.pos(tok))
        return left

    def parse_comparison(self) -> ast.Expr:
        left = self.parse_additive()
        if self.peek().kind == "SYMBOL" and self.peek().value in ast.COMPARISON_OPS:
            tok = self.next()
            return ast.Binary(tok.value, left, self.parse_additive(), pos=self.pos(tok))
        return left

    def parse_additive(self) -> ast.Expr:
        left = self.parse_multiplicative()
        while self.peek().kind == "SYMBOL" and self.peek().value in ("+", "-"):
            tok = self.next()
            left = ast.Binary(tok.value, left, self.parse_multiplicative(), pos=self.pos(tok))
        return left

    def parse_multiplicative(self) -> ast.Expr:
        left = self.parse_unary()
        while self.at_symbol("*"):
            tok = self.next()
            left = ast.Binary("*", left, self.parse_unary(), pos=self.pos(tok))
        return left

    def parse_unary(self) -> ast.Expr:
        if self.at_keyword("not"):
            tok = self.next()
            return ast.Unary("not", self.parse_unary(), pos=self.pos(tok))
        if self.at_keyword("old"):
            tok = self.next()
            return ast.Old(self.parse_unary(), pos=self.pos(tok))
        if self.at_symbol("-"):
            tok = self.next()
            operand = self.parse_unary()
            if isinstance(operand, ast.IntLit):
                return ast.IntLit(-operand.value, pos=self.pos(tok))
            raise ParseError("unary minus applies to integer literals only", tok.line, tok.col)
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Expr:
        expr = self.parse_atom()
        while self.at_symbol("."):
            dot = self.peek()
            if self.peek(1).kind == "IDENT" and self.peek(1).value == "has":
                self.next()
                self.next()
                self.expect_symbol("(")
                item = self.parse_expr()
                self.expect_symbol(")")
                expr = ast.Has(expr, item, pos=self.pos(dot))
                continue
            raise ParseError(
                "only one level of qualification is supported (receiver.attr or set.has(..))",
                dot.line,
                dot.col,
            )
        return expr

    def parse_atom(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return ast.IntLit(int(tok.value), pos=self.pos(tok))
        if tok.kind == "STRING":
            self.next()
            return ast.StrLit(tok.value, pos=self.pos(tok))
        if self.at_keyword("true") or self.at_keyword("false"):
            self.next()
            return ast.BoolLit(tok.value == "true", pos=self.pos(tok))
        if self.at_keyword("Void"):
            self.next()
            return ast.VoidLit(pos=self.pos(tok))
        if self.at_keyword("create"):
            self.next()
            cname = self.expect_ident("class name").value
            return ast.CreateExpr(cname, pos=self.pos(tok))
        if self.at_symbol("("):
            self.next()
            inner = self.parse_expr()
            self.expect_symbol(")")
            return inner
        if self.at_symbol("{"):
            self.next()
            items: list[str] = []
            if not self.at_symbol("}"):
                while True:
                    item = self.next()
                    if item.kind != "STRING":
                        raise ParseError("set displays hold string literals only", item.line, item.col)
                    items.append(item.value)
                    if self.at_symbol(","):
                        self.next()
                        continue
                    break
            self.expect_symbol("}")
            return ast.SetLit(tuple(items), pos=self.pos(tok))
        if tok.kind == "IDENT":
            self.next()
            if self.at_symbol(".") and self.peek(1).kind == "IDENT" and self.peek(1).value != "has":
                self.next()
                attr = self.expect_ident().value
                return ast.Qualified(tok.value, attr, pos=self.pos(tok))
            return ast.Name(tok.value, pos=self.pos(tok))
        raise ParseError(f"expected expression, found {tok.value!r}", tok.line, tok.col)


def _strings_in(e: ast.Expr):
    for node in ast.walk_expr(e):
        if isinstance(node, ast.StrLit):
            yield node.value
        elif isinstance(node, ast.SetLit):
            yield from node.items


def parse(text: str) -> ast.Program:
    """Parse a .ccl source into a Program. Raises ParseError on the first
    lexical or syntactic problem."""
    return _Parser(tokenize(text)).parse_program()
