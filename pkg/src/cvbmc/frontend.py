"""MiniC frontend: lexer, parser, type checker, function hashing, call graph.

parse_and_check is the single entry point; it returns a fully typed Program
or raises a SourceError/CheckFailure with line:col positions. The grammar:

    program := (global | funcdef)*
    type    := bool | u8 | u16 | u32 | i8 | i16 | i32
    funcdef := (type | void) IDENT "(" params? ")" block
    stmt    := type IDENT ("[" INTLIT "]")? ("=" expr)? ";"
             | IDENT "=" expr ";"
             | IDENT "[" expr "]" "=" expr ";"
             | "if" "(" expr ")" block ("else" block)?
             | "while" "(" expr ")" block
             | "for" "(" stmt expr ";" stmt ")" block
             | "assert" "(" expr ")" ";"
             | "assume" "(" expr ")" ";"
             | "return" expr? ";"
             | IDENT "(" args? ")" ";"
    expr    := C precedence over - ~ ! + - * / % & | ^ << >> == != < <= > >=
               && ||, with array indexing, calls, cast<T>(e), the
               nondet_<type>() intrinsics, true/false, decimal and 0x
               literals, // and /* */ comments.

There are no implicit conversions: both operands of every binary operator
must have identical types (use cast<T>(e)), conditions and assert/assume
arguments must be bool.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

from .lang import (
    ArrayType, Assert, Assign, Assume, Binary, BOOL, Call, CallStmt, Cast,
    Decl, Expr, For, FunctionDef, GlobalDecl, If, INT_TYPES, Lit,
    MAX_ARRAY_SIZE, Nondet, Param, Program, Return, ScalarType, Span, Stmt,
    Store, stmt_sexp, SURFACE_TYPES, Unary, Var, While, ArrayRead, walk_exprs,
)

KEYWORDS = {
    "bool", "u8", "u16", "u32", "i8", "i16", "i32", "void", "if", "else",
    "while", "for", "assert", "assume", "return", "true", "false", "cast",
}

NONDET_INTRINSICS = {f"nondet_{t}": ty for t, ty in SURFACE_TYPES.items()}


class SourceError(Exception):
    """Base for diagnostics that point at a source location."""

    def __init__(self, message: str, span: Span = Span()):
        super().__init__(f"{span.line}:{span.col}: {message}")
        self.message = message
        self.span = span


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class TypeCheckError(SourceError):
    pass


class CheckFailure(Exception):
    """Aggregates all type errors found in a compilation unit."""

    def __init__(self, diagnostics: list):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


# ---------------------------------------------------------------------------
# Lexer


@dataclass
class Token:
    kind: str  # IDENT, INT, PUNCT, EOF
    text: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col)


PUNCTUATION = [
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "(", ")", "{", "}", "[", "]", ";", ",", "=",
    "+", "-", "*", "/", "%", "&", "|", "^", "<", ">", "!", "~",
]


def tokenize(source: str) -> list:
    tokens = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", Span(line, col))
            skipped = source[i:end + 2]
            newlines = skipped.count("\n")
            if newlines:
                line += newlines
                col = len(skipped) - skipped.rfind("\n")
            else:
                col += len(skipped)
            i = end + 2
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            text = source[start:i]
            tokens.append(Token("IDENT", text, line, col))
            col += i - start
            continue
        if c.isdigit():
            start = i
            if source.startswith("0x", i) or source.startswith("0X", i):
                i += 2
                while i < n and source[i] in "0123456789abcdefABCDEF":
                    i += 1
                if i == start + 2:
                    raise LexError("malformed hex literal", Span(line, col))
            else:
                while i < n and source[i].isdigit():
                    i += 1
            tokens.append(Token("INT", source[start:i], line, col))
            col += i - start
            continue
        for p in PUNCTUATION:
            if source.startswith(p, i):
                tokens.append(Token("PUNCT", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise LexError(f"unexpected character {c!r}", Span(line, col))
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser

# Binary operator precedence, loosest first (C order).
PRECEDENCE = [
    ["||"],
    ["&&"],
    ["|"],
    ["^"],
    ["&"],
    ["==", "!="],
    ["<", "<=", ">", ">="],
    ["<<", ">>"],
    ["+", "-"],
    ["*", "/", "%"],
]


class Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0
        self.next_nondet_id = 0
        self.next_loop_id = 0
        self.next_site_id = 0
        self.func_start_line = 1

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "EOF" and text != "":
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.span)
        return self.advance()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text in KEYWORDS:
            raise ParseError(f"expected identifier, found {tok.text or 'end of input'!r}", tok.span)
        return self.advance()

    def span(self, tok: Token) -> Span:
        return Span(tok.line, tok.col, tok.line - self.func_start_line + 1)

    def at_type(self) -> bool:
        return self.peek().text in SURFACE_TYPES

    # -- top level ---------------------------------------------------------

    def parse_program(self) -> Program:
        functions, globals_ = [], []
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.text == "void" or (self.at_type() and self.peek(2).text == "("):
                functions.append(self.parse_funcdef())
            elif self.at_type():
                globals_.append(self.parse_global())
            else:
                raise ParseError(
                    f"expected type or 'void' at top level, found {tok.text!r}", tok.span)
        return Program(functions, globals_)

    def parse_global(self) -> GlobalDecl:
        type_tok = self.advance()
        ty: object = SURFACE_TYPES[type_tok.text]
        name = self.expect_ident()
        if self.peek().text == "[":
            self.advance()
            size_tok = self.advance()
            if size_tok.kind != "INT":
                raise ParseError("array size must be an integer literal", size_tok.span)
            ty = ArrayType(ty, parse_int_literal(size_tok))
            self.expect("]")
        init = None
        if self.peek().text == "=":
            self.advance()
            negative = False
            if self.peek().text == "-":
                self.advance()
                negative = True
            lit_tok = self.advance()
            if lit_tok.kind == "INT":
                init = -parse_int_literal(lit_tok) if negative else parse_int_literal(lit_tok)
            elif lit_tok.text in ("true", "false") and not negative:
                init = 1 if lit_tok.text == "true" else 0
            else:
                raise ParseError("global initializer must be a constant literal", lit_tok.span)
        self.expect(";")
        return GlobalDecl(name.text, ty, init, Span(type_tok.line, type_tok.col))

    def parse_funcdef(self) -> FunctionDef:
        type_tok = self.advance()
        ret = None if type_tok.text == "void" else SURFACE_TYPES[type_tok.text]
        name = self.expect_ident()
        if name.text in NONDET_INTRINSICS:
            raise ParseError(f"{name.text!r} is a reserved intrinsic name", name.span)
        self.func_start_line = type_tok.line
        self.expect("(")
        params = []
        if self.peek().text != ")":
            while True:
                ptype_tok = self.advance()
                if ptype_tok.text not in SURFACE_TYPES:
                    raise ParseError(f"expected parameter type, found {ptype_tok.text!r}",
                                     ptype_tok.span)
                pname = self.expect_ident()
                params.append(Param(pname.text, SURFACE_TYPES[ptype_tok.text]))
                if self.peek().text != ",":
                    break
                self.advance()
        self.expect(")")
        body = self.parse_block()
        return FunctionDef(name.text, params, ret, body,
                           Span(type_tok.line, type_tok.col, 1))

    def parse_block(self) -> list:
        self.expect("{")
        stmts = []
        while self.peek().text != "}":
            if self.peek().kind == "EOF":
                raise ParseError("unterminated block", self.peek().span)
            stmts.append(self.parse_stmt())
        self.expect("}")
        return stmts

    # -- statements ---------------------------------------------------------

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if self.at_type():
            return self.parse_decl()
        if tok.text == "if":
            return self.parse_if()
        if tok.text == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_block()
            loop_id = self.next_loop_id
            self.next_loop_id += 1
            return While(self.span(tok), cond, body, loop_id)
        if tok.text == "for":
            self.advance()
            self.expect("(")
            init = self.parse_stmt()
            cond = self.parse_expr()
            self.expect(";")
            step = self.parse_stmt()
            self.expect(")")
            body = self.parse_block()
            loop_id = self.next_loop_id
            self.next_loop_id += 1
            return For(self.span(tok), init, cond, step, body, loop_id)
        if tok.text == "assert":
            self.advance()
            self.expect("(")
            e = self.parse_expr()
            self.expect(")")
            self.expect(";")
            return Assert(self.span(tok), e)
        if tok.text == "assume":
            self.advance()
            self.expect("(")
            e = self.parse_expr()
            self.expect(")")
            self.expect(";")
            return Assume(self.span(tok), e)
        if tok.text == "return":
            self.advance()
            expr = None
            if self.peek().text != ";":
                expr = self.parse_expr()
            self.expect(";")
            return Return(self.span(tok), expr)
        if tok.kind == "IDENT" and tok.text not in KEYWORDS:
            name = self.advance()
            nxt = self.peek()
            if nxt.text == "=":
                self.advance()
                expr = self.parse_expr()
                self.expect(";")
                if isinstance(expr, Nondet) and not expr.label:
                    expr.label = name.text
                return Assign(self.span(name), name.text, expr)
            if nxt.text == "[":
                self.advance()
                index = self.parse_expr()
                self.expect("]")
                self.expect("=")
                value = self.parse_expr()
                self.expect(";")
                return Store(self.span(name), name.text, index, value)
            if nxt.text == "(":
                self.advance()
                args = self.parse_args()
                self.expect(")")
                self.expect(";")
                site = self.next_site_id
                self.next_site_id += 1
                return CallStmt(self.span(name), name.text, args, site)
            raise ParseError(f"expected '=', '[' or '(' after {name.text!r}", nxt.span)
        raise ParseError(f"expected statement, found {tok.text or 'end of input'!r}", tok.span)

    def parse_decl(self) -> Decl:
        type_tok = self.advance()
        base = SURFACE_TYPES[type_tok.text]
        name = self.expect_ident()
        ty: object = base
        if self.peek().text == "[":
            self.advance()
            size_tok = self.advance()
            if size_tok.kind != "INT":
                raise ParseError("array size must be an integer literal", size_tok.span)
            ty = ArrayType(base, parse_int_literal(size_tok))
            self.expect("]")
        init = None
        if self.peek().text == "=":
            self.advance()
            init = self.parse_expr()
        self.expect(";")
        decl = Decl(self.span(type_tok), name.text, ty, init)
        if init is not None and isinstance(init, Nondet) and not init.label:
            init.label = name.text
        return decl

    def parse_if(self) -> If:
        tok = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_block()
        other = []
        if self.peek().text == "else":
            self.advance()
            other = self.parse_block()
        return If(self.span(tok), cond, then, other)

    def parse_args(self) -> list:
        args = []
        if self.peek().text != ")":
            while True:
                args.append(self.parse_expr())
                if self.peek().text != ",":
                    break
                self.advance()
        return args

    # -- expressions ---------------------------------------------------------

    def parse_expr(self, level: int = 0) -> Expr:
        if level >= len(PRECEDENCE):
            return self.parse_unary()
        lhs = self.parse_expr(level + 1)
        while self.peek().text in PRECEDENCE[level] and self.peek().kind == "PUNCT":
            op = self.advance()
            rhs = self.parse_expr(level + 1)
            lhs = Binary(self.span(op), None, op.text, lhs, rhs)
        return lhs

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.text in ("-", "~", "!") and tok.kind == "PUNCT":
            self.advance()
            operand = self.parse_unary()
            return Unary(self.span(tok), None, tok.text, operand)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return Lit(self.span(tok), None, parse_int_literal(tok))
        if tok.text in ("true", "false"):
            self.advance()
            return Lit(self.span(tok), BOOL, 1 if tok.text == "true" else 0)
        if tok.text == "(":
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if tok.text == "cast":
            self.advance()
            self.expect("<")
            type_tok = self.advance()
            if type_tok.text not in SURFACE_TYPES:
                raise ParseError(f"unknown cast target {type_tok.text!r}", type_tok.span)
            self.expect(">")
            self.expect("(")
            operand = self.parse_expr()
            self.expect(")")
            return Cast(self.span(tok), None, SURFACE_TYPES[type_tok.text], operand)
        if tok.kind == "IDENT" and tok.text in NONDET_INTRINSICS:
            self.advance()
            self.expect("(")
            self.expect(")")
            nid = self.next_nondet_id
            self.next_nondet_id += 1
            return Nondet(self.span(tok), NONDET_INTRINSICS[tok.text], nid, "", (), "")
        if tok.kind == "IDENT" and tok.text not in KEYWORDS:
            name = self.advance()
            if self.peek().text == "(":
                self.advance()
                args = self.parse_args()
                self.expect(")")
                site = self.next_site_id
                self.next_site_id += 1
                return Call(self.span(name), None, name.text, args, site)
            if self.peek().text == "[":
                self.advance()
                index = self.parse_expr()
                self.expect("]")
                return ArrayRead(self.span(name), None, name.text, index)
            return Var(self.span(name), None, name.text)
        raise ParseError(f"expected expression, found {tok.text or 'end of input'!r}", tok.span)


def parse_int_literal(tok: Token) -> int:
    return int(tok.text, 16) if tok.text.lower().startswith("0x") else int(tok.text)


# ---------------------------------------------------------------------------
# Type checker


class FunctionScope:
    def __init__(self, checker: "TypeChecker", func: FunctionDef):
        self.checker = checker
        self.func = func
        self.names: dict = {}  # name -> ScalarType | ArrayType
        for p in func.params:
            self.declare(p.name, p.ty, func.span)

    def declare(self, name: str, ty, span: Span) -> None:
        if name in self.names:
            raise TypeCheckError(f"redeclaration of {name!r} shadows an earlier name", span)
        if self.checker.program.global_decl(name) is not None:
            raise TypeCheckError(f"local {name!r} shadows a global", span)
        if any(f.name == name for f in self.checker.program.functions):
            raise TypeCheckError(f"local {name!r} shadows a function", span)
        self.names[name] = ty

    def lookup(self, name: str, span: Span):
        if name in self.names:
            return self.names[name]
        g = self.checker.program.global_decl(name)
        if g is not None:
            return g.ty
        raise TypeCheckError(f"undeclared name {name!r}", span)


class TypeChecker:
    def __init__(self, program: Program):
        self.program = program
        self.diagnostics: list = []

    def run(self) -> None:
        self.check_toplevel_names()
        for func in self.program.functions:
            try:
                self.check_function(func)
            except TypeCheckError as err:
                self.diagnostics.append(err)
        if not self.diagnostics:
            try:
                self.check_no_recursion()
            except TypeCheckError as err:
                self.diagnostics.append(err)
        if self.diagnostics:
            raise CheckFailure(self.diagnostics)

    def check_toplevel_names(self) -> None:
        seen: dict = {}
        for f in self.program.functions:
            if f.name in seen:
                self.diagnostics.append(
                    TypeCheckError(f"duplicate function {f.name!r}", f.span))
            seen[f.name] = "function"
        for g in self.program.globals:
            if g.name in seen:
                self.diagnostics.append(
                    TypeCheckError(f"global {g.name!r} collides with another name", g.span))
            seen[g.name] = "global"
            if isinstance(g.ty, ArrayType):
                self.check_array_type(g.ty, g.span)
                if g.init is not None:
                    self.diagnostics.append(TypeCheckError(
                        "array globals cannot take initializers (zero-initialized)", g.span))
            elif g.init is not None:
                if not (g.ty.min_value <= g.init <= g.ty.max_value):
                    self.diagnostics.append(TypeCheckError(
                        f"initializer {g.init} out of range for {g.ty}", g.span))
        if self.diagnostics:
            raise CheckFailure(self.diagnostics)

    def check_array_type(self, ty: ArrayType, span: Span) -> None:
        if ty.size < 1:
            raise TypeCheckError("array size must be at least 1", span)
        if ty.size > MAX_ARRAY_SIZE:
            raise TypeCheckError(f"array size exceeds the {MAX_ARRAY_SIZE} element limit", span)

    def check_function(self, func: FunctionDef) -> None:
        scope = FunctionScope(self, func)
        always_returns = self.check_block(func.body, scope, func, in_loop=False)
        if func.return_type is not None and not always_returns:
            raise TypeCheckError(
                f"function {func.name!r}: not every path ends in a return", func.span)

    def check_block(self, body: list, scope: FunctionScope, func: FunctionDef,
                    in_loop: bool) -> bool:
        """Check statements; returns True when every path through the block
        returns. Rejects unreachable statements after such a point."""
        returned = False
        for stmt in body:
            if returned:
                raise TypeCheckError("unreachable statement (all paths already returned)",
                                     stmt.span)
            returned = self.check_stmt(stmt, scope, func, in_loop)
        return returned

    def check_stmt(self, stmt: Stmt, scope: FunctionScope, func: FunctionDef,
                   in_loop: bool) -> bool:
        if isinstance(stmt, Decl):
            if isinstance(stmt.ty, ArrayType):
                self.check_array_type(stmt.ty, stmt.span)
                if stmt.init is not None:
                    raise TypeCheckError(
                        "array declarations cannot take initializers (zero-initialized)",
                        stmt.span)
            elif stmt.init is not None:
                self.check_expr(stmt.init, stmt.ty, scope)
            scope.declare(stmt.name, stmt.ty, stmt.span)
            return False
        if isinstance(stmt, Assign):
            ty = scope.lookup(stmt.name, stmt.span)
            if isinstance(ty, ArrayType):
                raise TypeCheckError(f"cannot assign whole array {stmt.name!r}", stmt.span)
            self.check_expr(stmt.expr, ty, scope)
            return False
        if isinstance(stmt, Store):
            ty = scope.lookup(stmt.name, stmt.span)
            if not isinstance(ty, ArrayType):
                raise TypeCheckError(f"{stmt.name!r} is not an array", stmt.span)
            idx_ty = self.check_expr(stmt.index, None, scope)
            if idx_ty.is_bool:
                raise TypeCheckError("array index must be an integer", stmt.index.span)
            self.check_expr(stmt.value, ty.elem, scope)
            return False
        if isinstance(stmt, If):
            self.check_expr(stmt.cond, BOOL, scope)
            t = self.check_block(stmt.then, scope, func, in_loop)
            o = self.check_block(stmt.other, scope, func, in_loop) if stmt.other else False
            return t and o and bool(stmt.other)
        if isinstance(stmt, While):
            self.check_expr(stmt.cond, BOOL, scope)
            self.forbid_calls(stmt.cond, "loop conditions")
            self.forbid_nondet(stmt.cond, "loop conditions")
            self.check_block(stmt.body, scope, func, in_loop=True)
            return False
        if isinstance(stmt, For):
            if not isinstance(stmt.init, (Decl, Assign, Store, CallStmt)):
                raise TypeCheckError("for-loop init must be a simple statement", stmt.span)
            if not isinstance(stmt.step, (Assign, Store, CallStmt)):
                raise TypeCheckError("for-loop step must be a simple statement", stmt.span)
            self.check_stmt(stmt.init, scope, func, in_loop)
            self.check_expr(stmt.cond, BOOL, scope)
            self.forbid_calls(stmt.cond, "loop conditions")
            self.forbid_nondet(stmt.cond, "loop conditions")
            self.check_block(stmt.body + [stmt.step], scope, func, in_loop=True)
            return False
        if isinstance(stmt, Assert):
            self.check_expr(stmt.expr, BOOL, scope)
            return False
        if isinstance(stmt, Assume):
            self.check_expr(stmt.expr, BOOL, scope)
            return False
        if isinstance(stmt, Return):
            if in_loop:
                raise TypeCheckError("return inside a loop body is not supported", stmt.span)
            if func.return_type is None:
                if stmt.expr is not None:
                    raise TypeCheckError("void function cannot return a value", stmt.span)
            else:
                if stmt.expr is None:
                    raise TypeCheckError(
                        f"function returns {func.return_type}, missing value", stmt.span)
                self.check_expr(stmt.expr, func.return_type, scope)
            return True
        if isinstance(stmt, CallStmt):
            self.check_call(stmt.name, stmt.args, stmt.span, scope)
            return False
        raise AssertionError(f"unknown stmt {stmt!r}")

    def forbid_calls(self, expr: Expr, where: str) -> None:
        for node in walk_exprs(expr):
            if isinstance(node, Call):
                raise TypeCheckError(f"calls are not allowed in {where}", node.span)

    def forbid_nondet(self, expr: Expr, where: str) -> None:
        for node in walk_exprs(expr):
            if isinstance(node, Nondet):
                raise TypeCheckError(
                    f"nondet intrinsics are not allowed in {where}; bind one "
                    "to a variable first", node.span)

    def check_call(self, name: str, args: list, span: Span,
                   scope: FunctionScope) -> Optional[ScalarType]:
        try:
            callee = self.program.function(name)
        except KeyError:
            raise TypeCheckError(f"call to undefined function {name!r}", span) from None
        if len(args) != len(callee.params):
            raise TypeCheckError(
                f"{name!r} expects {len(callee.params)} arguments, got {len(args)}", span)
        for arg, param in zip(args, callee.params):
            self.check_expr(arg, param.ty, scope)
        return callee.return_type

    def check_expr(self, expr: Expr, expected: Optional[ScalarType],
                   scope: FunctionScope) -> ScalarType:
        """Bidirectional check: literals take their type from context."""
        ty = self.infer_expr(expr, expected, scope)
        if expected is not None and ty != expected:
            raise TypeCheckError(
                f"expected {expected}, found {ty} (no implicit conversions; use cast)",
                expr.span)
        return ty

    def infer_expr(self, expr: Expr, expected: Optional[ScalarType],
                   scope: FunctionScope) -> ScalarType:
        if isinstance(expr, Lit):
            if expr.ty == BOOL:
                return BOOL
            ty = expected if expected is not None and not expected.is_bool else self.default_literal_type(expr)
            if not (ty.min_value <= expr.value <= ty.max_value):
                raise TypeCheckError(f"literal {expr.value} out of range for {ty}", expr.span)
            expr.ty = ty
            return ty
        if isinstance(expr, Var):
            ty = scope.lookup(expr.name, expr.span)
            if isinstance(ty, ArrayType):
                raise TypeCheckError(f"array {expr.name!r} used as a scalar", expr.span)
            expr.ty = ty
            return ty
        if isinstance(expr, Unary):
            if expr.op == "!":
                self.check_expr(expr.operand, BOOL, scope)
                expr.ty = BOOL
                return BOOL
            # - and ~: fold -LITERAL first so i8 x = -128; typechecks.
            if expr.op == "-" and isinstance(expr.operand, Lit) and expr.operand.ty != BOOL:
                lit = Lit(expr.span, None, -expr.operand.value)
                ty = self.infer_expr(lit, expected, scope)
                expr.operand.ty = ty
                expr.ty = ty
                return ty
            ty = self.check_expr(expr.operand, expected, scope)
            if ty.is_bool:
                raise TypeCheckError(f"operator {expr.op} needs an integer operand", expr.span)
            expr.ty = ty
            return ty
        if isinstance(expr, Binary):
            return self.infer_binary(expr, expected, scope)
        if isinstance(expr, ArrayRead):
            ty = scope.lookup(expr.name, expr.span)
            if not isinstance(ty, ArrayType):
                raise TypeCheckError(f"{expr.name!r} is not an array", expr.span)
            idx_ty = self.check_expr(expr.index, None, scope)
            if idx_ty.is_bool:
                raise TypeCheckError("array index must be an integer", expr.index.span)
            expr.array_type = ty
            expr.ty = ty.elem
            return ty.elem
        if isinstance(expr, Cast):
            if expr.target.is_bool:
                raise TypeCheckError("cannot cast to bool; compare instead", expr.span)
            src = self.check_expr(expr.operand, None, scope)
            if src.is_bool:
                raise TypeCheckError("cannot cast from bool", expr.span)
            expr.ty = expr.target
            return expr.target
        if isinstance(expr, Nondet):
            return expr.ty
        if isinstance(expr, Call):
            ret = self.check_call(expr.name, expr.args, expr.span, scope)
            if ret is None:
                raise TypeCheckError(
                    f"void function {expr.name!r} used in an expression", expr.span)
            expr.ty = ret
            return ret
        raise AssertionError(f"unknown expr {expr!r}")

    def default_literal_type(self, lit: Lit) -> ScalarType:
        if 0 <= lit.value <= INT_TYPES["i32"].max_value or lit.value < 0:
            return INT_TYPES["i32"]
        return INT_TYPES["u32"]

    def infer_binary(self, expr: Binary, expected: Optional[ScalarType],
                     scope: FunctionScope) -> ScalarType:
        op = expr.op
        if op in ("&&", "||"):
            self.check_expr(expr.lhs, BOOL, scope)
            self.check_expr(expr.rhs, BOOL, scope)
            self.forbid_calls(expr.rhs, f"the right operand of {op}")
            expr.ty = BOOL
            return BOOL
        if op in ("==", "!=", "<", "<=", ">", ">="):
            operand = self.join_operands(expr, None, scope)
            if operand.is_bool and op not in ("==", "!="):
                raise TypeCheckError(f"operator {op} not defined on bool", expr.span)
            expr.ty = BOOL
            return BOOL
        # Arithmetic / bitwise / shift: both operands share the result type.
        operand = self.join_operands(expr, expected, scope)
        if operand.is_bool:
            raise TypeCheckError(f"operator {op} needs integer operands", expr.span)
        expr.ty = operand
        return operand

    def join_operands(self, expr: Binary, expected: Optional[ScalarType],
                      scope: FunctionScope) -> ScalarType:
        """Type both operands identically. A non-literal side fixes the type;
        two literal sides fall back to the expected or default type."""
        lhs_literal = self.is_untyped_literal(expr.lhs)
        rhs_literal = self.is_untyped_literal(expr.rhs)
        if lhs_literal and not rhs_literal:
            rty = self.check_expr(expr.rhs, expected, scope)
            self.check_expr(expr.lhs, rty, scope)
            return rty
        lty = self.check_expr(expr.lhs, expected, scope)
        self.check_expr(expr.rhs, lty, scope)
        return lty

    def is_untyped_literal(self, e: Expr) -> bool:
        if isinstance(e, Lit) and e.ty is None:
            return True
        if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, Lit) \
                and e.operand.ty is None:
            return True
        return False

    def check_no_recursion(self) -> None:
        graph = {f.name: set() for f in self.program.functions}
        spans = {}
        for f in self.program.functions:
            for stmt, expr in iter_function_exprs(f):
                for node in walk_exprs(expr):
                    if isinstance(node, Call):
                        graph[f.name].add(node.name)
                        spans.setdefault((f.name, node.name), node.span)
            for stmt in iter_stmts(f.body):
                if isinstance(stmt, CallStmt):
                    graph[f.name].add(stmt.name)
                    spans.setdefault((f.name, stmt.name), stmt.span)
        state: dict = {}

        def visit(name: str, stack: list) -> None:
            state[name] = "visiting"
            stack.append(name)
            for callee in sorted(graph[name]):
                if state.get(callee) == "visiting":
                    cycle = stack[stack.index(callee):] + [callee]
                    raise TypeCheckError(
                        "recursive call cycle " + " -> ".join(cycle),
                        spans.get((name, callee), Span()))
                if callee not in state:
                    visit(callee, stack)
            stack.pop()
            state[name] = "done"

        for f in self.program.functions:
            if f.name not in state:
                visit(f.name, [])


def iter_stmts(body: list):
    """Yield every statement in a body, recursively."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from iter_stmts(stmt.then)
            yield from iter_stmts(stmt.other)
        elif isinstance(stmt, While):
            yield from iter_stmts(stmt.body)
        elif isinstance(stmt, For):
            yield stmt.init
            yield stmt.step
            yield from iter_stmts(stmt.body)


def iter_function_exprs(func: FunctionDef):
    """Yield (stmt, expr) for every top-level expression in the function."""
    for stmt in iter_stmts(func.body):
        if isinstance(stmt, Decl) and stmt.init is not None:
            yield stmt, stmt.init
        elif isinstance(stmt, Assign):
            yield stmt, stmt.expr
        elif isinstance(stmt, Store):
            yield stmt, stmt.index
            yield stmt, stmt.value
        elif isinstance(stmt, If):
            yield stmt, stmt.cond
        elif isinstance(stmt, While):
            yield stmt, stmt.cond
        elif isinstance(stmt, For):
            yield stmt, stmt.cond
        elif isinstance(stmt, (Assert, Assume)):
            yield stmt, stmt.expr
        elif isinstance(stmt, Return) and stmt.expr is not None:
            yield stmt, stmt.expr
        elif isinstance(stmt, CallStmt):
            for a in stmt.args:
                yield stmt, a


# ---------------------------------------------------------------------------
# Entry points


def parse_and_check(source: str) -> Program:
    """Lex, parse, and type-check MiniC source into a typed Program.

    Raises LexError/ParseError on the first syntax problem and CheckFailure
    with the full diagnostic list for type errors.
    """
    program = Parser(tokenize(source)).parse_program()
    TypeChecker(program).run()
    return program


def normalized_hash(func: FunctionDef) -> str:
    """SHA-256 of the function's canonical serialization with params and
    locals alpha-renamed to positional indices; spans, comments, and
    formatting do not contribute. Equal ASTs modulo renaming hash equal."""
    rename: dict = {}
    for p in func.params:
        rename[p.name] = f"%{len(rename)}"
    for stmt in iter_stmts(func.body):
        if isinstance(stmt, Decl) and stmt.name not in rename:
            rename[stmt.name] = f"%{len(rename)}"
    sig = ",".join(p.ty.name for p in func.params)
    ret = func.return_type.name if func.return_type else "void"
    body = " ".join(stmt_sexp(s, rename) for s in func.body)
    canonical = f"(fn ({sig}) {ret} {body})"
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def globals_hash(program: Program) -> str:
    """Digest of the global declarations (order, names, types, inits)."""
    text = ";".join(f"{g.name}:{g.ty}:{g.init}" for g in program.globals)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class CallGraph:
    edges: dict  # caller -> sorted list of callees

    def callees(self, name: str) -> list:
        return self.edges.get(name, [])

    def transitive_callees(self, name: str) -> set:
        out: set = set()
        work = list(self.edges.get(name, []))
        while work:
            n = work.pop()
            if n not in out:
                out.add(n)
                work.extend(self.edges.get(n, []))
        return out

    def transitive_callers(self, name: str) -> set:
        reverse: dict = {}
        for caller, callees in self.edges.items():
            for callee in callees:
                reverse.setdefault(callee, set()).add(caller)
        out: set = set()
        work = list(reverse.get(name, ()))
        while work:
            n = work.pop()
            if n not in out:
                out.add(n)
                work.extend(reverse.get(n, ()))
        return out


def call_graph(program: Program) -> CallGraph:
    """Directed caller -> callee edges over a type-checked program."""
    edges: dict = {}
    for f in program.functions:
        callees: set = set()
        for _, expr in iter_function_exprs(f):
            for node in walk_exprs(expr):
                if isinstance(node, Call):
                    callees.add(node.name)
        for stmt in iter_stmts(f.body):
            if isinstance(stmt, CallStmt):
                callees.add(stmt.name)
        edges[f.name] = sorted(callees)
    return CallGraph(edges)


def verification_hash(program: Program, entry: str) -> str:
    """Cache key hash covering the entry, its transitive callees, and the
    globals table; any change that can affect the entry's verdicts changes
    this digest."""
    cg = call_graph(program)
    names = [entry] + sorted(cg.transitive_callees(entry))
    parts = [f"{n}={normalized_hash(program.function(n))}" for n in names]
    parts.append(f"globals={globals_hash(program)}")
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()
