"""MiniC language definition: types, AST nodes, and the pretty-printer.

MiniC is a fixed-width, two's-complement C subset: scalar types bool/u8/u16/
u32/i8/i16/i32, statically sized arrays, no pointers, no recursion, explicit
casts only. Every AST node carries a source span; expression nodes carry
their ScalarType after type checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# ---------------------------------------------------------------------------
# Source spans


@dataclass(frozen=True)
class Span:
    """Absolute (line, col) plus the line relative to the enclosing function.

    rel_line is 1 for the function's own first line and is what stable VC ids
    are built from, so a function that merely moves within a file keeps its
    ids. Both coordinates are 1-based; (0, 0) marks synthesized nodes.
    """

    line: int = 0
    col: int = 0
    rel_line: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NO_SPAN = Span()


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class ScalarType:
    name: str
    width: int
    signed: bool

    @property
    def is_bool(self) -> bool:
        return self.width == 1

    @property
    def min_value(self) -> int:
        if self.is_bool:
            return 0
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def max_value(self) -> int:
        if self.is_bool:
            return 1
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    def __str__(self) -> str:
        return self.name


BOOL = ScalarType("bool", 1, False)
U8 = ScalarType("u8", 8, False)
U16 = ScalarType("u16", 16, False)
U32 = ScalarType("u32", 32, False)
I8 = ScalarType("i8", 8, True)
I16 = ScalarType("i16", 16, True)
I32 = ScalarType("i32", 32, True)

# Internal-only widths used by the signed-overflow instrumentation; the
# surface grammar never produces them.
I64 = ScalarType("i64", 64, True)
U64 = ScalarType("u64", 64, False)

SURFACE_TYPES = {t.name: t for t in (BOOL, U8, U16, U32, I8, I16, I32)}
INT_TYPES = {t.name: t for t in (U8, U16, U32, I8, I16, I32)}

# Statically sized arrays beyond this explode the zero-init store chain in
# the encodings; rejected at type check.
MAX_ARRAY_SIZE = 1024


@dataclass(frozen=True)
class ArrayType:
    elem: ScalarType
    size: int

    def __str__(self) -> str:
        return f"{self.elem}[{self.size}]"


Type = Union[ScalarType, ArrayType]


def double_width(ty: ScalarType) -> ScalarType:
    """Signed type wide enough to hold any +,-,* result of two ty values."""
    return {8: I16, 16: I32, 32: I64}[ty.width]


# ---------------------------------------------------------------------------
# Expressions

UNARY_OPS = {"-", "~", "!"}
ARITH_OPS = {"+", "-", "*", "/", "%"}
BIT_OPS = {"&", "|", "^"}
SHIFT_OPS = {"<<", ">>"}
CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}
LOGIC_OPS = {"&&", "||"}
BINARY_OPS = ARITH_OPS | BIT_OPS | SHIFT_OPS | CMP_OPS | LOGIC_OPS


@dataclass
class Expr:
    span: Span = field(default=NO_SPAN, repr=False, compare=False)
    ty: Optional[ScalarType] = field(default=None, repr=False)


@dataclass
class Lit(Expr):
    value: int = 0  # bools use 0/1

    def __str__(self) -> str:
        if self.ty is not None and self.ty.is_bool:
            return "true" if self.value else "false"
        return str(self.value)


@dataclass
class Var(Expr):
    name: str = ""
    version: Optional[int] = None  # SSA version, None before lowering

    def __str__(self) -> str:
        return self.name if self.version is None else f"{self.name}#{self.version}"


@dataclass
class Unary(Expr):
    op: str = ""
    operand: Expr = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"({self.op}{self.operand})"


@dataclass
class Binary(Expr):
    op: str = ""
    lhs: Expr = None  # type: ignore[assignment]
    rhs: Expr = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"({self.lhs} {self.op} {self.rhs})"


@dataclass
class ArrayRead(Expr):
    """a[i]. After lowering, reads are total: out-of-bounds yields 0/false."""

    name: str = ""
    index: Expr = None  # type: ignore[assignment]
    version: Optional[int] = None
    array_type: Optional[ArrayType] = None

    def __str__(self) -> str:
        base = self.name if self.version is None else f"{self.name}#{self.version}"
        return f"{base}[{self.index}]"


@dataclass
class Cast(Expr):
    target: ScalarType = None  # type: ignore[assignment]
    operand: Expr = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"cast<{self.target}>({self.operand})"


@dataclass
class Nondet(Expr):
    """A free input. symbol is the globally unique name after transforms;
    nid is the parse-time id, path records inline/unroll copies."""

    nid: int = 0
    label: str = ""
    path: tuple = ()
    symbol: str = ""

    def __str__(self) -> str:
        if self.symbol:
            return f"nondet<{self.ty}>({self.symbol})"
        return f"nondet_{self.ty}()"


@dataclass
class Call(Expr):
    name: str = ""
    args: list = field(default_factory=list)
    site: int = 0  # parse-time call-site id; keys inlined nondet paths

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass
class Ite(Expr):
    """Internal conditional expression; produced by lowering, never parsed."""

    cond: Expr = None  # type: ignore[assignment]
    then: Expr = None  # type: ignore[assignment]
    other: Expr = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"ite({self.cond}, {self.then}, {self.other})"


# ---------------------------------------------------------------------------
# Statements


@dataclass
class Stmt:
    span: Span = field(default=NO_SPAN, repr=False, compare=False)


@dataclass
class Decl(Stmt):
    name: str = ""
    ty: Type = None  # type: ignore[assignment]
    init: Optional[Expr] = None

    def __str__(self) -> str:
        if isinstance(self.ty, ArrayType):
            return f"{self.ty.elem} {self.name}[{self.ty.size}];"
        if self.init is None:
            return f"{self.ty} {self.name};"
        return f"{self.ty} {self.name} = {self.init};"


@dataclass
class Assign(Stmt):
    name: str = ""
    expr: Expr = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"{self.name} = {self.expr};"


@dataclass
class Store(Stmt):
    name: str = ""
    index: Expr = None  # type: ignore[assignment]
    value: Expr = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"{self.name}[{self.index}] = {self.value};"


@dataclass
class If(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    then: list = field(default_factory=list)
    other: list = field(default_factory=list)

    def __str__(self) -> str:
        return f"if ({self.cond}) {{...}}" + (" else {...}" if self.other else "")


@dataclass
class While(Stmt):
    cond: Expr = None  # type: ignore[assignment]
    body: list = field(default_factory=list)
    loop_id: int = 0

    def __str__(self) -> str:
        return f"while ({self.cond}) {{...}}"


@dataclass
class For(Stmt):
    init: Stmt = None  # type: ignore[assignment]
    cond: Expr = None  # type: ignore[assignment]
    step: Stmt = None  # type: ignore[assignment]
    body: list = field(default_factory=list)
    loop_id: int = 0

    def __str__(self) -> str:
        return f"for ({self.init} {self.cond}; {self.step}) {{...}}"


@dataclass
class Assert(Stmt):
    expr: Expr = None  # type: ignore[assignment]
    unwinding: bool = False  # set by unroll_loops for bound checks

    def __str__(self) -> str:
        return f"assert({self.expr});"


@dataclass
class Assume(Stmt):
    expr: Expr = None  # type: ignore[assignment]
    unwinding: bool = False

    def __str__(self) -> str:
        return f"assume({self.expr});"


@dataclass
class Return(Stmt):
    expr: Optional[Expr] = None

    def __str__(self) -> str:
        return f"return {self.expr};" if self.expr is not None else "return;"


@dataclass
class CallStmt(Stmt):
    name: str = ""
    args: list = field(default_factory=list)
    site: int = 0

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)});"


# ---------------------------------------------------------------------------
# Top level


@dataclass
class Param:
    name: str
    ty: ScalarType


@dataclass
class FunctionDef:
    name: str
    params: list  # of Param
    return_type: Optional[ScalarType]  # None for void
    body: list  # of Stmt
    span: Span = NO_SPAN

    @property
    def signature(self) -> tuple:
        ret = self.return_type.name if self.return_type else "void"
        return (tuple(p.ty.name for p in self.params), ret)


@dataclass
class GlobalDecl:
    name: str
    ty: Type
    init: Optional[int] = None  # constant initializer, scalars only
    span: Span = NO_SPAN


@dataclass
class Program:
    functions: list = field(default_factory=list)  # of FunctionDef
    globals: list = field(default_factory=list)  # of GlobalDecl

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def function_names(self) -> list:
        return [f.name for f in self.functions]

    def global_decl(self, name: str) -> Optional[GlobalDecl]:
        for g in self.globals:
            if g.name == name:
                return g
        return None


# ---------------------------------------------------------------------------
# Pretty-printer. pretty(parse(s)) must reparse to an equal AST.


def pretty_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        if e.ty is not None and e.ty.is_bool:
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"({e.op}{pretty_expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({pretty_expr(e.lhs)} {e.op} {pretty_expr(e.rhs)})"
    if isinstance(e, ArrayRead):
        return f"{e.name}[{pretty_expr(e.index)}]"
    if isinstance(e, Cast):
        return f"cast<{e.target}>({pretty_expr(e.operand)})"
    if isinstance(e, Nondet):
        return f"nondet_{e.ty}()"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, Ite):
        return f"ite({pretty_expr(e.cond)}, {pretty_expr(e.then)}, {pretty_expr(e.other)})"
    raise AssertionError(f"unknown expr {e!r}")


def pretty_stmt(s: Stmt, indent: int = 0) -> str:
    pad = "    " * indent

    def block(body):
        inner = "\n".join(pretty_stmt(b, indent + 1) for b in body)
        return "{\n" + inner + ("\n" if body else "") + pad + "}"

    if isinstance(s, Decl):
        if isinstance(s.ty, ArrayType):
            return f"{pad}{s.ty.elem} {s.name}[{s.ty.size}];"
        init = f" = {pretty_expr(s.init)}" if s.init is not None else ""
        return f"{pad}{s.ty} {s.name}{init};"
    if isinstance(s, Assign):
        return f"{pad}{s.name} = {pretty_expr(s.expr)};"
    if isinstance(s, Store):
        return f"{pad}{s.name}[{pretty_expr(s.index)}] = {pretty_expr(s.value)};"
    if isinstance(s, If):
        text = f"{pad}if ({pretty_expr(s.cond)}) {block(s.then)}"
        if s.other:
            text += f" else {block(s.other)}"
        return text
    if isinstance(s, While):
        return f"{pad}while ({pretty_expr(s.cond)}) {block(s.body)}"
    if isinstance(s, For):
        init = pretty_stmt(s.init, 0).strip()
        step = pretty_stmt(s.step, 0).strip()
        return f"{pad}for ({init} {pretty_expr(s.cond)}; {step}) {block(s.body)}"
    if isinstance(s, Assert):
        return f"{pad}assert({pretty_expr(s.expr)});"
    if isinstance(s, Assume):
        return f"{pad}assume({pretty_expr(s.expr)});"
    if isinstance(s, Return):
        return f"{pad}return{' ' + pretty_expr(s.expr) if s.expr is not None else ''};"
    if isinstance(s, CallStmt):
        return f"{pad}{s.name}({', '.join(pretty_expr(a) for a in s.args)});"
    raise AssertionError(f"unknown stmt {s!r}")


def pretty_program(p: Program) -> str:
    parts = []
    for g in p.globals:
        if isinstance(g.ty, ArrayType):
            parts.append(f"{g.ty.elem} {g.name}[{g.ty.size}];")
        elif g.init is not None:
            parts.append(f"{g.ty} {g.name} = {g.init};")
        else:
            parts.append(f"{g.ty} {g.name};")
    for f in p.functions:
        ret = f.return_type.name if f.return_type else "void"
        params = ", ".join(f"{prm.ty} {prm.name}" for prm in f.params)
        body = "\n".join(pretty_stmt(s, 1) for s in f.body)
        parts.append(f"{ret} {f.name}({params}) {{\n{body}\n}}")
    return "\n\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Structural equality and canonical serialization, span-insensitive.


def expr_sexp(e: Expr, rename: Optional[dict] = None) -> str:
    """Canonical serialization. With a rename map, locals become positional
    indices, which makes the result alpha-invariant (used by hashing)."""
    ty = e.ty.name if e.ty is not None else "?"
    if isinstance(e, Lit):
        return f"(lit {ty} {e.value})"
    if isinstance(e, Var):
        name = rename.get(e.name, e.name) if rename is not None else e.name
        ver = f"#{e.version}" if e.version is not None else ""
        return f"(var {ty} {name}{ver})"
    if isinstance(e, Unary):
        return f"(un {ty} {e.op} {expr_sexp(e.operand, rename)})"
    if isinstance(e, Binary):
        return f"(bin {ty} {e.op} {expr_sexp(e.lhs, rename)} {expr_sexp(e.rhs, rename)})"
    if isinstance(e, ArrayRead):
        name = rename.get(e.name, e.name) if rename is not None else e.name
        ver = f"#{e.version}" if e.version is not None else ""
        return f"(idx {ty} {name}{ver} {expr_sexp(e.index, rename)})"
    if isinstance(e, Cast):
        return f"(cast {e.target.name} {expr_sexp(e.operand, rename)})"
    if isinstance(e, Nondet):
        sym = e.symbol if e.symbol else f"n{e.nid}"
        return f"(nondet {ty} {sym})" if rename is None else f"(nondet {ty})"
    if isinstance(e, Call):
        args = " ".join(expr_sexp(a, rename) for a in e.args)
        return f"(call {ty} {e.name} {args})"
    if isinstance(e, Ite):
        return (
            f"(ite {ty} {expr_sexp(e.cond, rename)} "
            f"{expr_sexp(e.then, rename)} {expr_sexp(e.other, rename)})"
        )
    raise AssertionError(f"unknown expr {e!r}")


def stmt_sexp(s: Stmt, rename: Optional[dict] = None) -> str:
    def nm(name: str) -> str:
        return rename.get(name, name) if rename is not None else name

    if isinstance(s, Decl):
        init = f" {expr_sexp(s.init, rename)}" if s.init is not None else ""
        return f"(decl {s.ty} {nm(s.name)}{init})"
    if isinstance(s, Assign):
        return f"(assign {nm(s.name)} {expr_sexp(s.expr, rename)})"
    if isinstance(s, Store):
        return f"(store {nm(s.name)} {expr_sexp(s.index, rename)} {expr_sexp(s.value, rename)})"
    if isinstance(s, If):
        t = " ".join(stmt_sexp(x, rename) for x in s.then)
        o = " ".join(stmt_sexp(x, rename) for x in s.other)
        return f"(if {expr_sexp(s.cond, rename)} ({t}) ({o}))"
    if isinstance(s, While):
        b = " ".join(stmt_sexp(x, rename) for x in s.body)
        return f"(while {expr_sexp(s.cond, rename)} ({b}))"
    if isinstance(s, For):
        b = " ".join(stmt_sexp(x, rename) for x in s.body)
        return (
            f"(for {stmt_sexp(s.init, rename)} {expr_sexp(s.cond, rename)} "
            f"{stmt_sexp(s.step, rename)} ({b}))"
        )
    if isinstance(s, Assert):
        return f"(assert {expr_sexp(s.expr, rename)})"
    if isinstance(s, Assume):
        return f"(assume {expr_sexp(s.expr, rename)})"
    if isinstance(s, Return):
        return f"(return {expr_sexp(s.expr, rename)})" if s.expr is not None else "(return)"
    if isinstance(s, CallStmt):
        args = " ".join(expr_sexp(a, rename) for a in s.args)
        return f"(callstmt {s.name} {args})"
    raise AssertionError(f"unknown stmt {s!r}")


def ast_equal(a, b) -> bool:
    """Structural equality of statements/expressions, ignoring spans."""
    if isinstance(a, Expr) and isinstance(b, Expr):
        return expr_sexp(a) == expr_sexp(b)
    if isinstance(a, Stmt) and isinstance(b, Stmt):
        return stmt_sexp(a) == stmt_sexp(b)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, FunctionDef) and isinstance(b, FunctionDef):
        return (
            a.name == b.name
            and a.signature == b.signature
            and [p.name for p in a.params] == [p.name for p in b.params]
            and ast_equal(a.body, b.body)
        )
    if isinstance(a, Program) and isinstance(b, Program):
        return (
            [(g.name, str(g.ty), g.init) for g in a.globals]
            == [(g.name, str(g.ty), g.init) for g in b.globals]
            and len(a.functions) == len(b.functions)
            and all(ast_equal(x, y) for x, y in zip(a.functions, b.functions))
        )
    return False


def walk_exprs(e: Expr):
    """Yield e and all sub-expressions, pre-order."""
    yield e
    if isinstance(e, Unary):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from walk_exprs(e.lhs)
        yield from walk_exprs(e.rhs)
    elif isinstance(e, ArrayRead):
        yield from walk_exprs(e.index)
    elif isinstance(e, Cast):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_exprs(a)
    elif isinstance(e, Ite):
        yield from walk_exprs(e.cond)
        yield from walk_exprs(e.then)
        yield from walk_exprs(e.other)


def clone_expr(e: Expr) -> Expr:
    if isinstance(e, Lit):
        return Lit(e.span, e.ty, e.value)
    if isinstance(e, Var):
        return Var(e.span, e.ty, e.name, e.version)
    if isinstance(e, Unary):
        return Unary(e.span, e.ty, e.op, clone_expr(e.operand))
    if isinstance(e, Binary):
        return Binary(e.span, e.ty, e.op, clone_expr(e.lhs), clone_expr(e.rhs))
    if isinstance(e, ArrayRead):
        return ArrayRead(e.span, e.ty, e.name, clone_expr(e.index), e.version, e.array_type)
    if isinstance(e, Cast):
        return Cast(e.span, e.ty, e.target, clone_expr(e.operand))
    if isinstance(e, Nondet):
        return Nondet(e.span, e.ty, e.nid, e.label, e.path, e.symbol)
    if isinstance(e, Call):
        return Call(e.span, e.ty, e.name, [clone_expr(a) for a in e.args], e.site)
    if isinstance(e, Ite):
        return Ite(e.span, e.ty, clone_expr(e.cond), clone_expr(e.then), clone_expr(e.other))
    raise AssertionError(f"unknown expr {e!r}")


def clone_stmt(s: Stmt) -> Stmt:
    if isinstance(s, Decl):
        return Decl(s.span, s.name, s.ty, clone_expr(s.init) if s.init else None)
    if isinstance(s, Assign):
        return Assign(s.span, s.name, clone_expr(s.expr))
    if isinstance(s, Store):
        return Store(s.span, s.name, clone_expr(s.index), clone_expr(s.value))
    if isinstance(s, If):
        return If(s.span, clone_expr(s.cond), [clone_stmt(x) for x in s.then],
                  [clone_stmt(x) for x in s.other])
    if isinstance(s, While):
        return While(s.span, clone_expr(s.cond), [clone_stmt(x) for x in s.body], s.loop_id)
    if isinstance(s, For):
        return For(s.span, clone_stmt(s.init), clone_expr(s.cond), clone_stmt(s.step),
                   [clone_stmt(x) for x in s.body], s.loop_id)
    if isinstance(s, Assert):
        return Assert(s.span, clone_expr(s.expr), s.unwinding)
    if isinstance(s, Assume):
        return Assume(s.span, clone_expr(s.expr), s.unwinding)
    if isinstance(s, Return):
        return Return(s.span, clone_expr(s.expr) if s.expr is not None else None)
    if isinstance(s, CallStmt):
        return CallStmt(s.span, s.name, [clone_expr(a) for a in s.args], s.site)
    raise AssertionError(f"unknown stmt {s!r}")
