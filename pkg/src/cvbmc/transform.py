"""Lowering: inline calls, unroll loops with unwinding instrumentation,
convert to single-assignment form.

The pipeline is inline_calls -> unroll_loops -> to_ssa. Loops become k
guarded copies followed by an unwinding assertion (does k suffice?) or
assumption (restrict attention to <= k iterations); branch joins become
guard-merge steps with if-then-else semantics. Every step records the path
guard under which its statement executed, which property instrumentation
folds into inserted claims.

Nondet identity: each intrinsic gets a parse-time id; inlining prepends a
("c", site) element and unrolling a ("L", loop, iteration) element to its
path, so every static copy names a distinct input. The interpreter tracks
the same call/iteration path at run time, which is what makes solver models
replayable on the original program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lang import (
    ArrayRead, ArrayType, Assert, Assign, Assume, Binary, BOOL, Call,
    CallStmt, Cast, clone_expr, clone_stmt, Decl, Expr, For, FunctionDef,
    If, Ite, Lit, Nondet, NO_SPAN, Program, Return, ScalarType, Span, Stmt,
    Store, U32, Unary, Var, While, pretty_expr, walk_exprs,
)
from .frontend import iter_stmts


class TransformError(Exception):
    pass


class UnknownEntry(TransformError):
    pass


class NonPositiveBound(TransformError):
    pass


class InternalLoweringError(TransformError):
    """A loop or call survived into a phase that forbids them."""


ASSERTION = "assertion"
ASSUMPTION = "assumption"
UNWINDING_MODES = (ASSERTION, ASSUMPTION)


# ---------------------------------------------------------------------------
# Nondet symbol naming. The same (static) assignment is computed by the
# transform pipeline and by the interpreter, which is what lets solver
# models replay on the original program by symbol name.


def nondet_base_names(program: Program, entry: str, havoc_globals: bool) -> dict:
    """Map parse-time nondet ids to base symbol names. A nondet labeled with
    the variable it initializes keeps that name unless it is taken (by a
    parameter, a havocked global, or an earlier label), in which case the
    unique parse id disambiguates."""
    taken: set = set()
    func = program.function(entry)
    for p in func.params:
        taken.add(p.name)
    if havoc_globals:
        for g in program.globals:
            if isinstance(g.ty, ArrayType):
                taken.update(f"{g.name}[{i}]" for i in range(g.ty.size))
            else:
                taken.add(g.name)
    nodes = []
    for f in program.functions:
        for stmt in iter_stmts(f.body):
            for expr in _stmt_exprs(stmt):
                for node in walk_exprs(expr):
                    if isinstance(node, Nondet):
                        nodes.append(node)
    bases: dict = {}
    for node in sorted(nodes, key=lambda n: n.nid):
        if node.nid in bases:
            continue  # transformed programs carry copies of the same id
        base = node.label if node.label else f"nd{node.nid}"
        if base in taken:
            base = f"{base}.{node.nid}"
        taken.add(base)
        bases[node.nid] = base
    return bases


def render_symbol(base: str, path: tuple) -> str:
    """Append the inline/unroll path to a base name: x@c3@L0i2 is the copy
    of x inside call site 3, loop 0, iteration 2."""
    suffix = "".join(
        f"@c{p[1]}" if p[0] == "c" else f"@L{p[1]}i{p[2]}" for p in path)
    return base + suffix


# ---------------------------------------------------------------------------
# Return normalization: push trailing statements into branches so `return`
# only ever appears in tail position. Loops cannot contain returns (enforced
# by the type checker), which keeps this pass total.


def contains_return(body: list) -> bool:
    return any(isinstance(s, Return) for s in iter_stmts(body))


def always_returns(body: list) -> bool:
    for stmt in body:
        if isinstance(stmt, Return):
            return True
        if isinstance(stmt, If) and stmt.other \
                and always_returns(stmt.then) and always_returns(stmt.other):
            return True
    return False


def normalize_returns(body: list) -> list:
    out = []
    for i, stmt in enumerate(body):
        rest = body[i + 1:]
        if isinstance(stmt, If) and (contains_return(stmt.then) or contains_return(stmt.other)):
            then = list(stmt.then)
            other = list(stmt.other)
            if rest:
                if not always_returns(then):
                    then = then + [clone_stmt(s) for s in rest]
                if not always_returns(other):
                    other = other + [clone_stmt(s) for s in rest]
            out.append(If(stmt.span, stmt.cond, normalize_returns(then),
                          normalize_returns(other)))
            return out
        out.append(stmt)
    return out


def normalized_body(func: FunctionDef) -> list:
    body = [clone_stmt(s) for s in func.body]
    if func.return_type is None and not always_returns(body):
        body = body + [Return(NO_SPAN, None)]
    return normalize_returns(body)


# ---------------------------------------------------------------------------
# Call inlining


def _rename_expr(e: Expr, rename: dict, site: int) -> None:
    if isinstance(e, Var):
        e.name = rename.get(e.name, e.name)
    elif isinstance(e, ArrayRead):
        e.name = rename.get(e.name, e.name)
        _rename_expr(e.index, rename, site)
    elif isinstance(e, Unary):
        _rename_expr(e.operand, rename, site)
    elif isinstance(e, Binary):
        _rename_expr(e.lhs, rename, site)
        _rename_expr(e.rhs, rename, site)
    elif isinstance(e, Cast):
        _rename_expr(e.operand, rename, site)
    elif isinstance(e, Ite):
        _rename_expr(e.cond, rename, site)
        _rename_expr(e.then, rename, site)
        _rename_expr(e.other, rename, site)
    elif isinstance(e, Nondet):
        e.path = (("c", site),) + e.path


class _Inliner:
    def __init__(self, program: Program):
        self.program = program
        self.cache: dict = {}

    def inlined_body(self, name: str) -> list:
        if name not in self.cache:
            func = self.program.function(name)
            body = normalized_body(func)
            self.cache[name] = self.hoist_block(body)
        return self.cache[name]

    # -- expression hoisting -------------------------------------------------

    def hoist_expr(self, e: Expr, pre: list) -> Expr:
        if isinstance(e, (Lit, Var, Nondet)):
            return e
        if isinstance(e, Unary):
            e.operand = self.hoist_expr(e.operand, pre)
            return e
        if isinstance(e, Binary):
            e.lhs = self.hoist_expr(e.lhs, pre)
            e.rhs = self.hoist_expr(e.rhs, pre)
            return e
        if isinstance(e, ArrayRead):
            e.index = self.hoist_expr(e.index, pre)
            return e
        if isinstance(e, Cast):
            e.operand = self.hoist_expr(e.operand, pre)
            return e
        if isinstance(e, Ite):
            e.cond = self.hoist_expr(e.cond, pre)
            e.then = self.hoist_expr(e.then, pre)
            e.other = self.hoist_expr(e.other, pre)
            return e
        if isinstance(e, Call):
            args = [self.hoist_expr(a, pre) for a in e.args]
            ret_var = self.expand_call(e.name, args, e.site, e.span, pre)
            assert ret_var is not None
            return ret_var
        raise AssertionError(f"unknown expr {e!r}")

    def expand_call(self, name: str, args: list, site: int, span: Span,
                    pre: list) -> Optional[Var]:
        """Embed a fresh renamed copy of the callee at this site; returns a
        Var for the bound return value (None for void callees)."""
        callee = self.program.function(name)
        suffix = f"@c{site}"
        rename = {}
        for p in callee.params:
            rename[p.name] = p.name + suffix
        body = self.inlined_body(name)
        for stmt in iter_stmts(body):
            if isinstance(stmt, Decl):
                rename.setdefault(stmt.name, stmt.name + suffix)
        for param, arg in zip(callee.params, args):
            pre.append(Decl(span, rename[param.name], param.ty, arg))
        ret_name = f"$ret{suffix}"
        if callee.return_type is not None:
            pre.append(Decl(span, ret_name, callee.return_type, None))
        for stmt in body:
            pre.extend(self.rebind(stmt, rename, site, ret_name))
        if callee.return_type is None:
            return None
        return Var(span, callee.return_type, ret_name)

    def rebind(self, stmt: Stmt, rename: dict, site: int, ret_name: str) -> list:
        """Clone a callee statement, renaming locals, extending nondet paths,
        and turning tail returns into assignments to the return slot. Callee
        bodies are already call-free (hoisted) and return-normalized."""
        if isinstance(stmt, Return):
            if stmt.expr is None:
                return []
            expr = clone_expr(stmt.expr)
            _rename_expr(expr, rename, site)
            return [Assign(stmt.span, ret_name, expr)]
        if isinstance(stmt, If):
            cond = clone_expr(stmt.cond)
            _rename_expr(cond, rename, site)
            then = [x for b in stmt.then for x in self.rebind(b, rename, site, ret_name)]
            other = [x for b in stmt.other for x in self.rebind(b, rename, site, ret_name)]
            return [If(stmt.span, cond, then, other)]
        if isinstance(stmt, While):
            cond = clone_expr(stmt.cond)
            _rename_expr(cond, rename, site)
            body = [x for b in stmt.body for x in self.rebind(b, rename, site, ret_name)]
            return [While(stmt.span, cond, body, stmt.loop_id)]
        s = clone_stmt(stmt)
        if isinstance(s, Decl):
            s.name = rename.get(s.name, s.name)
            if s.init is not None:
                _rename_expr(s.init, rename, site)
        elif isinstance(s, Assign):
            s.name = rename.get(s.name, s.name)
            _rename_expr(s.expr, rename, site)
        elif isinstance(s, Store):
            s.name = rename.get(s.name, s.name)
            _rename_expr(s.index, rename, site)
            _rename_expr(s.value, rename, site)
        elif isinstance(s, (Assert, Assume)):
            _rename_expr(s.expr, rename, site)
        elif isinstance(s, (CallStmt, For)):
            raise InternalLoweringError("unhoisted statement in inlined body")
        return [s]

    # -- statement hoisting ----------------------------------------------------

    def hoist_block(self, body: list) -> list:
        out = []
        for stmt in body:
            out.extend(self.hoist_stmt(stmt))
        return out

    def hoist_stmt(self, stmt: Stmt) -> list:
        pre: list = []
        if isinstance(stmt, Decl):
            if stmt.init is not None:
                stmt.init = self.hoist_expr(stmt.init, pre)
        elif isinstance(stmt, Assign):
            stmt.expr = self.hoist_expr(stmt.expr, pre)
        elif isinstance(stmt, Store):
            stmt.index = self.hoist_expr(stmt.index, pre)
            stmt.value = self.hoist_expr(stmt.value, pre)
        elif isinstance(stmt, If):
            stmt.cond = self.hoist_expr(stmt.cond, pre)
            stmt.then = self.hoist_block(stmt.then)
            stmt.other = self.hoist_block(stmt.other)
        elif isinstance(stmt, While):
            # The type checker bans calls in loop conditions.
            stmt.body = self.hoist_block(stmt.body)
        elif isinstance(stmt, For):
            init = self.hoist_stmt(stmt.init)
            step = self.hoist_stmt(stmt.step)
            body = self.hoist_block(stmt.body)
            # Desugars here so hoisted step statements stay inside the body.
            loop = While(stmt.span, stmt.cond, body + step, stmt.loop_id)
            return pre + init + [loop]
        elif isinstance(stmt, (Assert, Assume)):
            stmt.expr = self.hoist_expr(stmt.expr, pre)
        elif isinstance(stmt, Return):
            if stmt.expr is not None:
                stmt.expr = self.hoist_expr(stmt.expr, pre)
        elif isinstance(stmt, CallStmt):
            args = [self.hoist_expr(a, pre) for a in stmt.args]
            self.expand_call(stmt.name, args, stmt.site, stmt.span, pre)
            return pre
        return pre + [stmt]


def inline_calls(program: Program, entry: str) -> Program:
    """Expand every call in the entry function; each call site gets a fresh
    renamed copy of the (already inlined) callee body, arguments bound
    left-to-right, and the return value assigned to a fresh slot."""
    if not any(f.name == entry for f in program.functions):
        raise UnknownEntry(entry)
    inliner = _Inliner(program)
    body = inliner.inlined_body(entry)
    func = program.function(entry)
    new_entry = FunctionDef(func.name, list(func.params), func.return_type, body, func.span)
    functions = [new_entry if f.name == entry else f for f in program.functions]
    return Program(functions, program.globals)


def desugar_for(body: list) -> list:
    """Rewrite for-loops into while-loops (used by unroll_loops)."""
    out = []
    for stmt in body:
        if isinstance(stmt, For):
            inner = desugar_for(stmt.body) + [stmt.step]
            out.append(stmt.init)
            out.append(While(stmt.span, stmt.cond, inner, stmt.loop_id))
        elif isinstance(stmt, If):
            out.append(If(stmt.span, stmt.cond, desugar_for(stmt.then),
                          desugar_for(stmt.other)))
        elif isinstance(stmt, While):
            out.append(While(stmt.span, stmt.cond, desugar_for(stmt.body), stmt.loop_id))
        else:
            out.append(stmt)
    return out


# ---------------------------------------------------------------------------
# Loop unrolling


def _extend_paths(body: list, entry: tuple) -> None:
    for stmt in iter_stmts(body):
        for expr in _stmt_exprs(stmt):
            for node in walk_exprs(expr):
                if isinstance(node, Nondet):
                    node.path = (entry,) + node.path


def _stmt_exprs(stmt: Stmt) -> list:
    if isinstance(stmt, Decl):
        return [stmt.init] if stmt.init is not None else []
    if isinstance(stmt, Assign):
        return [stmt.expr]
    if isinstance(stmt, Store):
        return [stmt.index, stmt.value]
    if isinstance(stmt, (If, While, For)):
        return [stmt.cond]
    if isinstance(stmt, (Assert, Assume)):
        return [stmt.expr]
    if isinstance(stmt, Return):
        return [stmt.expr] if stmt.expr is not None else []
    if isinstance(stmt, CallStmt):
        return list(stmt.args)
    return []


def _unroll_body(body: list, k: int, mode: str) -> list:
    out = []
    for stmt in body:
        if isinstance(stmt, While):
            inner = _unroll_body(stmt.body, k, mode)
            neg = Unary(stmt.span, BOOL, "!", clone_expr(stmt.cond))
            if mode == ASSERTION:
                final: Stmt = Assert(stmt.span, neg, unwinding=True)
            else:
                final = Assume(stmt.span, neg, unwinding=True)
            current = [final]
            for copy in range(k - 1, -1, -1):
                iter_body = [clone_stmt(s) for s in inner]
                _extend_paths(iter_body, ("L", stmt.loop_id, copy))
                current = [If(stmt.span, clone_expr(stmt.cond), iter_body + current, [])]
            out.extend(current)
        elif isinstance(stmt, If):
            out.append(If(stmt.span, stmt.cond,
                          _unroll_body(stmt.then, k, mode),
                          _unroll_body(stmt.other, k, mode)))
        else:
            out.append(stmt)
    return out


def unroll_loops(program: Program, k: int, mode: str) -> Program:
    """Replace each loop by k guarded body copies; after the k-th copy the
    loop condition must be false, checked (assertion mode) or assumed
    (assumption mode). Inner loops unroll first, each copy to the same k."""
    if k < 1:
        raise NonPositiveBound(k)
    if mode not in UNWINDING_MODES:
        raise TransformError(f"unknown unwinding mode {mode!r}")
    functions = []
    for f in program.functions:
        body = desugar_for([clone_stmt(s) for s in f.body])
        for stmt in iter_stmts(body):
            if isinstance(stmt, CallStmt):
                raise InternalLoweringError(f"call survived inlining in {f.name}")
        body = _unroll_body(body, k, mode)
        functions.append(FunctionDef(f.name, list(f.params), f.return_type, body, f.span))
    return Program(functions, program.globals)


# ---------------------------------------------------------------------------
# SSA form


@dataclass
class SsaStep:
    guard: Optional[Expr] = None  # path condition; None means always


@dataclass
class DefineStep(SsaStep):
    name: str = ""
    version: int = 0
    expr: Expr = None  # type: ignore[assignment]


@dataclass
class StoreStep(SsaStep):
    name: str = ""
    version: int = 0
    prev_version: int = 0
    index: Expr = None  # type: ignore[assignment]
    value: Expr = None  # type: ignore[assignment]


@dataclass
class MergeStep(SsaStep):
    name: str = ""
    version: int = 0
    cond: Expr = None  # type: ignore[assignment]
    then_version: int = 0
    else_version: int = 0


ORIGIN_ASSUME = "assume"
ORIGIN_UNWINDING = "unwinding-assumption"
ORIGIN_PRIOR_CLAIM = "prior-claim"
ORIGIN_TEST_CASE = "test-case"


@dataclass
class ConstraintStep(SsaStep):
    expr: Expr = None  # type: ignore[assignment]
    origin: str = ORIGIN_ASSUME
    claim_kind: str = ""  # set on prior-claim constraints


@dataclass
class ClaimStep(SsaStep):
    expr: Expr = None  # type: ignore[assignment]
    kind: str = "user-assert"
    span: Span = NO_SPAN
    vc_id: str = ""  # assigned by generate_vcs


@dataclass
class SsaProgram:
    entry: str
    steps: list = field(default_factory=list)
    nondet_symbols: list = field(default_factory=list)  # (symbol, ScalarType)
    bound_k: int = 1
    arrays: dict = field(default_factory=dict)  # name -> (ArrayType, base_version)
    exit_values: dict = field(default_factory=dict)  # label -> (name, version)

    def symbol_type(self, symbol: str) -> ScalarType:
        for name, ty in self.nondet_symbols:
            if name == symbol:
                return ty
        raise KeyError(symbol)

    def validate(self) -> None:
        """Check the single-assignment and dominance invariants."""
        defined: set = set()
        for name, base in ((n, b) for n, (_, b) in self.arrays.items()):
            defined.add((name, base))
        for step in self.steps:
            for expr in step_exprs(step):
                for node_name, node_version in expr_version_uses(expr):
                    if (node_name, node_version) not in defined:
                        raise InternalLoweringError(
                            f"use of {node_name}#{node_version} before assignment")
            if isinstance(step, MergeStep):
                for v in (step.then_version, step.else_version):
                    if (step.name, v) not in defined:
                        raise InternalLoweringError(
                            f"merge of undefined {step.name}#{v}")
            if isinstance(step, StoreStep):
                if (step.name, step.prev_version) not in defined:
                    raise InternalLoweringError(
                        f"store into undefined {step.name}#{step.prev_version}")
            if isinstance(step, (DefineStep, StoreStep, MergeStep)):
                key = (step.name, step.version)
                if key in defined:
                    raise InternalLoweringError(f"{step.name}#{step.version} assigned twice")
                defined.add(key)


def step_exprs(step: SsaStep) -> list:
    exprs = []
    if step.guard is not None:
        exprs.append(step.guard)
    if isinstance(step, DefineStep):
        exprs.append(step.expr)
    elif isinstance(step, StoreStep):
        exprs.extend([step.index, step.value])
    elif isinstance(step, MergeStep):
        exprs.append(step.cond)
    elif isinstance(step, (ConstraintStep, ClaimStep)):
        exprs.append(step.expr)
    return exprs


def expr_version_uses(e: Expr):
    """Yield (name, version) pairs referenced by an SSA expression."""
    for node in walk_exprs(e):
        if isinstance(node, Var) and node.version is not None:
            yield node.name, node.version
        elif isinstance(node, ArrayRead) and node.version is not None:
            yield node.name, node.version


class _SsaBuilder:
    def __init__(self, program: Program, entry: str, bound_k: int,
                 havoc_globals: bool, nondet_bases: Optional[dict] = None):
        self.program = program
        self.entry = program.function(entry)
        self.steps: list = []
        self.versions: dict = {}  # name -> next version counter
        self.env: dict = {}  # name -> current version
        self.types: dict = {}  # name -> ScalarType | ArrayType
        self.arrays: dict = {}
        self.nondet_symbols: list = []
        self.symbol_by_key: dict = {}  # (path, nid) -> symbol
        self.used_symbols: set = set()
        self.guard_stack: list = []
        self.temp_counter = 0
        self.havoc_globals = havoc_globals
        self.nondet_bases = nondet_bases if nondet_bases is not None \
            else nondet_base_names(program, entry, havoc_globals)
        self.setup_versions: dict = {}
        self.ssa = SsaProgram(entry=entry, bound_k=bound_k)

    # -- plumbing ------------------------------------------------------------

    def new_version(self, name: str) -> int:
        v = self.versions.get(name, 0) + 1
        self.versions[name] = v
        self.env[name] = v
        return v

    def guard_expr(self) -> Optional[Expr]:
        guard = None
        for conj in self.guard_stack:
            guard = conj if guard is None else Binary(NO_SPAN, BOOL, "&&", guard, conj)
        return guard

    def define(self, name: str, expr: Expr) -> int:
        v = self.new_version(name)
        self.steps.append(DefineStep(self.guard_expr(), name, v, expr))
        return v

    def register_nondet(self, node: Nondet) -> Nondet:
        # Return normalization can duplicate a nondet occurrence into both
        # arms of a branch; the copies denote the same input, so they share
        # one symbol keyed by (path, nid).
        key = (node.path, node.nid)
        if key in self.symbol_by_key:
            node.symbol = self.symbol_by_key[key]
        else:
            node.symbol = render_symbol(self.nondet_bases[node.nid], node.path)
            if node.symbol in self.used_symbols:
                raise InternalLoweringError(f"nondet symbol clash: {node.symbol}")
            self.used_symbols.add(node.symbol)
            self.symbol_by_key[key] = node.symbol
            self.nondet_symbols.append((node.symbol, node.ty))
        return node

    def make_nondet(self, ty: ScalarType, label: str) -> Nondet:
        node = Nondet(NO_SPAN, ty, -1, label, (), label)
        if label in self.used_symbols:
            raise InternalLoweringError(f"nondet symbol clash: {label}")
        self.used_symbols.add(label)
        self.nondet_symbols.append((label, ty))
        return node

    # -- expressions ----------------------------------------------------------

    def lower_expr(self, e: Expr) -> Expr:
        if isinstance(e, Lit):
            return clone_expr(e)
        if isinstance(e, Var):
            if e.name not in self.env:
                raise InternalLoweringError(f"unbound variable {e.name}")
            return Var(e.span, e.ty, e.name, self.env[e.name])
        if isinstance(e, Unary):
            return Unary(e.span, e.ty, e.op, self.lower_expr(e.operand))
        if isinstance(e, Binary):
            return Binary(e.span, e.ty, e.op, self.lower_expr(e.lhs), self.lower_expr(e.rhs))
        if isinstance(e, ArrayRead):
            if e.name not in self.env:
                raise InternalLoweringError(f"unbound array {e.name}")
            return ArrayRead(e.span, e.ty, e.name, self.lower_expr(e.index),
                             self.env[e.name], e.array_type or self.types.get(e.name))
        if isinstance(e, Cast):
            return Cast(e.span, e.ty, e.target, self.lower_expr(e.operand))
        if isinstance(e, Nondet):
            node = Nondet(e.span, e.ty, e.nid, e.label, e.path, e.symbol)
            return self.register_nondet(node)
        if isinstance(e, Ite):
            return Ite(e.span, e.ty, self.lower_expr(e.cond),
                       self.lower_expr(e.then), self.lower_expr(e.other))
        if isinstance(e, Call):
            raise InternalLoweringError(f"call to {e.name} survived inlining")
        raise AssertionError(f"unknown expr {e!r}")

    # -- initialization ---------------------------------------------------------

    def init_array(self, name: str, ty: ArrayType, havoc: bool, label: str) -> None:
        base = self.versions.get(name, 0)
        if name not in self.arrays:
            self.arrays[name] = (ty, base)
            self.versions[name] = base
        self.types[name] = ty
        prev = base if name not in self.env else self.env[name]
        for i in range(ty.size):
            if havoc:
                value: Expr = self.make_nondet(ty.elem, f"{label}[{i}]")
            else:
                value = Lit(NO_SPAN, ty.elem, 0)
            v = self.new_version(name)
            self.steps.append(StoreStep(self.guard_expr(), name, v, prev,
                                        Lit(NO_SPAN, U32, i), value))
            prev = v

    def init_scalar(self, name: str, ty: ScalarType, value: Optional[int]) -> None:
        self.types[name] = ty
        self.define(name, Lit(NO_SPAN, ty, value if value is not None else 0))

    def setup(self) -> None:
        # Parameters become the leading nondet symbols, in order.
        for p in self.entry.params:
            self.types[p.name] = p.ty
            self.define(p.name, self.make_nondet(p.ty, p.name))
        # Globals: initializer semantics for whole-program runs, fresh
        # inputs when verifying a function out of context.
        for g in self.program.globals:
            if isinstance(g.ty, ArrayType):
                self.init_array(g.name, g.ty, self.havoc_globals, g.name)
            elif self.havoc_globals:
                self.types[g.name] = g.ty
                self.define(g.name, self.make_nondet(g.ty, g.name))
            else:
                self.init_scalar(g.name, g.ty, g.init)
        # Hoist local declarations: zero-define every local up front so
        # branch-local declarations merge cleanly at joins.
        for stmt in iter_stmts(self.entry.body):
            if isinstance(stmt, Decl) and stmt.name not in self.types:
                if isinstance(stmt.ty, ArrayType):
                    self.init_array(stmt.name, stmt.ty, False, stmt.name)
                else:
                    self.init_scalar(stmt.name, stmt.ty, 0)
        self.setup_versions = dict(self.env)

    # -- statements ---------------------------------------------------------------

    def lower_block(self, body: list) -> None:
        for stmt in body:
            self.lower_stmt(stmt)

    def lower_stmt(self, stmt: Stmt) -> None:
        if isinstance(stmt, Decl):
            # A declaration re-initializes only if the hoisted zero value
            # may already have been overwritten (loop-body redeclarations).
            untouched = self.env.get(stmt.name) == self.setup_versions.get(stmt.name)
            if isinstance(stmt.ty, ArrayType):
                if not untouched:
                    self.init_array(stmt.name, stmt.ty, False, stmt.name)
            elif stmt.init is not None:
                self.define(stmt.name, self.lower_expr(stmt.init))
            elif not untouched:
                self.define(stmt.name, Lit(NO_SPAN, stmt.ty, 0))
            return
        if isinstance(stmt, Assign):
            self.define(stmt.name, self.lower_expr(stmt.expr))
            return
        if isinstance(stmt, Store):
            prev = self.env[stmt.name]
            v = self.new_version(stmt.name)
            self.steps.append(StoreStep(self.guard_expr(), stmt.name, v, prev,
                                        self.lower_expr(stmt.index),
                                        self.lower_expr(stmt.value)))
            return
        if isinstance(stmt, If):
            self.lower_if(stmt)
            return
        if isinstance(stmt, Assert):
            kind = "unwinding-assertion" if getattr(stmt, "unwinding", False) else "user-assert"
            self.steps.append(ClaimStep(self.guard_expr(), self.lower_expr(stmt.expr),
                                        kind, stmt.span))
            return
        if isinstance(stmt, Assume):
            origin = ORIGIN_UNWINDING if getattr(stmt, "unwinding", False) else ORIGIN_ASSUME
            self.steps.append(ConstraintStep(self.guard_expr(),
                                             self.lower_expr(stmt.expr), origin))
            return
        if isinstance(stmt, Return):
            if stmt.expr is not None:
                self.types["$ret"] = self.entry.return_type
                self.define("$ret", self.lower_expr(stmt.expr))
            return
        if isinstance(stmt, (While, For)):
            raise InternalLoweringError("loop survived unrolling")
        if isinstance(stmt, CallStmt):
            raise InternalLoweringError(f"call to {stmt.name} survived inlining")
        raise AssertionError(f"unknown stmt {stmt!r}")

    def lower_if(self, stmt: If) -> None:
        cond = self.lower_expr(stmt.cond)
        self.temp_counter += 1
        cond_name = f"$c{self.temp_counter}"
        self.types[cond_name] = BOOL
        cond_version = self.define(cond_name, cond)
        cond_ref = Var(stmt.span, BOOL, cond_name, cond_version)

        saved_env = dict(self.env)
        self.guard_stack.append(cond_ref)
        self.lower_block(stmt.then)
        then_env = dict(self.env)
        self.guard_stack.pop()

        self.env = dict(saved_env)
        neg = Unary(stmt.span, BOOL, "!", cond_ref)
        self.guard_stack.append(neg)
        self.lower_block(stmt.other)
        else_env = dict(self.env)
        self.guard_stack.pop()

        self.env = dict(saved_env)
        changed = [n for n in then_env if then_env[n] != saved_env.get(n)]
        changed += [n for n in else_env
                    if else_env[n] != saved_env.get(n) and n not in changed]
        for name in changed:
            if name.startswith("$c") and name not in saved_env:
                continue  # branch-local condition temp, dead after the join
            tv = then_env.get(name, saved_env.get(name))
            ev = else_env.get(name, saved_env.get(name))
            if tv is None or ev is None:
                raise InternalLoweringError(f"branch-local {name} not pre-declared")
            if tv == ev:
                self.env[name] = tv
                continue
            v = self.new_version(name)
            self.steps.append(MergeStep(self.guard_expr(), name, v, cond_ref, tv, ev))

    def finish(self) -> SsaProgram:
        self.ssa.steps = self.steps
        self.ssa.nondet_symbols = self.nondet_symbols
        self.ssa.arrays = self.arrays
        exit_values = {}
        if "$ret" in self.env:
            exit_values["return"] = ("$ret", self.env["$ret"])
        for g in self.program.globals:
            if g.name in self.env:
                exit_values[g.name] = (g.name, self.env[g.name])
        self.ssa.exit_values = exit_values
        return self.ssa


def to_ssa(program: Program, entry: str, bound_k: int = 1,
           havoc_globals: bool = False,
           nondet_bases: Optional[dict] = None) -> SsaProgram:
    """Lower a call-free, loop-free entry into single-assignment steps.

    Entry parameters and (in havoc mode) globals become nondet symbols;
    asserts become claims, assumes become constraints, branch joins become
    guard-merge steps. nondet_bases, when given, pins symbol names to the
    assignment computed over the original (pre-transform) program.
    """
    try:
        func = program.function(entry)
    except KeyError:
        raise UnknownEntry(entry) from None
    builder = _SsaBuilder(program, entry, bound_k, havoc_globals, nondet_bases)
    builder.setup()
    body = normalize_returns([clone_stmt(s) for s in func.body])
    builder.lower_block(body)
    return builder.finish()


# ---------------------------------------------------------------------------
# Debug printer (stable, line per step; used by golden tests)


def format_step(step: SsaStep) -> str:
    guard = f"  [if {pretty_expr(step.guard)}]" if step.guard is not None else ""
    if isinstance(step, DefineStep):
        return f"{step.name}#{step.version} = {pretty_expr(step.expr)}{guard}"
    if isinstance(step, StoreStep):
        return (f"{step.name}#{step.version} = {step.name}#{step.prev_version}"
                f"[{pretty_expr(step.index)} := {pretty_expr(step.value)}]{guard}")
    if isinstance(step, MergeStep):
        return (f"{step.name}#{step.version} = merge({pretty_expr(step.cond)}, "
                f"{step.name}#{step.then_version}, {step.name}#{step.else_version}){guard}")
    if isinstance(step, ConstraintStep):
        return f"constraint[{step.origin}] {pretty_expr(step.expr)}{guard}"
    if isinstance(step, ClaimStep):
        return f"claim[{step.kind}] @{step.span} {pretty_expr(step.expr)}{guard}"
    raise AssertionError(f"unknown step {step!r}")


def format_ssa(ssa: SsaProgram) -> str:
    lines = [f"entry {ssa.entry} k={ssa.bound_k}"]
    for symbol, ty in ssa.nondet_symbols:
        lines.append(f"input {symbol}: {ty}")
    for name, (ty, base) in sorted(ssa.arrays.items()):
        lines.append(f"array {name}#{base}: {ty}")
    lines.extend(format_step(s) for s in ssa.steps)
    for label, (name, version) in sorted(ssa.exit_values.items()):
        lines.append(f"exit {label} = {name}#{version}")
    return "\n".join(lines) + "\n"
