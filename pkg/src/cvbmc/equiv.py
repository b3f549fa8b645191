"""Bounded partial equivalence of two function versions by miter + BMC.

build_miter inlines each version inside its own program context, renames
the copies apart (including per-side global state), strips their internal
assertions, pairs their body nondets by occurrence so both copies read the
same inputs, and synthesizes a driver that feeds shared nondet arguments
and global values to both copies and asserts pairwise equality of the
return values and of every global either version may write.

check_equivalence runs the standard pipeline over the miter with only the
driver's equality asserts enabled. All unsat -> equivalent up to the bound;
any sat -> not equivalent with a replayable witness; anything else is
unknown (treated as non-equivalent by the continuous-verification driver).
Executions that exceed the bound or fail an assume in either copy are out
of scope: this is partial equivalence, sufficient to skip re-verification
at the same bound only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .frontend import iter_stmts
from .lang import (
    ArrayRead, ArrayType, Assert, Assign, Binary, BOOL, Call, CallStmt, Decl,
    Expr, FunctionDef, GlobalDecl, If, Lit, Nondet, NO_SPAN, Param, Program,
    Return, Stmt, Store, U32, Var, While, walk_exprs,
)
from .pipeline import PipelineConfig, SAFE_UP_TO_K, VIOLATION, verify_program
from .solve import NoCapableSolver
from .transform import inline_calls
from .witness import BitBudgetExceeded, Counterexample

EQUIVALENT = "equivalent-up-to-k"
NOT_EQUIVALENT = "not-equivalent"
UNKNOWN = "unknown"
INCOMPARABLE = "incomparable"


class SignatureMismatch(Exception):
    pass


@dataclass
class Miter:
    program: Program
    entry: str
    bound_hint: int = 0


@dataclass
class EquivVerdict:
    status: str
    k: int
    witness: Optional[Counterexample] = None
    detail: str = ""

    def to_dict(self) -> dict:
        data = {"status": self.status, "k": self.k}
        if self.witness is not None:
            data["witness"] = self.witness.to_dict()
        if self.detail:
            data["detail"] = self.detail
        return data


# ---------------------------------------------------------------------------
# Renaming helpers


def _rename_globals_expr(e: Expr, rename: dict) -> None:
    for node in walk_exprs(e):
        if isinstance(node, (Var, ArrayRead)) and node.name in rename:
            node.name = rename[node.name]


def _rename_globals_body(body: list, rename: dict) -> None:
    for stmt in iter_stmts(body):
        if isinstance(stmt, (Decl, Assign, Store)) and stmt.name in rename:
            stmt.name = rename[stmt.name]
        for expr in _exprs_of(stmt):
            _rename_globals_expr(expr, rename)


def _exprs_of(stmt: Stmt) -> list:
    from .transform import _stmt_exprs

    return _stmt_exprs(stmt)


def _strip_asserts(body: list) -> list:
    out = []
    for stmt in body:
        if isinstance(stmt, Assert):
            continue
        if isinstance(stmt, If):
            out.append(If(stmt.span, stmt.cond, _strip_asserts(stmt.then),
                          _strip_asserts(stmt.other)))
        elif isinstance(stmt, While):
            out.append(While(stmt.span, stmt.cond, _strip_asserts(stmt.body),
                             stmt.loop_id))
        else:
            out.append(stmt)
    return out


def _renumber(body: list, next_ids: dict) -> None:
    """Fresh nondet ids and loop ids so the two sides cannot collide."""
    for stmt in iter_stmts(body):
        if isinstance(stmt, While):
            stmt.loop_id = next_ids["loop"]
            next_ids["loop"] += 1
        for expr in _exprs_of(stmt):
            for node in walk_exprs(expr):
                if isinstance(node, Nondet):
                    node.nid = next_ids["nondet"]
                    next_ids["nondet"] += 1


def _collect_nondets(body: list) -> list:
    """Body nondets in static evaluation order (loops count once: paired
    inputs are per-occurrence, and unrolled copies pair positionally too)."""
    out = []
    for stmt in iter_stmts(body):
        for expr in _exprs_of(stmt):
            for node in walk_exprs(expr):
                if isinstance(node, Nondet):
                    out.append(node)
    return out


def _written_globals(body: list, globals_names: set) -> set:
    out = set()
    for stmt in iter_stmts(body):
        if isinstance(stmt, (Assign, Store)) and stmt.name in globals_names:
            out.add(stmt.name)
    return out


# ---------------------------------------------------------------------------
# Miter construction


def build_miter(old: FunctionDef, new: FunctionDef, ctx_old: Program,
                ctx_new: Program) -> Miter:
    """Combine two function versions into one program whose only assertions
    state that identical inputs produce identical outputs."""
    if old.signature != new.signature:
        raise SignatureMismatch(
            f"{old.name}{old.signature} vs {new.name}{new.signature}")

    next_ids = {"nondet": 0, "loop": 0, "site": 0}
    sides = []
    for tag, func, ctx in (("old", old, ctx_old), ("new", new, ctx_new)):
        inlined = inline_calls(ctx, func.name).function(func.name)
        body = _strip_asserts(inlined.body)
        global_names = {g.name for g in ctx.globals}
        written = _written_globals(body, global_names)
        rename = {g: f"{g}__{tag}" for g in global_names}
        _rename_globals_body(body, rename)
        _renumber(body, next_ids)
        sides.append({
            "tag": tag,
            "func": FunctionDef(f"__{tag}_{func.name}", list(func.params),
                                func.return_type, body, func.span),
            "globals": [GlobalDecl(rename[g.name], g.ty, g.init, g.span)
                        for g in ctx.globals],
            "written": {rename[g] for g in written},
            "nondets": _collect_nondets(body),
        })
    old_side, new_side = sides

    # Pair body nondets by occurrence: each pair becomes one shared driver
    # input passed to both copies through an extra trailing parameter.
    shared_params = []
    for i, (a, b) in enumerate(zip(old_side["nondets"], new_side["nondets"])):
        if a.ty != b.ty:
            break
        shared_params.append((f"$shared{i}", a.ty))
    for i, (name, ty) in enumerate(shared_params):
        for side in sides:
            node = side["nondets"][i]
            _replace_nondet(side["func"].body, node, Var(NO_SPAN, ty, name))
            side["func"].params.append(Param(name, ty))

    driver = _build_driver(old_side, new_side, old, next_ids, shared_params)
    program = Program(
        functions=[old_side["func"], new_side["func"], driver],
        globals=old_side["globals"] + new_side["globals"],
    )
    return Miter(program, driver.name)


def _replace_nondet(body: list, target: Nondet, replacement: Var) -> None:
    from .lang import Assume

    def fix(e: Expr) -> Expr:
        if e is target:
            return replacement
        for attr in ("operand", "lhs", "rhs", "index", "cond", "then", "other"):
            child = getattr(e, attr, None)
            if isinstance(child, Expr):
                setattr(e, attr, fix(child))
        if isinstance(e, Call):
            e.args = [fix(a) for a in e.args]
        return e

    for stmt in iter_stmts(body):
        if isinstance(stmt, Decl) and stmt.init is not None:
            stmt.init = fix(stmt.init)
        elif isinstance(stmt, Assign):
            stmt.expr = fix(stmt.expr)
        elif isinstance(stmt, Store):
            stmt.index = fix(stmt.index)
            stmt.value = fix(stmt.value)
        elif isinstance(stmt, (If, While)):
            stmt.cond = fix(stmt.cond)
        elif isinstance(stmt, (Assert, Assume)):
            stmt.expr = fix(stmt.expr)
        elif isinstance(stmt, Return) and stmt.expr is not None:
            stmt.expr = fix(stmt.expr)
        elif isinstance(stmt, CallStmt):
            stmt.args = [fix(a) for a in stmt.args]


def _build_driver(old_side: dict, new_side: dict, old: FunctionDef,
                  next_ids: dict, shared_params: list) -> FunctionDef:
    body: list = []
    taken = {g.name for g in old_side["globals"] + new_side["globals"]}

    def fresh_nondet(ty) -> Nondet:
        node = Nondet(NO_SPAN, ty, next_ids["nondet"], "", (), "")
        next_ids["nondet"] += 1
        return node

    # One shared nondet per parameter, named after the old version's params.
    arg_names = []
    for i, p in enumerate(old.params):
        name = p.name if p.name not in taken else f"arg{i}"
        taken.add(name)
        arg_names.append(name)
        nd = fresh_nondet(p.ty)
        nd.label = name
        body.append(Decl(NO_SPAN, name, p.ty, nd))
    shared_names = []
    for name, ty in shared_params:
        nd = fresh_nondet(ty)
        nd.label = name.lstrip("$")
        shared_name = f"shared{len(shared_names)}"
        shared_names.append(shared_name)
        body.append(Decl(NO_SPAN, shared_name, ty, nd))

    # Globals: both sides start from identical, unconstrained values.
    for g_old, g_new in zip(old_side["globals"], new_side["globals"]):
        if isinstance(g_old.ty, ArrayType):
            for i in range(g_old.ty.size):
                tmp = f"$g{len(body)}"
                nd = fresh_nondet(g_old.ty.elem)
                nd.label = f"{g_old.name[:-5]}[{i}]"  # strip __old for display
                body.append(Decl(NO_SPAN, tmp, g_old.ty.elem, nd))
                idx = Lit(NO_SPAN, U32, i)
                body.append(Store(NO_SPAN, g_old.name, idx,
                                  Var(NO_SPAN, g_old.ty.elem, tmp)))
                idx2 = Lit(NO_SPAN, U32, i)
                body.append(Store(NO_SPAN, g_new.name, idx2,
                                  Var(NO_SPAN, g_old.ty.elem, tmp)))
        else:
            tmp = f"$g{len(body)}"
            nd = fresh_nondet(g_old.ty)
            nd.label = g_old.name[:-5]
            body.append(Decl(NO_SPAN, tmp, g_old.ty, nd))
            body.append(Assign(NO_SPAN, g_old.name, Var(NO_SPAN, g_old.ty, tmp)))
            body.append(Assign(NO_SPAN, g_new.name, Var(NO_SPAN, g_old.ty, tmp)))

    call_args = [Var(NO_SPAN, p.ty, n) for p, n in zip(old.params, arg_names)]
    call_args += [Var(NO_SPAN, ty, n)
                  for (_, ty), n in zip(shared_params, shared_names)]

    def fresh_site() -> int:
        site = next_ids["site"]
        next_ids["site"] += 1
        return site

    def call_expr(side: dict) -> Call:
        return Call(NO_SPAN, old.return_type, side["func"].name,
                    [_clone(a) for a in call_args], fresh_site())

    if old.return_type is not None:
        body.append(Decl(NO_SPAN, "$ret_old", old.return_type, call_expr(old_side)))
        body.append(Decl(NO_SPAN, "$ret_new", old.return_type, call_expr(new_side)))
        body.append(Assert(Span_at(1, 1), Binary(
            NO_SPAN, BOOL, "==",
            Var(NO_SPAN, old.return_type, "$ret_old"),
            Var(NO_SPAN, old.return_type, "$ret_new"))))
    else:
        body.append(CallStmt(NO_SPAN, old_side["func"].name,
                             [_clone(a) for a in call_args], fresh_site()))
        body.append(CallStmt(NO_SPAN, new_side["func"].name,
                             [_clone(a) for a in call_args], fresh_site()))

    # Pairwise equality of every global either side may write.
    written = {n[:-5] for n in old_side["written"]} \
        | {n[:-5] for n in new_side["written"]}
    line = 2
    for g_old, g_new in zip(old_side["globals"], new_side["globals"]):
        base = g_old.name[:-5]
        if base not in written:
            continue
        if isinstance(g_old.ty, ArrayType):
            for i in range(g_old.ty.size):
                body.append(Assert(Span_at(line, 1), Binary(
                    NO_SPAN, BOOL, "==",
                    ArrayRead(NO_SPAN, g_old.ty.elem, g_old.name,
                              Lit(NO_SPAN, U32, i)),
                    ArrayRead(NO_SPAN, g_old.ty.elem, g_new.name,
                              Lit(NO_SPAN, U32, i)))))
                line += 1
        else:
            body.append(Assert(Span_at(line, 1), Binary(
                NO_SPAN, BOOL, "==",
                Var(NO_SPAN, g_old.ty, g_old.name),
                Var(NO_SPAN, g_old.ty, g_new.name))))
            line += 1
    return FunctionDef("$miter", [], None, body, NO_SPAN)


def Span_at(line: int, col: int):
    from .lang import Span

    return Span(line, col, line)


def _clone(e: Expr) -> Expr:
    from .lang import clone_expr

    return clone_expr(e)


# ---------------------------------------------------------------------------
# Equivalence checking


def check_equivalence(miter: Miter, k: int,
                      cfg: Optional[PipelineConfig] = None) -> EquivVerdict:
    """BMC over the miter with only its equality asserts enabled."""
    base = cfg or PipelineConfig()
    pipeline_cfg = PipelineConfig(
        k=k,
        mode="assumption",
        checks=frozenset(),  # only the driver's equality asserts
        encoding=base.encoding,
        solvers=base.solvers,
        limit_bits=base.limit_bits,
        jobs=base.jobs,
        havoc_globals=False,  # the driver havocs shared state itself
        force_approximate=base.force_approximate,
        dump_smt=base.dump_smt,
    )
    try:
        report = verify_program(miter.program, miter.entry, pipeline_cfg)
    except (NoCapableSolver, BitBudgetExceeded) as err:
        return EquivVerdict(UNKNOWN, k, detail=str(err))
    status = report.worst_status
    if status == SAFE_UP_TO_K:
        return EquivVerdict(EQUIVALENT, k)
    if status == VIOLATION:
        witness = next(o.witness for o in report.outcomes
                       if o.status == VIOLATION)
        return EquivVerdict(NOT_EQUIVALENT, k, witness)
    detail = "; ".join(o.detail for o in report.outcomes if o.detail)
    return EquivVerdict(UNKNOWN, k, detail=detail)


def check_function_equivalence(old_prog: Program, new_prog: Program,
                               old_name: str, new_name: str, k: int,
                               cfg: Optional[PipelineConfig] = None) -> EquivVerdict:
    """Convenience wrapper: build the miter and check; a signature mismatch
    is reported as incomparable."""
    try:
        old_f = old_prog.function(old_name)
        new_f = new_prog.function(new_name)
    except KeyError as err:
        return EquivVerdict(INCOMPARABLE, k, detail=f"no such function {err}")
    try:
        miter = build_miter(old_f, new_f, old_prog, new_prog)
    except SignatureMismatch as err:
        return EquivVerdict(INCOMPARABLE, k, detail=str(err))
    return check_equivalence(miter, k, cfg)
