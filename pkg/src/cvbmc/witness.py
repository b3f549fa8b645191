"""Concrete execution: the MiniC interpreter, the SSA evaluator, replayable
counterexamples, and the exhaustive ground-truth oracle.

The interpreter implements exact two's-complement semantics and checks the
same property classes the instrumentation claims about, at the moment the
offending expression is evaluated; it is an implementation of the language
semantics independent of the transform/vcgen/encode pipeline, which is what
makes it usable as a referee. The exhaustive oracle enumerates every input
assignment (within a bit budget) and records, per claim site, whether some
execution's first failure is that site; under prior-claim chaining that is
exactly the per-VC verdict the checker must reproduce.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .lang import (
    ArrayRead, ArrayType, Assert, Assign, Assume, Binary, Call, CallStmt,
    Cast, Decl, Expr, For, If, Ite, Lit, Nondet, Program, Return,
    ScalarType, Span, Stmt, Store, Unary, Var, While, pretty_expr,
)
from .semantics import (
    cast_value, eval_binary, eval_compare, eval_unbounded, from_unsigned,
    to_unsigned, wrap,
)
from .transform import (
    ClaimStep, ConstraintStep, DefineStep, MergeStep, SsaProgram, StoreStep,
    nondet_base_names, render_symbol,
)
from .vcgen import (
    ARRAY_BOUNDS, DEFAULT_CHECKS, DIV_BY_ZERO, MOD_BY_ZERO, SHIFT_RANGE,
    SIGNED_OVERFLOW, UNWINDING_ASSERTION, USER_ASSERT, VerificationCondition,
)

COMPLETED = "completed"
VIOLATED = "violated"
ASSUMPTION_FAILED = "assumption-failed"
DEPTH_EXCEEDED = "depth-exceeded"

SAFE = "SAFE"
VIOLATION = "VIOLATION"


class WitnessError(Exception):
    pass


class InputArityMismatch(WitnessError):
    pass


class BitBudgetExceeded(WitnessError):
    pass


class ReplayMismatch(WitnessError):
    """The model does not violate the claim it was supposed to violate."""


@dataclass
class ExecOutcome:
    status: str
    span: Span = Span()
    kind: str = ""
    return_value: Optional[int] = None
    globals_state: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Violation(Exception):
    def __init__(self, span: Span, kind: str, text: str):
        self.span = span
        self.kind = kind
        self.text = text


class _AssumeFailed(Exception):
    def __init__(self, span: Span):
        self.span = span


class _DepthExceeded(Exception):
    def __init__(self, span: Span):
        self.span = span


# ---------------------------------------------------------------------------
# Tree interpreter


class _Interp:
    def __init__(self, program: Program, entry: str, inputs: dict,
                 max_iters: int, checks: frozenset, havoc_globals: bool,
                 record_trace: bool, missing: str):
        self.program = program
        self.entry = program.function(entry)
        self.inputs = inputs
        self.max_iters = max_iters
        self.checks = checks
        self.havoc_globals = havoc_globals
        self.record_trace = record_trace
        self.missing = missing
        self.bases = nondet_base_names(program, entry, havoc_globals)
        self.path: list = []
        self.trace: list = []
        self.globals: dict = {}
        self.stmt_text = ""

    def input_value(self, symbol: str, ty: ScalarType, span: Span) -> int:
        if symbol in self.inputs:
            return wrap(self.inputs[symbol], ty)
        if self.missing == "zero":
            return 0
        raise InputArityMismatch(f"no value for nondet symbol {symbol!r}")

    def run(self) -> ExecOutcome:
        for g in self.program.globals:
            if isinstance(g.ty, ArrayType):
                if self.havoc_globals:
                    self.globals[g.name] = [
                        self.input_value(f"{g.name}[{i}]", g.ty.elem, g.span)
                        for i in range(g.ty.size)]
                else:
                    self.globals[g.name] = [0] * g.ty.size
            elif self.havoc_globals:
                self.globals[g.name] = self.input_value(g.name, g.ty, g.span)
            else:
                self.globals[g.name] = g.init if g.init is not None else 0
        frame = {}
        for p in self.entry.params:
            frame[p.name] = self.input_value(p.name, p.ty, self.entry.span)
        try:
            ret = self.exec_body(self.entry.body, frame)
        except _Return as r:
            ret = r.value
        except _Violation as v:
            self.trace.append({"line": v.span.line, "col": v.span.col,
                               "text": v.text, "var": None, "value": None})
            return ExecOutcome(VIOLATED, v.span, v.kind, None,
                               self.snapshot(), self.trace)
        except _AssumeFailed as a:
            return ExecOutcome(ASSUMPTION_FAILED, a.span, "", None,
                               self.snapshot(), self.trace)
        except _DepthExceeded as d:
            return ExecOutcome(DEPTH_EXCEEDED, d.span, "", None,
                               self.snapshot(), self.trace)
        return ExecOutcome(COMPLETED, Span(), "", ret, self.snapshot(), self.trace)

    def snapshot(self) -> dict:
        return {name: (list(v) if isinstance(v, list) else v)
                for name, v in self.globals.items()}

    # -- statements -----------------------------------------------------------

    def exec_body(self, body: list, frame: dict) -> Optional[int]:
        for stmt in body:
            self.exec_stmt(stmt, frame)
        return None

    def record(self, stmt: Stmt, var: str, value: int) -> None:
        if self.record_trace:
            self.trace.append({"line": stmt.span.line, "col": stmt.span.col,
                               "text": self.stmt_text, "var": var, "value": value})

    def set_var(self, name: str, value: int, frame: dict) -> None:
        if name in frame:
            frame[name] = value
        else:
            self.globals[name] = value

    def get_store(self, name: str, frame: dict):
        return frame[name] if name in frame else self.globals[name]

    def exec_stmt(self, stmt: Stmt, frame: dict) -> None:
        if isinstance(stmt, Decl):
            if isinstance(stmt.ty, ArrayType):
                frame[stmt.name] = [0] * stmt.ty.size
                return
            self.stmt_text = str(stmt)
            value = self.eval(stmt.init, frame) if stmt.init is not None else 0
            frame[stmt.name] = value
            self.record(stmt, stmt.name, value)
            return
        if isinstance(stmt, Assign):
            self.stmt_text = str(stmt)
            value = self.eval(stmt.expr, frame)
            self.set_var(stmt.name, value, frame)
            self.record(stmt, stmt.name, value)
            return
        if isinstance(stmt, Store):
            self.stmt_text = str(stmt)
            arr = self.get_store(stmt.name, frame)
            idx = self.eval(stmt.index, frame)
            value = self.eval(stmt.value, frame)
            if not 0 <= idx < len(arr):
                if ARRAY_BOUNDS in self.checks:
                    raise _Violation(stmt.index.span, ARRAY_BOUNDS, self.stmt_text)
                return  # masked: out-of-bounds stores are unobservable
            arr[idx] = value
            self.record(stmt, f"{stmt.name}[{idx}]", value)
            return
        if isinstance(stmt, If):
            self.stmt_text = f"if ({pretty_expr(stmt.cond)})"
            if self.eval(stmt.cond, frame):
                self.exec_body(stmt.then, frame)
            else:
                self.exec_body(stmt.other, frame)
            return
        if isinstance(stmt, While):
            self.exec_loop(stmt.cond, stmt.body, None, stmt.loop_id, stmt.span, frame)
            return
        if isinstance(stmt, For):
            self.exec_stmt(stmt.init, frame)
            self.exec_loop(stmt.cond, stmt.body, stmt.step, stmt.loop_id,
                           stmt.span, frame)
            return
        if isinstance(stmt, Assert):
            self.stmt_text = str(stmt)
            if not self.eval(stmt.expr, frame):
                kind = UNWINDING_ASSERTION if stmt.unwinding else USER_ASSERT
                raise _Violation(stmt.span, kind, self.stmt_text)
            return
        if isinstance(stmt, Assume):
            self.stmt_text = str(stmt)
            if not self.eval(stmt.expr, frame):
                raise _AssumeFailed(stmt.span)
            return
        if isinstance(stmt, Return):
            self.stmt_text = str(stmt)
            value = self.eval(stmt.expr, frame) if stmt.expr is not None else None
            raise _Return(value)
        if isinstance(stmt, CallStmt):
            self.stmt_text = str(stmt)
            self.call(stmt.name, stmt.args, stmt.site, frame)
            return
        raise AssertionError(f"unknown stmt {stmt!r}")

    def exec_loop(self, cond: Expr, body: list, step: Optional[Stmt],
                  loop_id: int, span: Span, frame: dict) -> None:
        count = 0
        while True:
            self.stmt_text = f"while ({pretty_expr(cond)})"
            if not self.eval(cond, frame):
                return
            if count >= self.max_iters:
                raise _DepthExceeded(span)
            self.path.append(("L", loop_id, count))
            try:
                self.exec_body(body, frame)
                if step is not None:
                    self.exec_stmt(step, frame)
            finally:
                self.path.pop()
            count += 1

    def call(self, name: str, args: list, site: int, frame: dict) -> Optional[int]:
        callee = self.program.function(name)
        values = [self.eval(a, frame) for a in args]
        self.path.append(("c", site))
        callee_frame = dict(zip((p.name for p in callee.params), values))
        try:
            self.exec_body(callee.body, callee_frame)
            result = None
        except _Return as r:
            result = r.value
        finally:
            self.path.pop()
        return result

    # -- expressions ------------------------------------------------------------

    def eval(self, e: Expr, frame: dict) -> int:
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, Var):
            return frame[e.name] if e.name in frame else self.globals[e.name]
        if isinstance(e, Unary):
            v = self.eval(e.operand, frame)
            if e.op == "!":
                return 0 if v else 1
            if e.op == "~":
                return wrap(~v, e.ty)
            if e.ty.signed and v == e.ty.min_value and SIGNED_OVERFLOW in self.checks:
                raise _Violation(e.span, SIGNED_OVERFLOW, self.stmt_text)
            return wrap(-v, e.ty)
        if isinstance(e, Binary):
            return self.eval_binary(e, frame)
        if isinstance(e, ArrayRead):
            arr = self.get_store(e.name, frame)
            idx = self.eval(e.index, frame)
            if not 0 <= idx < len(arr):
                if ARRAY_BOUNDS in self.checks:
                    raise _Violation(e.span, ARRAY_BOUNDS, self.stmt_text)
                return 0  # masked read
            return arr[idx]
        if isinstance(e, Cast):
            return cast_value(self.eval(e.operand, frame), e.target)
        if isinstance(e, Nondet):
            symbol = render_symbol(self.bases[e.nid], tuple(self.path) + e.path)
            return self.input_value(symbol, e.ty, e.span)
        if isinstance(e, Call):
            return self.call(e.name, e.args, e.site, frame)
        if isinstance(e, Ite):
            if self.eval(e.cond, frame):
                return self.eval(e.then, frame)
            return self.eval(e.other, frame)
        raise AssertionError(f"unknown expr {e!r}")

    def eval_binary(self, e: Binary, frame: dict) -> int:
        op = e.op
        if op == "&&":
            return self.eval(e.rhs, frame) if self.eval(e.lhs, frame) else 0
        if op == "||":
            return 1 if self.eval(e.lhs, frame) else self.eval(e.rhs, frame)
        a = self.eval(e.lhs, frame)
        b = self.eval(e.rhs, frame)
        if op in ("==", "!=", "<", "<=", ">", ">="):
            return 1 if eval_compare(op, a, b) else 0
        if op == "/" and b == 0 and DIV_BY_ZERO in self.checks:
            raise _Violation(e.span, DIV_BY_ZERO, self.stmt_text)
        if op == "%" and b == 0 and MOD_BY_ZERO in self.checks:
            raise _Violation(e.span, MOD_BY_ZERO, self.stmt_text)
        if op in ("<<", ">>") and SHIFT_RANGE in self.checks:
            if to_unsigned(b, e.ty) >= e.ty.width:
                raise _Violation(e.span, SHIFT_RANGE, self.stmt_text)
        if op in ("+", "-", "*") and e.ty.signed and SIGNED_OVERFLOW in self.checks:
            exact = {"+": a + b, "-": a - b, "*": a * b}[op]
            if not (e.ty.min_value <= exact <= e.ty.max_value):
                raise _Violation(e.span, SIGNED_OVERFLOW, self.stmt_text)
        return eval_binary(op, a, b, e.ty)


def interpret(program: Program, entry: str, inputs: Union[dict, list],
              max_iters: int, checks: frozenset = DEFAULT_CHECKS,
              havoc_globals: bool = False, record_trace: bool = False,
              missing: str = "error") -> ExecOutcome:
    """Run the entry function on concrete nondet inputs.

    inputs maps nondet symbols to values; a plain list is matched against
    the program's static nondet order (see nondet_space). Execution stops at
    the first claim violation, a failed assume, or a loop needing more than
    max_iters iterations.
    """
    if isinstance(inputs, list):
        space = nondet_space(program, entry, max_iters, havoc_globals)
        if len(inputs) != len(space):
            raise InputArityMismatch(
                f"program takes {len(space)} nondet values, got {len(inputs)}")
        inputs = {sym: val for (sym, _), val in zip(space, inputs)}
    return _Interp(program, entry, inputs, max_iters, checks, havoc_globals,
                   record_trace, missing).run()


# ---------------------------------------------------------------------------
# Static nondet input space (independent of the transform pipeline)


def nondet_space(program: Program, entry: str, k: int,
                 havoc_globals: bool = False) -> list:
    """All nondet symbols an execution of entry can consume within k
    iterations per loop, in evaluation order: parameters, havocked globals,
    then body nondets across inlined calls and loop iterations."""
    func = program.function(entry)
    out: list = []
    for p in func.params:
        out.append((p.name, p.ty))
    if havoc_globals:
        for g in program.globals:
            if isinstance(g.ty, ArrayType):
                out.extend((f"{g.name}[{i}]", g.ty.elem) for i in range(g.ty.size))
            else:
                out.append((g.name, g.ty))
    bases = nondet_base_names(program, entry, havoc_globals)

    def visit_expr(e: Expr, path: tuple) -> None:
        if isinstance(e, Nondet):
            out.append((render_symbol(bases[e.nid], path), e.ty))
        elif isinstance(e, Unary):
            visit_expr(e.operand, path)
        elif isinstance(e, Binary):
            visit_expr(e.lhs, path)
            visit_expr(e.rhs, path)
        elif isinstance(e, ArrayRead):
            visit_expr(e.index, path)
        elif isinstance(e, Cast):
            visit_expr(e.operand, path)
        elif isinstance(e, Ite):
            visit_expr(e.cond, path)
            visit_expr(e.then, path)
            visit_expr(e.other, path)
        elif isinstance(e, Call):
            for a in e.args:
                visit_expr(a, path)
            visit_body(program.function(e.name).body, path + (("c", e.site),))

    def visit_body(body: list, path: tuple) -> None:
        for stmt in body:
            if isinstance(stmt, Decl):
                if stmt.init is not None:
                    visit_expr(stmt.init, path)
            elif isinstance(stmt, Assign):
                visit_expr(stmt.expr, path)
            elif isinstance(stmt, Store):
                visit_expr(stmt.index, path)
                visit_expr(stmt.value, path)
            elif isinstance(stmt, If):
                visit_expr(stmt.cond, path)
                visit_body(stmt.then, path)
                visit_body(stmt.other, path)
            elif isinstance(stmt, While):
                for i in range(k):
                    visit_body(stmt.body, path + (("L", stmt.loop_id, i),))
            elif isinstance(stmt, For):
                visit_body([stmt.init], path)
                for i in range(k):
                    visit_body(stmt.body + [stmt.step],
                               path + (("L", stmt.loop_id, i),))
            elif isinstance(stmt, (Assert, Assume)):
                visit_expr(stmt.expr, path)
            elif isinstance(stmt, Return):
                if stmt.expr is not None:
                    visit_expr(stmt.expr, path)
            elif isinstance(stmt, CallStmt):
                for a in stmt.args:
                    visit_expr(a, path)
                visit_body(program.function(stmt.name).body,
                           path + (("c", stmt.site),))

    visit_body(func.body, ())
    return out


def space_bits(space: list) -> int:
    return sum(ty.width for _, ty in space)


def enumerate_assignments(space: list):
    """Yield input dicts over the space in lexicographic bit-pattern order
    (first symbol outermost, each symbol counting 0, 1, 2, ...)."""
    symbols = [s for s, _ in space]
    types = [t for _, t in space]
    for pattern in itertools.product(*(range(1 << t.width) for t in types)):
        yield {sym: from_unsigned(bits, ty)
               for sym, ty, bits in zip(symbols, types, pattern)}


# ---------------------------------------------------------------------------
# SSA evaluation (shared by the enumerative solver and differential tests)


@dataclass
class SsaRun:
    values: dict  # (name, version) -> value or array dict
    events: list  # ("claim", ClaimStep, guard, value) | ("constraint", step, holds)

    def first_violation(self) -> Optional[ClaimStep]:
        """The first claim this run falsifies, honoring program order: a
        failed constraint excludes everything after it, and an earlier
        failing claim is the first cause."""
        for event in self.events:
            if event[0] == "constraint":
                if not event[2]:
                    return None
            else:
                _, step, guard, value = event
                if guard and not value:
                    return step
        return None

    def constraints_hold(self) -> bool:
        return all(ev[2] for ev in self.events if ev[0] == "constraint")

    def claim_results(self) -> list:
        return [(ev[1], ev[2], ev[3]) for ev in self.events if ev[0] == "claim"]

    def exit_value(self, ssa: SsaProgram, label: str):
        name, version = ssa.exit_values[label]
        return self.values[(name, version)]


class _SsaEval:
    def __init__(self, ssa: SsaProgram, inputs: dict, semantics: str):
        self.ssa = ssa
        self.inputs = inputs
        self.semantics = semantics
        self.values: dict = {}

    def run(self) -> SsaRun:
        for name, (_, base) in self.ssa.arrays.items():
            self.values[(name, base)] = {}
        events = []
        for step in self.ssa.steps:
            guard = self.eval(step.guard) if step.guard is not None else 1
            if isinstance(step, DefineStep):
                self.values[(step.name, step.version)] = self.eval(step.expr)
            elif isinstance(step, StoreStep):
                prev = self.values[(step.name, step.prev_version)]
                idx = self.eval(step.index)
                value = self.eval(step.value)
                size = self.ssa.arrays[step.name][0].size
                if 0 <= idx < size:
                    new = dict(prev)
                    new[idx] = value
                else:
                    new = prev  # masked: out-of-bounds store is unobservable
                self.values[(step.name, step.version)] = new
            elif isinstance(step, MergeStep):
                chosen = step.then_version if self.eval(step.cond) else step.else_version
                self.values[(step.name, step.version)] = self.values[(step.name, chosen)]
            elif isinstance(step, ConstraintStep):
                holds = bool(self.eval(step.expr)) if guard else True
                events.append(("constraint", step, holds))
            elif isinstance(step, ClaimStep):
                value = bool(self.eval(step.expr)) if guard else True
                events.append(("claim", step, bool(guard), value))
        return SsaRun(self.values, events)

    def eval(self, e: Expr) -> int:
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, Var):
            return self.values[(e.name, e.version)]
        if isinstance(e, Nondet):
            if e.symbol not in self.inputs:
                raise InputArityMismatch(f"no value for {e.symbol!r}")
            return wrap(self.inputs[e.symbol], e.ty)
        if isinstance(e, Unary):
            v = self.eval(e.operand)
            if e.op == "!":
                return 0 if v else 1
            if e.op == "~":
                return wrap(~v, e.ty)
            if self.semantics == "unbounded":
                return -v
            return wrap(-v, e.ty)
        if isinstance(e, Binary):
            if e.op == "&&":
                return self.eval(e.rhs) if self.eval(e.lhs) else 0
            if e.op == "||":
                return 1 if self.eval(e.lhs) else self.eval(e.rhs)
            a = self.eval(e.lhs)
            b = self.eval(e.rhs)
            if e.op in ("==", "!=", "<", "<=", ">", ">="):
                return 1 if eval_compare(e.op, a, b) else 0
            if self.semantics == "unbounded":
                if e.op in ("&", "|", "^", "<<", ">>"):
                    raise AssertionError(
                        f"bit-level op {e.op} has no unbounded-integer reading")
                return eval_unbounded(e.op, a, b)
            return eval_binary(e.op, a, b, e.ty)
        if isinstance(e, ArrayRead):
            arr = self.values[(e.name, e.version)]
            idx = self.eval(e.index)
            if not 0 <= idx < e.array_type.size:
                return 0  # masked read
            return arr.get(idx, 0)
        if isinstance(e, Cast):
            return cast_value(self.eval(e.operand), e.target)
        if isinstance(e, Ite):
            return self.eval(e.then) if self.eval(e.cond) else self.eval(e.other)
        raise AssertionError(f"unknown expr {e!r}")


def ssa_eval(ssa: SsaProgram, inputs: dict, semantics: str = "bitvec") -> SsaRun:
    """Evaluate an SSA program on concrete inputs. bitvec semantics follow
    the interpreter exactly; unbounded semantics mirror the integer
    encoding (no wraparound in + - * /)."""
    return _SsaEval(ssa, inputs, semantics).run()


def vc_holds(vc: VerificationCondition, inputs: dict,
             semantics: str = "bitvec") -> Optional[bool]:
    """Evaluate one VC on one assignment: None when a constraint excludes
    the assignment, else whether the property holds."""
    run = ssa_eval(vc.ssa, inputs, semantics)
    if not run.constraints_hold():
        return None
    evaluator = _SsaEval(vc.ssa, inputs, semantics)
    evaluator.values = run.values
    guard = evaluator.eval(vc.property_guard) if vc.property_guard is not None else 1
    if not guard:
        return True
    return bool(evaluator.eval(vc.property_expr))


# ---------------------------------------------------------------------------
# Counterexamples


@dataclass
class Counterexample:
    vc_id: str
    inputs: list  # of {"symbol", "type", "value"}
    trace: list  # of {"line", "col", "text", "var", "value"}
    kind: str

    def to_dict(self) -> dict:
        return {"vc_id": self.vc_id, "inputs": self.inputs,
                "trace": self.trace, "kind": self.kind}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_dict(data: dict) -> "Counterexample":
        return Counterexample(data["vc_id"], data["inputs"], data["trace"],
                              data["kind"])

    def input_dict(self) -> dict:
        return {entry["symbol"]: entry["value"] for entry in self.inputs}


def parse_vc_id(vc_id: str) -> tuple:
    """(function, rel_line, col, kind, ordinal) from a VC id string."""
    func, line, col, kind, ordinal = vc_id.rsplit(":", 4)
    return func, int(line), int(col), kind, int(ordinal)


def outcome_matches_claim(outcome: ExecOutcome, rel_line: int, col: int,
                          kind: str) -> bool:
    if outcome.status == VIOLATED:
        return (outcome.span.rel_line, outcome.span.col) == (rel_line, col) \
            and outcome.kind == kind
    if outcome.status == DEPTH_EXCEEDED and kind == UNWINDING_ASSERTION:
        return (outcome.span.rel_line, outcome.span.col) == (rel_line, col)
    return False


def extract_counterexample(program: Program, entry: str,
                           vc: VerificationCondition, model: list, *,
                           max_iters: int, checks: frozenset = DEFAULT_CHECKS,
                           havoc_globals: bool = False) -> Counterexample:
    """Re-run the original program on a sat model and package the trace.

    Raises ReplayMismatch when the execution does not violate exactly the
    claim the VC stands for (an encoder/solver bug, or an artifact of an
    approximate encoding)."""
    inputs = {symbol: value for symbol, value in model}
    outcome = interpret(program, entry, inputs, max_iters, checks,
                        havoc_globals, record_trace=True, missing="zero")
    _, rel_line, col, kind, _ = parse_vc_id(vc.vc_id)
    if not outcome_matches_claim(outcome, rel_line, col, kind):
        raise ReplayMismatch(
            f"model does not reproduce {vc.vc_id}: got {outcome.status}"
            f" at {outcome.span} kind={outcome.kind or 'n/a'}")
    if outcome.status == DEPTH_EXCEEDED:
        outcome.trace.append({"line": vc.span.line, "col": vc.span.col,
                              "text": "loop exceeds the unwinding bound",
                              "var": None, "value": None})
    cex_inputs = []
    types = dict(vc.ssa.nondet_symbols)
    for symbol, value in model:
        ty = types.get(symbol)
        cex_inputs.append({"symbol": symbol,
                           "type": ty.name if ty else "?",
                           "value": value})
    return Counterexample(vc.vc_id, cex_inputs, outcome.trace, kind)


def replay(program: Program, cex: Counterexample, entry: str, *,
           max_iters: int, checks: frozenset = DEFAULT_CHECKS,
           havoc_globals: bool = False) -> bool:
    """True iff re-running the original program on the counterexample's
    inputs violates the same claim (span and kind)."""
    _, rel_line, col, kind, _ = parse_vc_id(cex.vc_id)
    outcome = interpret(program, entry, cex.input_dict(), max_iters, checks,
                        havoc_globals, missing="zero")
    return outcome_matches_claim(outcome, rel_line, col, kind)


# ---------------------------------------------------------------------------
# Exhaustive oracle


def claim_site_key(span: Span, kind: str) -> tuple:
    return (span.rel_line, span.col, kind)


def exhaustive_oracle(program: Program, entry: str, k: int,
                      checks: frozenset = DEFAULT_CHECKS,
                      mode: str = "assumption", havoc_globals: bool = False,
                      limit_bits: int = 20) -> dict:
    """Ground-truth verdict per claim site by full input enumeration.

    Returns {(rel_line, col, kind): (verdict, witness_inputs_or_None)}.
    A site is VIOLATION when some assignment's execution fails there first;
    in assertion mode, needing more than k iterations of a loop violates
    that loop's unwinding assertion. Sites never mentioned are safe.
    """
    space = nondet_space(program, entry, k, havoc_globals)
    bits = space_bits(space)
    if bits > limit_bits:
        raise BitBudgetExceeded(f"{bits} nondet bits exceed the {limit_bits}-bit budget")
    verdicts: dict = {}
    for inputs in enumerate_assignments(space):
        outcome = interpret(program, entry, inputs, k, checks, havoc_globals)
        key = None
        if outcome.status == VIOLATED:
            key = claim_site_key(outcome.span, outcome.kind)
        elif outcome.status == DEPTH_EXCEEDED and mode == "assertion":
            key = claim_site_key(outcome.span, UNWINDING_ASSERTION)
        if key is not None and key not in verdicts:
            verdicts[key] = (VIOLATION, dict(inputs))
    return verdicts
