"""SMT-LIB 2 encodings of verification conditions.

Two translations of the same VC:

* encode_bv: fixed-width bit-vectors and arrays (QF_ABV). Every operator
  maps to its signedness-correct bit-vector form, so the encoding is exact
  two's-complement semantics, always precise.
* encode_int: unbounded integers with declared range constraints on the
  inputs (QF_AUFLIA, or QF_AUFNIA when non-constant multiplication or
  division appears). Arithmetic does not wrap, which is the deliberate,
  flagged approximation; casts re-synchronize through exact mod arithmetic,
  and bitwise/shift operators are not expressible at all.

Scripts are deterministic: identical VC + encoding yields byte-identical
text. SSA names are mangled |fn::var#version|, nondet inputs |nd::symbol|.
Array reads are guarded: out-of-bounds selects evaluate to zero in both
encodings, matching the interpreter; zero initialization is an explicit
store chain, so no non-standard constant-array syntax is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lang import (
    ArrayRead, Binary, Cast, Expr, Ite, Lit, Nondet, ScalarType, Unary, Var,
    walk_exprs,
)
from .semantics import to_unsigned
from .transform import (
    ClaimStep, ConstraintStep, DefineStep, MergeStep, SsaProgram, StoreStep,
)
from .vcgen import VerificationCondition

BV = "bv"
INT = "int"

PRECISE = "precise"
APPROXIMATE = "approximate"


class UnsupportedOperator(Exception):
    """A bitwise/shift node reached the integer encoding: a routing bug."""


@dataclass(frozen=True)
class Encoding:
    name: str  # bv | int
    logic: str
    precision: str


@dataclass
class SmtQuery:
    encoding: Encoding
    text: str
    # (mangled, plain symbol, ScalarType) for every nondet, in declaration
    # order; these are exactly the (get-value ...) targets.
    value_symbols: list = field(default_factory=list)

    @property
    def logic(self) -> str:
        return self.encoding.logic

    @property
    def precision(self) -> str:
        return self.encoding.precision


def mangle_var(fn: str, name: str, version: int) -> str:
    return f"|{fn}::{name}#{version}|"


def mangle_nondet(symbol: str) -> str:
    return f"|nd::{symbol}|"


# ---------------------------------------------------------------------------
# Bit-vector encoding


def _bv_sort(ty: ScalarType) -> str:
    return "Bool" if ty.is_bool else f"(_ BitVec {ty.width})"


def _bv_array_sort(elem: ScalarType) -> str:
    return f"(Array (_ BitVec 32) {_bv_sort(elem)})"


def _bv_lit(value: int, ty: ScalarType) -> str:
    if ty.is_bool:
        return "true" if value else "false"
    return f"(_ bv{to_unsigned(value, ty)} {ty.width})"


def _bv_index(index_smt: str, ty: ScalarType) -> str:
    """Extend an index term to the 32-bit array index sort."""
    if ty.width == 32:
        return index_smt
    ext = "sign_extend" if ty.signed else "zero_extend"
    return f"((_ {ext} {32 - ty.width}) {index_smt})"


_BV_CMP = {"<": ("bvult", "bvslt"), "<=": ("bvule", "bvsle"),
           ">": ("bvugt", "bvsgt"), ">=": ("bvuge", "bvsge")}
_BV_ARITH = {"+": "bvadd", "-": "bvsub", "*": "bvmul",
             "&": "bvand", "|": "bvor", "^": "bvxor", "<<": "bvshl"}


class _BvTerms:
    def __init__(self, entry: str):
        self.entry = entry

    def expr(self, e: Expr) -> str:
        if isinstance(e, Lit):
            return _bv_lit(e.value, e.ty)
        if isinstance(e, Var):
            return mangle_var(self.entry, e.name, e.version)
        if isinstance(e, Nondet):
            return mangle_nondet(e.symbol)
        if isinstance(e, Unary):
            operand = self.expr(e.operand)
            if e.op == "!":
                return f"(not {operand})"
            if e.op == "~":
                return f"(bvnot {operand})"
            return f"(bvneg {operand})"
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Cast):
            return self.cast(e)
        if isinstance(e, ArrayRead):
            return self.array_read(e)
        if isinstance(e, Ite):
            return (f"(ite {self.expr(e.cond)} {self.expr(e.then)} "
                    f"{self.expr(e.other)})")
        raise AssertionError(f"unknown expr {e!r}")

    def binary(self, e: Binary) -> str:
        a, b = self.expr(e.lhs), self.expr(e.rhs)
        op = e.op
        if op == "&&":
            return f"(and {a} {b})"
        if op == "||":
            return f"(or {a} {b})"
        if op == "==":
            return f"(= {a} {b})"
        if op == "!=":
            return f"(distinct {a} {b})"
        if op in _BV_CMP:
            return f"({_BV_CMP[op][1 if e.lhs.ty.signed else 0]} {a} {b})"
        if op in _BV_ARITH:
            return f"({_BV_ARITH[op]} {a} {b})"
        if op == "/":
            return f"({'bvsdiv' if e.ty.signed else 'bvudiv'} {a} {b})"
        if op == "%":
            return f"({'bvsrem' if e.ty.signed else 'bvurem'} {a} {b})"
        if op == ">>":
            return f"({'bvashr' if e.ty.signed else 'bvlshr'} {a} {b})"
        raise AssertionError(f"unknown operator {op}")

    def cast(self, e: Cast) -> str:
        src, dst = e.operand.ty, e.target
        operand = self.expr(e.operand)
        if dst.width == src.width:
            return operand
        if dst.width < src.width:
            return f"((_ extract {dst.width - 1} 0) {operand})"
        ext = "sign_extend" if src.signed else "zero_extend"
        return f"((_ {ext} {dst.width - src.width}) {operand})"

    def array_read(self, e: ArrayRead) -> str:
        arr = mangle_var(self.entry, e.name, e.version)
        size = e.array_type.size
        if isinstance(e.index, Lit):
            idx = to_unsigned(e.index.value, e.index.ty)
            if 0 <= e.index.value < size:
                return f"(select {arr} (_ bv{idx} 32))"
            return _bv_lit(0, e.ty)
        idx = _bv_index(self.expr(e.index), e.index.ty)
        guard = f"(bvult {idx} (_ bv{size} 32))"
        return f"(ite {guard} (select {arr} {idx}) {_bv_lit(0, e.ty)})"


def encode_bv(vc: VerificationCondition) -> SmtQuery:
    """Bit-accurate QF_ABV script: declarations, one define-fun per SSA
    step, constraints, the negated claim, (check-sat), (get-value ...)."""
    terms = _BvTerms(vc.ssa.entry)
    encoding = Encoding(BV, "QF_ABV", PRECISE)
    return _emit(vc, terms, encoding,
                 sort_scalar=_bv_sort,
                 sort_array=lambda at: _bv_array_sort(at.elem),
                 lit=_bv_lit,
                 index=lambda e: _bv_index(terms.expr(e), e.ty),
                 range_assert=lambda sym, ty: None)


# ---------------------------------------------------------------------------
# Integer encoding


def _int_lit(value: int, ty: ScalarType) -> str:
    if ty.is_bool:
        return "true" if value else "false"
    return str(value) if value >= 0 else f"(- {-value})"


def _int_sort(ty: ScalarType) -> str:
    return "Bool" if ty.is_bool else "Int"


def _int_array_sort(elem: ScalarType) -> str:
    return f"(Array Int {_int_sort(elem)})"


class _IntTerms:
    def __init__(self, entry: str):
        self.entry = entry

    def expr(self, e: Expr) -> str:
        if isinstance(e, Lit):
            return _int_lit(e.value, e.ty)
        if isinstance(e, Var):
            return mangle_var(self.entry, e.name, e.version)
        if isinstance(e, Nondet):
            return mangle_nondet(e.symbol)
        if isinstance(e, Unary):
            operand = self.expr(e.operand)
            if e.op == "!":
                return f"(not {operand})"
            if e.op == "~":
                raise UnsupportedOperator("~ has no integer-theory encoding")
            return f"(- {operand})"
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Cast):
            return self.cast(e)
        if isinstance(e, ArrayRead):
            return self.array_read(e)
        if isinstance(e, Ite):
            return (f"(ite {self.expr(e.cond)} {self.expr(e.then)} "
                    f"{self.expr(e.other)})")
        raise AssertionError(f"unknown expr {e!r}")

    def binary(self, e: Binary) -> str:
        op = e.op
        if op in ("&", "|", "^", "<<", ">>"):
            raise UnsupportedOperator(f"{op} has no integer-theory encoding")
        a, b = self.expr(e.lhs), self.expr(e.rhs)
        if op == "&&":
            return f"(and {a} {b})"
        if op == "||":
            return f"(or {a} {b})"
        if op == "==":
            return f"(= {a} {b})"
        if op == "!=":
            return f"(distinct {a} {b})"
        if op in ("<", "<=", ">", ">="):
            return f"({op} {a} {b})"
        if op in ("+", "-", "*"):
            return f"({op} {a} {b})"
        if op == "/":
            return self.trunc_div(e, a, b)
        if op == "%":
            return f"(- {a} (* {b} {self.trunc_div(e, a, b)}))" \
                if e.ty.signed else f"(mod {a} {b})"
        raise AssertionError(f"unknown operator {op}")

    def trunc_div(self, e: Binary, a: str, b: str) -> str:
        """C-style truncating division. SMT-LIB div is Euclidean; they agree
        for non-negative operands, so unsigned divides stay plain."""
        if not e.ty.signed:
            return f"(div {a} {b})"
        q = f"(div (abs {a}) (abs {b}))"
        return f"(ite (= (>= {a} 0) (>= {b} 0)) {q} (- {q}))"

    def cast(self, e: Cast) -> str:
        """Exact wrap-around via mod: an out-of-range integer value (the
        approximation at work) re-synchronizes to its bit pattern here."""
        operand = self.expr(e.operand)
        dst = e.target
        modulus = 1 << dst.width
        reduced = f"(mod {operand} {modulus})"
        if not dst.signed:
            return reduced
        half = modulus // 2
        return f"(ite (>= {reduced} {half}) (- {reduced} {modulus}) {reduced})"

    def array_read(self, e: ArrayRead) -> str:
        arr = mangle_var(self.entry, e.name, e.version)
        size = e.array_type.size
        zero = _int_lit(0, e.ty)
        if isinstance(e.index, Lit):
            if 0 <= e.index.value < size:
                return f"(select {arr} {_int_lit(e.index.value, e.index.ty)})"
            return zero
        idx = self.expr(e.index)
        guard = f"(and (<= 0 {idx}) (< {idx} {size}))"
        return f"(ite {guard} (select {arr} {idx}) {zero})"


def _int_range_assert(sym: str, ty: ScalarType) -> Optional[str]:
    if ty.is_bool:
        return None
    return f"(assert (and (<= {_int_lit(ty.min_value, ty)} {sym}) (<= {sym} {_int_lit(ty.max_value, ty)})))"


def _int_logic(vc: VerificationCondition) -> str:
    """QF_AUFNIA when any multiplication of two non-literals or a division
    by a non-literal appears, else QF_AUFLIA."""
    from .transform import step_exprs

    exprs = [vc.property_expr]
    if vc.property_guard is not None:
        exprs.append(vc.property_guard)
    for step in vc.ssa.steps:
        exprs.extend(step_exprs(step))
    for expr in exprs:
        for node in walk_exprs(expr):
            if isinstance(node, Binary):
                if node.op == "*" and not isinstance(node.lhs, Lit) \
                        and not isinstance(node.rhs, Lit):
                    return "QF_AUFNIA"
                if node.op in ("/", "%") and not isinstance(node.rhs, Lit):
                    return "QF_AUFNIA"
    return "QF_AUFLIA"


def encode_int(vc: VerificationCondition, certified: bool = False) -> SmtQuery:
    """Integer-theory script with range-constrained inputs. Raises
    UnsupportedOperator on bitwise/shift nodes (the router must not send
    them here). certified marks the VC as lying in the wrap-free fragment,
    which upgrades the result from approximate to precise."""
    terms = _IntTerms(vc.ssa.entry)
    precision = PRECISE if certified else APPROXIMATE
    encoding = Encoding(INT, _int_logic(vc), precision)
    return _emit(vc, terms, encoding,
                 sort_scalar=_int_sort,
                 sort_array=lambda at: _int_array_sort(at.elem),
                 lit=_int_lit,
                 index=lambda e: terms.expr(e),
                 range_assert=_int_range_assert)


# ---------------------------------------------------------------------------
# Shared emission


def _emit(vc: VerificationCondition, terms, encoding: Encoding, *,
          sort_scalar, sort_array, lit, index, range_assert) -> SmtQuery:
    ssa = vc.ssa
    entry = ssa.entry
    lines = [f"(set-logic {encoding.logic})",
             "(set-option :produce-models true)"]
    value_symbols = []
    for symbol, ty in ssa.nondet_symbols:
        mangled = mangle_nondet(symbol)
        lines.append(f"(declare-const {mangled} {sort_scalar(ty)})")
        constraint = range_assert(mangled, ty)
        if constraint:
            lines.append(constraint)
        value_symbols.append((mangled, symbol, ty))
    used_arrays = _arrays_in_slice(vc)
    for name in sorted(used_arrays):
        ty, base = ssa.arrays[name]
        lines.append(f"(declare-const {mangle_var(entry, name, base)} {sort_array(ty)})")
    for step in ssa.steps:
        if isinstance(step, DefineStep):
            sort = sort_scalar(step.expr.ty)
            lines.append(f"(define-fun {mangle_var(entry, step.name, step.version)} "
                         f"() {sort} {terms.expr(step.expr)})")
        elif isinstance(step, StoreStep):
            ty = ssa.arrays[step.name][0]
            prev = mangle_var(entry, step.name, step.prev_version)
            store = f"(store {prev} {index(step.index)} {terms.expr(step.value)})"
            lines.append(f"(define-fun {mangle_var(entry, step.name, step.version)} "
                         f"() {sort_array(ty)} {store})")
        elif isinstance(step, MergeStep):
            sort = sort_array(ssa.arrays[step.name][0]) if step.name in ssa.arrays \
                else sort_scalar(_merge_type(ssa, step))
            then = mangle_var(entry, step.name, step.then_version)
            other = mangle_var(entry, step.name, step.else_version)
            body = f"(ite {terms.expr(step.cond)} {then} {other})"
            lines.append(f"(define-fun {mangle_var(entry, step.name, step.version)} "
                         f"() {sort} {body})")
        elif isinstance(step, ConstraintStep):
            body = terms.expr(step.expr)
            if step.guard is not None:
                body = f"(=> {terms.expr(step.guard)} {body})"
            lines.append(f"(assert {body})")
        elif isinstance(step, ClaimStep):
            raise AssertionError("claims do not belong in a VC slice")
    negated = f"(not {terms.expr(vc.property_expr)})"
    if vc.property_guard is not None:
        negated = f"(and {terms.expr(vc.property_guard)} {negated})"
    lines.append(f"(assert {negated})")
    lines.append("(check-sat)")
    if value_symbols:
        names = " ".join(m for m, _, _ in value_symbols)
        lines.append(f"(get-value ({names}))")
    return SmtQuery(encoding, "\n".join(lines) + "\n", value_symbols)


def _merge_type(ssa: SsaProgram, step: MergeStep) -> ScalarType:
    # Scalar merge: recover the type from any define of this name.
    for s in ssa.steps:
        if isinstance(s, DefineStep) and s.name == step.name:
            return s.expr.ty
    raise AssertionError(f"no definition found for merged {step.name}")


def _arrays_in_slice(vc: VerificationCondition) -> set:
    from .transform import step_exprs

    used = set()
    for step in vc.ssa.steps:
        if isinstance(step, StoreStep):
            used.add(step.name)
        if isinstance(step, MergeStep) and step.name in vc.ssa.arrays:
            used.add(step.name)
        for expr in step_exprs(step):
            for node in walk_exprs(expr):
                if isinstance(node, ArrayRead):
                    used.add(node.name)
    for expr in ([vc.property_expr] +
                 ([vc.property_guard] if vc.property_guard is not None else [])):
        for node in walk_exprs(expr):
            if isinstance(node, ArrayRead):
                used.add(node.name)
    return used
