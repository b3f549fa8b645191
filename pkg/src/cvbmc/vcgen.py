"""Property instrumentation and verification-condition generation.

instrument_properties inserts claims for the implicit safety properties
(array bounds, divide/mod by zero, signed overflow, shift range) in front
of the step whose expression they protect, guarded by the exact path
condition under which the expression is evaluated (including short-circuit
context inside && and ||). generate_vcs then emits one VerificationCondition
per claim: the step prefix up to the claim, with every earlier claim assumed
as a constraint, paired with the claim itself.

Constant folding runs over every step expression first; a fold never erases
a subexpression whose evaluation C would perform and check (a division is
not folded away by `e && false`, a literal division by zero is not folded
at all), so folding cannot hide a property violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lang import (
    ArrayRead, Binary, BOOL, Cast, clone_expr, double_width, Expr, Ite, Lit,
    Nondet, NO_SPAN, Span, Unary, walk_exprs,
)
from .semantics import eval_binary, eval_compare, wrap
from .transform import (
    ClaimStep, ConstraintStep, DefineStep, MergeStep, ORIGIN_PRIOR_CLAIM,
    SsaProgram, SsaStep, StoreStep, step_exprs,
)

USER_ASSERT = "user-assert"
ARRAY_BOUNDS = "array-bounds"
DIV_BY_ZERO = "div-by-zero"
MOD_BY_ZERO = "mod-by-zero"
SIGNED_OVERFLOW = "signed-overflow"
SHIFT_RANGE = "shift-range"
UNWINDING_ASSERTION = "unwinding-assertion"

PROPERTY_KINDS = (
    USER_ASSERT, ARRAY_BOUNDS, DIV_BY_ZERO, MOD_BY_ZERO, SIGNED_OVERFLOW,
    SHIFT_RANGE, UNWINDING_ASSERTION,
)

# The instrumentable classes, i.e. what --checks controls.
DEFAULT_CHECKS = frozenset({ARRAY_BOUNDS, DIV_BY_ZERO, MOD_BY_ZERO,
                            SIGNED_OVERFLOW, SHIFT_RANGE})


@dataclass
class VerificationCondition:
    """One claim plus the exact path prefix that reaches it."""

    vc_id: str
    ssa: SsaProgram
    property_expr: Expr
    property_guard: Optional[Expr]
    kind: str
    span: Span

    def property_implication(self) -> Expr:
        """guard -> expr as a single bool expression."""
        if self.property_guard is None:
            return self.property_expr
        return Binary(NO_SPAN, BOOL, "||",
                      Unary(NO_SPAN, BOOL, "!", clone_expr(self.property_guard)),
                      clone_expr(self.property_expr))


# ---------------------------------------------------------------------------
# Constant folding


def is_lit(e: Expr) -> bool:
    return isinstance(e, Lit)


def has_property_sites(e: Expr) -> bool:
    """True when e contains an expression the checker may claim about;
    such subexpressions must never be folded out of existence."""
    for node in walk_exprs(e):
        if isinstance(node, ArrayRead):
            return True
        if isinstance(node, Binary):
            if node.op in ("/", "%", "<<", ">>"):
                return True
            if node.op in ("+", "-", "*") and node.ty is not None and node.ty.signed:
                return True
        if isinstance(node, Unary) and node.op == "-" and node.ty is not None \
                and node.ty.signed:
            return True
    return False


def fold_expr(e: Expr) -> Expr:
    """Bottom-up literal folding with exact two's-complement semantics.

    Folds are skipped whenever they would hide a checked property: literal
    division by zero, shifts by >= width, and signed arithmetic whose exact
    result leaves the type's range all stay unfolded.
    """
    if isinstance(e, Unary):
        operand = fold_expr(e.operand)
        e = Unary(e.span, e.ty, e.op, operand)
        if is_lit(operand):
            if e.op == "!":
                return Lit(e.span, BOOL, 0 if operand.value else 1)
            if e.op == "~":
                return Lit(e.span, e.ty, wrap(~operand.value, e.ty))
            if e.op == "-":
                if e.ty.signed and operand.value == e.ty.min_value:
                    return e  # negation overflow is a claim, keep the site
                return Lit(e.span, e.ty, wrap(-operand.value, e.ty))
        return e
    if isinstance(e, Binary):
        lhs = fold_expr(e.lhs)
        # Short-circuit folds on the left operand never drop evaluated code.
        if e.op == "&&" and is_lit(lhs):
            return fold_expr(e.rhs) if lhs.value else Lit(e.span, BOOL, 0)
        if e.op == "||" and is_lit(lhs):
            return Lit(e.span, BOOL, 1) if lhs.value else fold_expr(e.rhs)
        rhs = fold_expr(e.rhs)
        e = Binary(e.span, e.ty, e.op, lhs, rhs)
        if e.op in ("&&", "||") and is_lit(rhs):
            # The left side was evaluated; only drop it if nothing in it
            # can raise a claim.
            if e.op == "&&":
                if rhs.value:
                    return lhs
                if not has_property_sites(lhs):
                    return Lit(e.span, BOOL, 0)
            else:
                if not rhs.value:
                    return lhs
                if not has_property_sites(lhs):
                    return Lit(e.span, BOOL, 1)
            return e
        if is_lit(lhs) and is_lit(rhs):
            if e.op in ("==", "!=", "<", "<=", ">", ">="):
                return Lit(e.span, BOOL, 1 if eval_compare(e.op, lhs.value, rhs.value) else 0)
            if e.op in ("/", "%") and rhs.value == 0:
                return e  # divide-by-zero is a claim, keep the site
            if e.op in ("<<", ">>"):
                if rhs.value < 0 or rhs.value >= e.ty.width:
                    return e  # shift-range is a claim, keep the site
            if e.op in ("+", "-", "*") and e.ty.signed:
                exact = {"+": lhs.value + rhs.value,
                         "-": lhs.value - rhs.value,
                         "*": lhs.value * rhs.value}[e.op]
                if not (e.ty.min_value <= exact <= e.ty.max_value):
                    return e  # signed overflow is a claim, keep the site
            return Lit(e.span, e.ty, eval_binary(e.op, lhs.value, rhs.value, e.ty))
        return e
    if isinstance(e, Cast):
        operand = fold_expr(e.operand)
        if is_lit(operand):
            return Lit(e.span, e.target, wrap(operand.value, e.target))
        return Cast(e.span, e.ty, e.target, operand)
    if isinstance(e, ArrayRead):
        return ArrayRead(e.span, e.ty, e.name, fold_expr(e.index), e.version, e.array_type)
    if isinstance(e, Ite):
        cond = fold_expr(e.cond)
        if is_lit(cond):
            return fold_expr(e.then) if cond.value else fold_expr(e.other)
        return Ite(e.span, e.ty, cond, fold_expr(e.then), fold_expr(e.other))
    return e


def is_true(e: Expr) -> bool:
    return isinstance(e, Lit) and e.ty is not None and e.ty.is_bool and e.value == 1


# ---------------------------------------------------------------------------
# Instrumentation


def _conjoin(a: Optional[Expr], b: Optional[Expr]) -> Optional[Expr]:
    if a is None:
        return b
    if b is None:
        return a
    return Binary(NO_SPAN, BOOL, "&&", clone_expr(a), clone_expr(b))


def _bounds_claim(index: Expr, size: int) -> Optional[Expr]:
    """0 <= index < size over the index's own type; trivially true parts
    are omitted (matches unsigned indexes getting a single upper bound)."""
    ty = index.ty
    upper = None
    if size <= ty.max_value:
        upper = Binary(index.span, BOOL, "<", clone_expr(index), Lit(index.span, ty, size))
    lower = None
    if ty.signed:
        lower = Binary(index.span, BOOL, ">=", clone_expr(index), Lit(index.span, ty, 0))
    if lower is None:
        return upper
    if upper is None:
        return lower
    return Binary(index.span, BOOL, "&&", lower, upper)


def _overflow_claim(e: Expr) -> Expr:
    """No-wrap condition computed in a twice-as-wide signed temporary."""
    ty = e.ty
    wide = double_width(ty)
    if isinstance(e, Unary):
        return Binary(e.span, BOOL, "!=", clone_expr(e.operand),
                      Lit(e.span, ty, ty.min_value))
    wide_op = Binary(e.span, wide, e.op,
                     Cast(e.span, wide, wide, clone_expr(e.lhs)),
                     Cast(e.span, wide, wide, clone_expr(e.rhs)))
    low = Binary(e.span, BOOL, ">=", clone_expr(wide_op), Lit(e.span, wide, ty.min_value))
    high = Binary(e.span, BOOL, "<=", wide_op, Lit(e.span, wide, ty.max_value))
    return Binary(e.span, BOOL, "&&", low, high)


def _shift_claim(e: Binary) -> Expr:
    amount = e.rhs
    ty = amount.ty
    upper = Binary(amount.span, BOOL, "<", clone_expr(amount),
                   Lit(amount.span, ty, e.ty.width))
    if ty.signed:
        lower = Binary(amount.span, BOOL, ">=", clone_expr(amount),
                       Lit(amount.span, ty, 0))
        return Binary(amount.span, BOOL, "&&", lower, upper)
    return upper


def _expr_claims(e: Expr, guard: Optional[Expr], checks: frozenset, out: list) -> None:
    """Collect claims for every property site in e, children first and left
    to right, matching concrete evaluation order. Short-circuit right
    operands strengthen the guard with the left side's value."""
    if isinstance(e, Binary) and e.op in ("&&", "||"):
        _expr_claims(e.lhs, guard, checks, out)
        if e.op == "&&":
            rhs_guard = _conjoin(guard, e.lhs)
        else:
            rhs_guard = _conjoin(guard, Unary(NO_SPAN, BOOL, "!", clone_expr(e.lhs)))
        _expr_claims(e.rhs, rhs_guard, checks, out)
        return
    if isinstance(e, Binary):
        _expr_claims(e.lhs, guard, checks, out)
        _expr_claims(e.rhs, guard, checks, out)
        if e.op == "/" and DIV_BY_ZERO in checks:
            claim = Binary(e.span, BOOL, "!=", clone_expr(e.rhs), Lit(e.span, e.rhs.ty, 0))
            out.append((claim, DIV_BY_ZERO, e.span, guard))
        elif e.op == "%" and MOD_BY_ZERO in checks:
            claim = Binary(e.span, BOOL, "!=", clone_expr(e.rhs), Lit(e.span, e.rhs.ty, 0))
            out.append((claim, MOD_BY_ZERO, e.span, guard))
        elif e.op in ("<<", ">>") and SHIFT_RANGE in checks:
            out.append((_shift_claim(e), SHIFT_RANGE, e.span, guard))
        elif e.op in ("+", "-", "*") and SIGNED_OVERFLOW in checks \
                and e.ty.signed and not e.ty.is_bool:
            out.append((_overflow_claim(e), SIGNED_OVERFLOW, e.span, guard))
        return
    if isinstance(e, Unary):
        _expr_claims(e.operand, guard, checks, out)
        if e.op == "-" and SIGNED_OVERFLOW in checks and e.ty.signed:
            out.append((_overflow_claim(e), SIGNED_OVERFLOW, e.span, guard))
        return
    if isinstance(e, ArrayRead):
        _expr_claims(e.index, guard, checks, out)
        if ARRAY_BOUNDS in checks:
            claim = _bounds_claim(e.index, e.array_type.size)
            if claim is not None:
                out.append((claim, ARRAY_BOUNDS, e.span, guard))
        return
    if isinstance(e, Cast):
        _expr_claims(e.operand, guard, checks, out)
        return
    if isinstance(e, Ite):
        _expr_claims(e.cond, guard, checks, out)
        _expr_claims(e.then, guard, checks, out)
        _expr_claims(e.other, guard, checks, out)
        return


def instrument_properties(ssa: SsaProgram, checks: frozenset = DEFAULT_CHECKS) -> SsaProgram:
    """Fold step expressions, then insert one claim per property site in
    front of the step that evaluates it. Idempotent: an already instrumented
    program is returned unchanged."""
    if getattr(ssa, "instrumented", False):
        return ssa
    out: list = []
    for step in ssa.steps:
        _fold_step(step)
        pending: list = []
        if isinstance(step, DefineStep):
            _expr_claims(step.expr, step.guard, checks, pending)
        elif isinstance(step, StoreStep):
            _expr_claims(step.index, step.guard, checks, pending)
            _expr_claims(step.value, step.guard, checks, pending)
            if ARRAY_BOUNDS in checks:
                size = ssa.arrays[step.name][0].size
                claim = _bounds_claim(step.index, size)
                if claim is not None:
                    pending.append((claim, ARRAY_BOUNDS, step.index.span, step.guard))
        elif isinstance(step, (ClaimStep, ConstraintStep)):
            _expr_claims(step.expr, step.guard, checks, pending)
        for claim_expr, kind, span, guard in pending:
            folded = fold_expr(claim_expr)
            if is_true(folded):
                continue
            out.append(ClaimStep(guard, folded, kind, span))
        out.append(step)
    ssa.steps = out
    ssa.instrumented = True  # type: ignore[attr-defined]
    return ssa


def _fold_step(step: SsaStep) -> None:
    if step.guard is not None:
        step.guard = fold_expr(step.guard)
        if is_true(step.guard):
            step.guard = None
    if isinstance(step, DefineStep):
        step.expr = fold_expr(step.expr)
    elif isinstance(step, StoreStep):
        step.index = fold_expr(step.index)
        step.value = fold_expr(step.value)
    elif isinstance(step, MergeStep):
        step.cond = fold_expr(step.cond)
    elif isinstance(step, (ClaimStep, ConstraintStep)):
        step.expr = fold_expr(step.expr)


# ---------------------------------------------------------------------------
# VC generation


def _slice_nondets(ssa: SsaProgram, steps: list, prop: Expr) -> list:
    used: set = set()
    for step in steps:
        for expr in step_exprs(step):
            for node in walk_exprs(expr):
                if isinstance(node, Nondet):
                    used.add(node.symbol)
    for node in walk_exprs(prop):
        if isinstance(node, Nondet):
            used.add(node.symbol)
    return [(s, t) for s, t in ssa.nondet_symbols if s in used]


def generate_vcs(ssa: SsaProgram) -> list:
    """One VerificationCondition per claim, in program order. Each VC's
    slice holds exactly the steps before its claim plus every earlier claim
    as a prior-claim constraint, so failures attribute to their first cause."""
    vcs = []
    prefix: list = []
    priors: list = []
    ordinals: dict = {}
    for step in ssa.steps:
        if not isinstance(step, ClaimStep):
            prefix.append(step)
            continue
        key = (step.span.rel_line, step.span.col, step.kind)
        ordinal = ordinals.get(key, 0)
        ordinals[key] = ordinal + 1
        vc_id = f"{ssa.entry}:{step.span.rel_line}:{step.span.col}:{step.kind}:{ordinal}"
        step.vc_id = vc_id
        slice_steps = list(prefix)
        for prior in priors:
            slice_steps.append(ConstraintStep(prior.guard, prior.expr,
                                              ORIGIN_PRIOR_CLAIM, prior.kind))
        prop = step.expr
        guard_and_prop = prop if step.guard is None else Binary(
            NO_SPAN, BOOL, "&&", step.guard, prop)
        sub = SsaProgram(
            entry=ssa.entry,
            steps=slice_steps,
            nondet_symbols=_slice_nondets(ssa, slice_steps, guard_and_prop),
            bound_k=ssa.bound_k,
            arrays=ssa.arrays,
            exit_values={},
        )
        vcs.append(VerificationCondition(vc_id, sub, step.expr, step.guard,
                                         step.kind, step.span))
        priors.append(step)
    return vcs
