"""Exact bit-level arithmetic shared by the interpreter and constant folder.

All values are Python ints in the signed interpretation of their type
(e.g. i8 ranges over -128..127, u8 over 0..255). Operations reproduce
SMT-LIB bit-vector semantics, including the defined division-by-zero
results, so the interpreter, the enumerative solver, and the BV encoding
agree everywhere.
"""

from __future__ import annotations

from .lang import ScalarType


def wrap(value: int, ty: ScalarType) -> int:
    """Reduce an unbounded integer to ty's range (two's complement)."""
    if ty.is_bool:
        return value & 1
    masked = value & ((1 << ty.width) - 1)
    if ty.signed and masked >= (1 << (ty.width - 1)):
        masked -= 1 << ty.width
    return masked


def to_unsigned(value: int, ty: ScalarType) -> int:
    """Bit pattern of value as an unsigned integer."""
    return value & ((1 << ty.width) - 1)


def from_unsigned(pattern: int, ty: ScalarType) -> int:
    """Inverse of to_unsigned."""
    return wrap(pattern, ty)


def sdiv(a: int, b: int) -> int:
    """C-style truncating division (SMT-LIB bvsdiv sign rules), b != 0."""
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def srem(a: int, b: int) -> int:
    """C-style remainder: sign follows the dividend, b != 0."""
    return a - b * sdiv(a, b)


def eval_binary(op: str, a: int, b: int, ty: ScalarType) -> int:
    """Evaluate an arithmetic/bitwise/shift op on same-typed operands,
    wrapping the result to ty. Division by zero follows SMT-LIB:
    bvudiv(x,0) = all-ones, bvurem(x,0) = x, bvsdiv(x,0) = x<0 ? 1 : -1,
    bvsrem(x,0) = x."""
    if op == "+":
        return wrap(a + b, ty)
    if op == "-":
        return wrap(a - b, ty)
    if op == "*":
        return wrap(a * b, ty)
    if op == "/":
        if b == 0:
            if ty.signed:
                return 1 if a < 0 else -1
            return ty.max_value
        if ty.signed:
            return wrap(sdiv(a, b), ty)
        return a // b
    if op == "%":
        if b == 0:
            return a
        if ty.signed:
            return wrap(srem(a, b), ty)
        return a % b
    if op == "&":
        return from_unsigned(to_unsigned(a, ty) & to_unsigned(b, ty), ty)
    if op == "|":
        return from_unsigned(to_unsigned(a, ty) | to_unsigned(b, ty), ty)
    if op == "^":
        return from_unsigned(to_unsigned(a, ty) ^ to_unsigned(b, ty), ty)
    if op == "<<":
        amount = to_unsigned(b, ty)
        if amount >= ty.width:
            return 0
        return from_unsigned(to_unsigned(a, ty) << amount, ty)
    if op == ">>":
        amount = to_unsigned(b, ty)
        if ty.signed:
            # Arithmetic shift; amounts >= width saturate to the sign fill.
            amount = min(amount, ty.width)
            return a >> amount if a >= 0 else ~(~a >> amount)
        if amount >= ty.width:
            return 0
        return a >> amount
    raise AssertionError(f"not a value op: {op}")


def eval_unbounded(op: str, a: int, b: int) -> int:
    """The unbounded-integer reading of an arithmetic op, mirroring the INT
    encoding: no wraparound, C-truncating division, div/mod by zero pinned
    to 0 (unreachable when divide-by-zero claims are enforced)."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return 0 if b == 0 else sdiv(a, b)
    if op == "%":
        return 0 if b == 0 else srem(a, b)
    raise AssertionError(f"not an integer op: {op}")


def eval_compare(op: str, a: int, b: int) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise AssertionError(f"not a comparison: {op}")


def cast_value(value: int, target: ScalarType) -> int:
    """Bit-level cast: truncation and sign/zero extension both reduce to
    wrapping the mathematical value into the target's range."""
    return wrap(value, target)
