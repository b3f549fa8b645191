from hypothesis import given, strategies as st

from cvbmc.lang import BOOL, I8, I16, I32, U8, U16, U32
from cvbmc.semantics import (
    cast_value, eval_binary, from_unsigned, sdiv, srem, to_unsigned, wrap,
)

INT_TYPES = [U8, U16, U32, I8, I16, I32]

types = st.sampled_from(INT_TYPES)
values = st.integers(-(2**40), 2**40)


@given(types, values)
def test_wrap_lands_in_range_and_is_idempotent(ty, value):
    wrapped = wrap(value, ty)
    assert ty.min_value <= wrapped <= ty.max_value
    assert wrap(wrapped, ty) == wrapped


@given(types, values)
def test_unsigned_round_trip(ty, value):
    wrapped = wrap(value, ty)
    assert from_unsigned(to_unsigned(wrapped, ty), ty) == wrapped
    assert 0 <= to_unsigned(wrapped, ty) < (1 << ty.width)


@given(types, values, values)
def test_modular_ring_ops(ty, a, b):
    a, b = wrap(a, ty), wrap(b, ty)
    assert eval_binary("+", a, b, ty) == wrap(a + b, ty)
    assert eval_binary("-", a, b, ty) == wrap(a - b, ty)
    assert eval_binary("*", a, b, ty) == wrap(a * b, ty)


@given(st.integers(-(2**31), 2**31 - 1),
       st.integers(-(2**31), 2**31 - 1).filter(lambda v: v != 0))
def test_truncating_division_identity(a, b):
    q, r = sdiv(a, b), srem(a, b)
    assert a == b * q + r
    assert abs(r) < abs(b)
    assert r == 0 or (r < 0) == (a < 0)  # remainder sign follows the dividend


@given(types, types, values)
def test_cast_matches_wrap(src, dst, value):
    v = wrap(value, src)
    assert cast_value(v, dst) == wrap(v, dst)


@given(types, values, st.integers(0, 63))
def test_shift_semantics(ty, a, amount):
    a = wrap(a, ty)
    amt = wrap(amount, ty)
    shifted = eval_binary("<<", a, amt, ty)
    if to_unsigned(amt, ty) >= ty.width:
        assert shifted == 0
    else:
        assert shifted == wrap(a << to_unsigned(amt, ty), ty)


@given(types, values)
def test_smtlib_division_by_zero(ty, a):
    a = wrap(a, ty)
    if ty.signed:
        assert eval_binary("/", a, 0, ty) == (1 if a < 0 else -1)
    else:
        assert eval_binary("/", a, 0, ty) == ty.max_value
    assert eval_binary("%", a, 0, ty) == a


@given(values)
def test_bool_wrap(value):
    assert wrap(value, BOOL) in (0, 1)
