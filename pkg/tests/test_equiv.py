import pytest

from cvbmc.equiv import (
    EQUIVALENT, INCOMPARABLE, NOT_EQUIVALENT, SignatureMismatch, build_miter,
    check_equivalence, check_function_equivalence,
)
from cvbmc.frontend import parse_and_check
from cvbmc.lang import Assert
from cvbmc.frontend import iter_stmts
from cvbmc.witness import interpret


def equiv(old_src, new_src, name_old="f", name_new=None, k=4):
    old = parse_and_check(old_src)
    new = parse_and_check(new_src)
    return check_function_equivalence(old, new, name_old,
                                      name_new or name_old, k)


class TestMiterConstruction:
    def test_return_equality_asserted(self):
        old = parse_and_check("u8 f(u8 x){ return x + x; }")
        new = parse_and_check("u8 g(u8 x){ return 2 * x; }")
        miter = build_miter(old.function("f"), new.function("g"), old, new)
        asserts = [s for s in iter_stmts(miter.program.function(miter.entry).body)
                   if isinstance(s, Assert)]
        assert len(asserts) == 1
        names = {f.name for f in miter.program.functions}
        assert "__old_f" in names and "__new_g" in names

    def test_arity_mismatch_raises(self):
        old = parse_and_check("u8 f(u8 x, u8 y){ return x; }")
        new = parse_and_check("u8 f(u8 x){ return x; }")
        with pytest.raises(SignatureMismatch):
            build_miter(old.function("f"), new.function("f"), old, new)

    def test_written_global_compared(self):
        src = "u8 counter;\nvoid f(u8 x){ counter = x; }"
        old = parse_and_check(src)
        new = parse_and_check(src)
        miter = build_miter(old.function("f"), new.function("f"), old, new)
        asserts = [s for s in iter_stmts(miter.program.function(miter.entry).body)
                   if isinstance(s, Assert)]
        assert len(asserts) == 1  # counter__old == counter__new

    def test_readonly_global_not_compared(self):
        src = "u8 limit = 9;\nu8 f(u8 x){ return x - limit; }"
        old = parse_and_check(src)
        new = parse_and_check(src)
        miter = build_miter(old.function("f"), new.function("f"), old, new)
        asserts = [s for s in iter_stmts(miter.program.function(miter.entry).body)
                   if isinstance(s, Assert)]
        assert len(asserts) == 1  # only the return value

    def test_internal_asserts_stripped(self):
        old = parse_and_check("u8 f(u8 x){ assert(x != 3); return x; }")
        new = parse_and_check("u8 f(u8 x){ return x; }")
        verdict = check_equivalence(
            build_miter(old.function("f"), new.function("f"), old, new), 4)
        assert verdict.status == EQUIVALENT


class TestCheckEquivalence:
    def test_double_vs_times_two(self):
        assert equiv("u8 f(u8 x){ return x + x; }",
                     "u8 g(u8 x){ return 2 * x; }",
                     "f", "g").status == EQUIVALENT

    def test_plus_one_vs_minus_one(self):
        verdict = equiv("u8 f(u8 x){ return x + 1; }",
                        "u8 f(u8 x){ return x - 1; }")
        assert verdict.status == NOT_EQUIVALENT
        assert verdict.witness is not None
        # x=0 is the lexicographically first distinguishing input: 1 != 255
        assert verdict.witness.inputs[0] == {"symbol": "x", "type": "u8",
                                             "value": 0}

    def test_reflexivity(self):
        src = "u8 f(u8 x){ u8 y = x * 3; if (y > 10) { y = y - 1; } return y; }"
        assert equiv(src, src).status == EQUIVALENT

    def test_signature_mismatch_is_incomparable(self):
        verdict = equiv("u8 f(u8 x, u8 y){ return x; }",
                        "u8 f(u8 x){ return x; }")
        assert verdict.status == INCOMPARABLE

    def test_missing_function_is_incomparable(self):
        verdict = equiv("u8 f(u8 x){ return x; }", "u8 g(u8 x){ return x; }")
        assert verdict.status == INCOMPARABLE

    def test_renamed_locals_equivalent(self):
        assert equiv("u8 f(u8 x){ u8 tmp = x + 1; return tmp; }",
                     "u8 f(u8 x){ u8 acc = x + 1; return acc; }"
                     ).status == EQUIVALENT

    def test_reassociated_constants_equivalent(self):
        assert equiv("u8 f(u8 x){ return (x + 1) + 2; }",
                     "u8 f(u8 x){ return x + 3; }").status == EQUIVALENT

    def test_global_write_divergence_detected(self):
        old = "u8 counter;\nvoid f(u8 x){ counter = x; }"
        new = "u8 counter;\nvoid f(u8 x){ counter = x + 1; }"
        verdict = equiv(old, new)
        assert verdict.status == NOT_EQUIVALENT

    def test_array_global_compared_elementwise(self):
        # size 1 keeps the shared havoc inside the builtin's input budget
        old = "u8 buf[1];\nvoid f(u8 x){ buf[0] = x; }"
        new = "u8 buf[1];\nvoid f(u8 x){ buf[0] = x + 1; }"
        assert equiv(old, new).status == NOT_EQUIVALENT
        same = "u8 buf[1];\nvoid f(u8 x){ buf[0] = x + 0; }"
        same2 = "u8 buf[1];\nvoid f(u8 x){ buf[0] = x; }"
        assert equiv(same, same2).status == EQUIVALENT

    def test_budget_exceeded_degrades_to_unknown(self):
        # a 3-element shared array plus the argument exceeds the builtin's
        # 20-bit enumeration budget: honest unknown, not a wrong verdict
        src = "u8 buf[3];\nvoid f(u8 x){ buf[0] = x; }"
        verdict = equiv(src, src)
        assert verdict.status == "unknown"
        assert "bit budget" in verdict.detail

    def test_global_read_quantified(self):
        # Equal only at the initializer value of the global; the miter must
        # havoc shared state, so this is non-equivalent.
        old = "u8 base = 0;\nu8 f(u8 x){ return x + base; }"
        new = "u8 base = 0;\nu8 f(u8 x){ return x; }"
        verdict = equiv(old, new)
        assert verdict.status == NOT_EQUIVALENT

    def test_callees_inlined_from_own_context(self):
        old = """
            u8 helper(u8 x){ return x + 1; }
            u8 f(u8 x){ return helper(x); }
        """
        new = """
            u8 helper(u8 x){ return x + 2; }
            u8 f(u8 x){ return helper(x) - 1; }
        """
        assert equiv(old, new).status == EQUIVALENT

    def test_loops_compared_up_to_bound(self):
        old = """
            u8 f(u8 n){
                assume(n < 4);
                u8 s = 0;
                u8 i = 0;
                while (i < n) { s = s + 2; i = i + 1; }
                return s;
            }
        """
        new = """
            u8 f(u8 n){
                assume(n < 4);
                u8 s = 0;
                u8 i = 0;
                while (i < n) { s = s + 1; i = i + 1; }
                return s + s;
            }
        """
        # s accumulates 2 per iteration on one side and is doubled after the
        # loop on the other: both give 2n for every n within the bound.
        verdict = equiv(old, new, k=4)
        assert verdict.status == EQUIVALENT

    def test_shared_body_nondets_paired(self):
        src = "u8 f(u8 x){ u8 r = nondet_u8(); return x + r; }"
        assert equiv(src, src).status == EQUIVALENT

    def test_symmetry_of_status(self):
        pairs = [
            ("u8 f(u8 x){ return x + x; }", "u8 f(u8 x){ return 2 * x; }"),
            ("u8 f(u8 x){ return x + 1; }", "u8 f(u8 x){ return x - 1; }"),
            ("u8 f(u8 x){ return x ^ x; }", "u8 f(u8 x){ return 0; }"),
        ]
        for a, b in pairs:
            forward = equiv(a, b).status
            backward = equiv(b, a).status
            assert forward == backward

    def test_witness_distinguishes_concretely(self):
        old_src = "u8 f(u8 x){ return x * 3; }"
        new_src = "u8 f(u8 x){ return x * 5; }"
        verdict = equiv(old_src, new_src)
        assert verdict.status == NOT_EQUIVALENT
        x = verdict.witness.input_dict()["x"]
        old_out = interpret(parse_and_check(old_src), "f", {"x": x}, 4)
        new_out = interpret(parse_and_check(new_src), "f", {"x": x}, 4)
        assert old_out.return_value != new_out.return_value


class TestAgainstExhaustiveComparison:
    def brute_force_equal(self, old_src, new_src, name="f"):
        old = parse_and_check(old_src)
        new = parse_and_check(new_src)
        for x in range(256):
            a = interpret(old, name, {"x": x}, 8)
            b = interpret(new, name, {"x": x}, 8)
            if (a.status, a.return_value) != (b.status, b.return_value):
                return False
        return True

    @pytest.mark.parametrize("old,new", [
        ("u8 f(u8 x){ return x + x; }", "u8 f(u8 x){ return 2 * x; }"),
        ("u8 f(u8 x){ return x << 1; }", "u8 f(u8 x){ return 2 * x; }"),
        ("u8 f(u8 x){ return x; }", "u8 f(u8 x){ return x + 0; }"),
        ("u8 f(u8 x){ return x * 6; }", "u8 f(u8 x){ return x * 2 * 3; }"),
        ("u8 f(u8 x){ return x + 1; }", "u8 f(u8 x){ return x + 2; }"),
        ("u8 f(u8 x){ return x / 2; }", "u8 f(u8 x){ return x >> 1; }"),
        ("u8 f(u8 x){ return x % 4; }", "u8 f(u8 x){ return x & 3; }"),
        ("u8 f(u8 x){ return x - 1; }", "u8 f(u8 x){ return x ^ 1; }"),
    ])
    def test_verdict_matches_brute_force(self, old, new):
        verdict = equiv(old, new)
        expected = self.brute_force_equal(old, new)
        assert (verdict.status == EQUIVALENT) == expected
