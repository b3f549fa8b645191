import pytest
from hypothesis import given, settings, strategies as st

from cvbmc.frontend import (
    CheckFailure, LexError, ParseError, TypeCheckError, call_graph,
    normalized_hash, parse_and_check,
)
from cvbmc.lang import (
    ArrayType, Binary, Decl, Lit, Return, U8, ast_equal, pretty_program,
)

from corpus import generate_corpus


def check_fails(source: str, fragment: str) -> None:
    with pytest.raises((CheckFailure, TypeCheckError, ParseError, LexError)) as err:
        parse_and_check(source)
    assert fragment in str(err.value)


class TestParsing:
    def test_single_function_shape(self):
        program = parse_and_check("u8 f(u8 x){ return x + 1; }")
        assert [f.name for f in program.functions] == ["f"]
        func = program.function("f")
        assert func.signature == (("u8",), "u8")
        (ret,) = func.body
        assert isinstance(ret, Return)
        add = ret.expr
        assert isinstance(add, Binary) and add.op == "+"
        assert add.ty == U8
        assert isinstance(add.rhs, Lit) and add.rhs.value == 1 and add.rhs.ty == U8

    def test_whitespace_and_comments_do_not_matter(self):
        a = parse_and_check("u8 f(u8 x){ return x + 1; }")
        b = parse_and_check(
            "u8 f(u8 x) {\n  // add one\n  return /* inline */ x + 1;\n}")
        assert ast_equal(a, b)

    def test_hex_literals(self):
        program = parse_and_check("u8 f(){ return 0xFF; }")
        assert program.function("f").body[0].expr.value == 255

    def test_precedence_mul_before_add(self):
        a = parse_and_check("u8 f(u8 x){ return x + x * 2; }")
        b = parse_and_check("u8 f(u8 x){ return x + (x * 2); }")
        assert ast_equal(a, b)

    def test_precedence_shift_before_compare(self):
        a = parse_and_check("bool f(u8 x){ return x << 1 < 8; }")
        b = parse_and_check("bool f(u8 x){ return (x << 1) < 8; }")
        assert ast_equal(a, b)

    def test_for_loop_grammar(self):
        program = parse_and_check(
            "u8 f(){ u8 s = 0; for (u8 i = 0; i < 3; i = i + 1;) { s = s + 1; } return s; }")
        assert program.function("f") is not None

    def test_array_declaration_and_access(self):
        program = parse_and_check(
            "u8 f(u8 i){ u8 a[4]; a[i] = 1; return a[0]; }")
        decl = program.function("f").body[0]
        assert isinstance(decl, Decl) and isinstance(decl.ty, ArrayType)
        assert decl.ty.size == 4

    def test_globals(self):
        program = parse_and_check("u8 g = 7;\nu8 f(){ return g; }")
        assert program.globals[0].init == 7

    def test_parse_error_reports_position(self):
        with pytest.raises(ParseError) as err:
            parse_and_check("u8 f( { return 1; }")
        assert err.value.span.line == 1

    def test_unterminated_comment(self):
        with pytest.raises(LexError):
            parse_and_check("/* never closed")


class TestTypeChecking:
    def test_width_mismatch_needs_cast(self):
        check_fails("u8 f(u16 x){ return x; }", "no implicit conversions")

    def test_cast_fixes_width_mismatch(self):
        parse_and_check("u8 f(u16 x){ return cast<u8>(x); }")

    def test_recursive_cycle_rejected(self):
        check_fails(
            "u8 f(u8 x){ return g(x); } u8 g(u8 x){ return f(x); }",
            "recursive call cycle")

    def test_self_recursion_rejected(self):
        check_fails("u8 f(u8 x){ return f(x); }", "recursive call cycle")

    def test_condition_must_be_bool(self):
        check_fails("u8 f(u8 x){ if (x) { } return x; }", "expected bool")

    def test_assert_must_be_bool(self):
        check_fails("u8 f(u8 x){ assert(x); return x; }", "expected bool")

    def test_undeclared_name(self):
        check_fails("u8 f(){ return y; }", "undeclared name")

    def test_missing_return_on_some_path(self):
        check_fails("u8 f(bool b){ if (b) { return 1; } }", "not every path")

    def test_unreachable_code_rejected(self):
        check_fails("u8 f(){ return 1; u8 x = 2; }", "unreachable")

    def test_no_shadowing(self):
        check_fails("u8 f(u8 x){ u8 x = 1; return x; }", "shadows")

    def test_local_shadowing_global(self):
        check_fails("u8 g;\nu8 f(){ u8 g = 1; return g; }", "shadows a global")

    def test_literal_out_of_range(self):
        check_fails("u8 f(){ return 300; }", "out of range")

    def test_negative_literal_for_signed_min(self):
        parse_and_check("i8 f(){ return -128; }")
        check_fails("i8 f(){ return -129; }", "out of range")

    def test_mixed_operand_types_rejected(self):
        check_fails("u16 f(u8 a, u16 b){ return a + b; }",
                    "no implicit conversions")

    def test_return_in_loop_rejected(self):
        check_fails("u8 f(u8 x){ while (x < 3) { return x; } return 0; }",
                    "return inside a loop")

    def test_call_in_loop_condition_rejected(self):
        check_fails(
            "bool g(u8 x){ return x < 3; } u8 f(u8 x){ while (g(x)) { x = x + 1; } return x; }",
            "loop conditions")

    def test_nondet_in_loop_condition_rejected(self):
        check_fails("u8 f(){ u8 s = 0; while (nondet_bool()) { s = s + 1; } return s; }",
                    "loop conditions")

    def test_call_in_short_circuit_rhs_rejected(self):
        check_fails(
            "bool g(u8 x){ return x < 3; } bool f(u8 x){ return x < 5 && g(x); }",
            "right operand")

    def test_duplicate_function(self):
        check_fails("u8 f(){ return 1; } u8 f(){ return 2; }", "duplicate")

    def test_undefined_callee(self):
        check_fails("u8 f(){ return g(); }", "undefined function")

    def test_arity_mismatch(self):
        check_fails("u8 g(u8 x){ return x; } u8 f(){ return g(); }",
                    "expects 1 arguments")

    def test_array_initializer_rejected(self):
        check_fails("u8 f(){ u8 a[3] = 1; return a[0]; }", "initializers")

    def test_array_size_cap(self):
        check_fails("u8 f(){ u8 a[100000]; return a[0]; }", "element limit")

    def test_bool_cast_rejected(self):
        check_fails("u8 f(bool b){ return cast<u8>(b); }", "cast from bool")

    def test_void_in_expression_rejected(self):
        check_fails("void g(){ } u8 f(){ return g(); }",
                    "used in an expression")

    def test_multiple_errors_collected(self):
        with pytest.raises(CheckFailure) as err:
            parse_and_check(
                "u8 f(){ return y; }\nu8 g(){ return z; }")
        assert len(err.value.diagnostics) == 2


class TestNormalizedHash:
    def test_alpha_renaming_invariance(self):
        a = parse_and_check("u8 f(u8 x){ return x + 1; }").function("f")
        b = parse_and_check("u8 f(u8 y){ return y + 1; }").function("f")
        assert normalized_hash(a) == normalized_hash(b)

    def test_literal_edit_changes_hash(self):
        a = parse_and_check("u8 f(u8 x){ return x + 1; }").function("f")
        b = parse_and_check("u8 f(u8 x){ return x + 2; }").function("f")
        assert normalized_hash(a) != normalized_hash(b)

    def test_comments_and_formatting_invariance(self):
        a = parse_and_check("u8 f(u8 x){ return x + 1; }").function("f")
        b = parse_and_check(
            "u8 f(u8 x){\n   /*c*/ return  x+1 ;  // done\n}").function("f")
        assert normalized_hash(a) == normalized_hash(b)

    def test_operator_edit_changes_hash(self):
        a = parse_and_check("u8 f(u8 x){ return x + 1; }").function("f")
        b = parse_and_check("u8 f(u8 x){ return x - 1; }").function("f")
        assert normalized_hash(a) != normalized_hash(b)

    def test_statement_edit_changes_hash(self):
        a = parse_and_check("u8 f(u8 x){ return x; }").function("f")
        b = parse_and_check("u8 f(u8 x){ x = x + 1; return x; }").function("f")
        assert normalized_hash(a) != normalized_hash(b)

    def test_local_rename_invariance(self):
        a = parse_and_check(
            "u8 f(u8 x){ u8 tmp = x * 2; return tmp; }").function("f")
        b = parse_and_check(
            "u8 f(u8 x){ u8 acc = x * 2; return acc; }").function("f")
        assert normalized_hash(a) == normalized_hash(b)

    def test_signature_contributes(self):
        a = parse_and_check("u8 f(u8 x){ return 1; }").function("f")
        b = parse_and_check("u8 f(i8 x){ return 1; }").function("f")
        assert normalized_hash(a) != normalized_hash(b)

    def test_global_reference_is_by_name(self):
        a = parse_and_check("u8 g;\nu8 f(){ return g; }").function("f")
        b = parse_and_check("u8 h;\nu8 f(){ return h; }").function("f")
        assert normalized_hash(a) != normalized_hash(b)


class TestCallGraph:
    SRC = """
        u8 g(u8 x){ return x; }
        u8 f(u8 x){ return g(x); }
        u8 h(u8 x){ return x; }
        u8 main(u8 x){ return f(x) + g(x); }
    """

    def test_transitive_callers(self):
        cg = call_graph(parse_and_check(self.SRC))
        assert cg.transitive_callers("g") == {"f", "main"}

    def test_isolated_function(self):
        cg = call_graph(parse_and_check(self.SRC))
        assert cg.transitive_callers("h") == set()

    def test_single_edge(self):
        cg = call_graph(parse_and_check(self.SRC))
        assert cg.transitive_callers("f") == {"main"}

    def test_transitive_callees(self):
        cg = call_graph(parse_and_check(self.SRC))
        assert cg.transitive_callees("main") == {"f", "g"}


class TestParserRobustness:
    @settings(max_examples=300, deadline=None)
    @given(st.text(alphabet=st.characters(min_codepoint=9, max_codepoint=126),
                   max_size=120))
    def test_arbitrary_text_never_crashes(self, text):
        try:
            parse_and_check(text)
        except (LexError, ParseError, TypeCheckError, CheckFailure):
            pass  # diagnostics are the contract; anything else is a bug

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**64))
    def test_huge_literals_diagnosed(self, value):
        source = f"u8 f(){{ return {value}; }}"
        try:
            program = parse_and_check(source)
            assert 0 <= value <= 255
        except CheckFailure:
            assert value > 255


class TestRoundTrip:
    def test_pretty_print_reparses_equal(self):
        for _, source in generate_corpus(11, 25):
            program = parse_and_check(source)
            printed = pretty_program(program)
            reparsed = parse_and_check(printed)
            assert ast_equal(program, reparsed), printed

    def test_hash_stable_across_round_trip(self):
        for _, source in generate_corpus(12, 15):
            program = parse_and_check(source)
            reparsed = parse_and_check(pretty_program(program))
            for f, g in zip(program.functions, reparsed.functions):
                assert normalized_hash(f) == normalized_hash(g)
