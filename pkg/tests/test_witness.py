import pytest

from cvbmc.frontend import parse_and_check
from cvbmc.pipeline import PipelineConfig, lower_program
from cvbmc.solve import solve_enumerative
from cvbmc.witness import (
    BitBudgetExceeded, Counterexample, InputArityMismatch, ReplayMismatch,
    enumerate_assignments, exhaustive_oracle, extract_counterexample,
    interpret, nondet_space, replay, space_bits, ssa_eval,
)

from corpus import generate_corpus


class TestInterpreter:
    def test_unsigned_wraparound(self):
        program = parse_and_check(
            "u8 main(){ u8 x = 255; x = x + 1; return x; }")
        out = interpret(program, "main", {}, 4)
        assert out.status == "completed"
        assert out.return_value == 0

    def test_assert_false_violates(self):
        program = parse_and_check("void main(){ assert(false); }")
        out = interpret(program, "main", {}, 4)
        assert out.status == "violated"
        assert out.kind == "user-assert"

    def test_assume_false_stops_before_assert(self):
        program = parse_and_check(
            "void main(){ assume(false); assert(false); }")
        out = interpret(program, "main", {}, 4)
        assert out.status == "assumption-failed"

    def test_signed_division_truncates(self):
        program = parse_and_check("i8 main(i8 a, i8 b){ return a / b; }")
        out = interpret(program, "main", {"a": -7, "b": 2}, 1)
        assert out.return_value == -3

    def test_signed_remainder_follows_dividend(self):
        program = parse_and_check("i8 main(i8 a, i8 b){ return a % b; }")
        assert interpret(program, "main", {"a": -7, "b": 2}, 1).return_value == -1
        assert interpret(program, "main", {"a": 7, "b": -2}, 1).return_value == 1

    def test_division_by_zero_is_caught(self):
        program = parse_and_check("u8 main(u8 x, u8 y){ return x / y; }")
        out = interpret(program, "main", {"x": 8, "y": 0}, 1)
        assert out.status == "violated"
        assert out.kind == "div-by-zero"

    def test_division_by_zero_defined_when_check_off(self):
        program = parse_and_check("u8 main(u8 x, u8 y){ return x / y; }")
        out = interpret(program, "main", {"x": 8, "y": 0}, 1,
                        checks=frozenset())
        assert out.status == "completed"
        assert out.return_value == 255  # SMT-LIB bvudiv by zero

    def test_shift_range_violation(self):
        program = parse_and_check("u8 main(u8 x, u8 s){ return x << s; }")
        out = interpret(program, "main", {"x": 1, "s": 8}, 1)
        assert out.status == "violated" and out.kind == "shift-range"
        out2 = interpret(program, "main", {"x": 1, "s": 8}, 1,
                         checks=frozenset())
        assert out2.return_value == 0

    def test_signed_overflow_violation(self):
        program = parse_and_check("i8 main(i8 x){ return x + 1; }")
        out = interpret(program, "main", {"x": 127}, 1)
        assert out.status == "violated" and out.kind == "signed-overflow"
        out2 = interpret(program, "main", {"x": 127}, 1, checks=frozenset())
        assert out2.return_value == -128

    def test_out_of_bounds_read_masked_when_check_off(self):
        program = parse_and_check(
            "u8 main(u8 i){ u8 a[4]; a[1] = 9; return a[i]; }")
        assert interpret(program, "main", {"i": 200}, 1,
                         checks=frozenset()).return_value == 0
        assert interpret(program, "main", {"i": 1}, 1).return_value == 9

    def test_depth_exceeded(self):
        program = parse_and_check("""
            u8 main(u8 n){
                u8 i = 0;
                while (i < n) { i = i + 1; }
                return i;
            }
        """)
        assert interpret(program, "main", {"n": 3}, 2).status == "depth-exceeded"
        assert interpret(program, "main", {"n": 2}, 2).status == "completed"

    def test_short_circuit_skips_rhs(self):
        program = parse_and_check(
            "bool main(u8 x, u8 y){ return (y != 0) && (x / y > 1); }")
        out = interpret(program, "main", {"x": 4, "y": 0}, 1)
        assert out.status == "completed"
        assert out.return_value == 0

    def test_input_arity_mismatch(self):
        program = parse_and_check("u8 main(u8 x){ return x; }")
        with pytest.raises(InputArityMismatch):
            interpret(program, "main", {}, 1)
        with pytest.raises(InputArityMismatch):
            interpret(program, "main", [1, 2], 1)

    def test_ordered_list_inputs(self):
        program = parse_and_check("u8 main(u8 x, u8 y){ return x - y; }")
        assert interpret(program, "main", [5, 3], 1).return_value == 2

    def test_globals_initialized(self):
        program = parse_and_check(
            "u8 g = 7;\nu8 z;\nu8 main(){ return g + z; }")
        assert interpret(program, "main", {}, 1).return_value == 7

    def test_trace_records_assignments(self):
        program = parse_and_check(
            "void main(u8 x){ u8 y = x + 1; assert(y == 0); }")
        out = interpret(program, "main", {"x": 1}, 1, record_trace=True)
        assert out.status == "violated"
        assert out.trace[0]["var"] == "y" and out.trace[0]["value"] == 2
        assert out.trace[-1]["text"].startswith("assert")


class TestNondetSpace:
    def test_space_matches_lowered_symbols(self):
        for _, source in generate_corpus(41, 20):
            program = parse_and_check(source)
            ssa, _ = lower_program(program, "main", PipelineConfig(k=3))
            space = nondet_space(program, "main", 3)
            assert [s for s, _ in space] == [s for s, _ in ssa.nondet_symbols], source

    def test_loop_iterations_multiply_instances(self):
        program = parse_and_check("""
            u8 main(){
                u8 s = 0;
                u8 i = 0;
                while (i < 2) { u8 v = nondet_u8(); s = s + v; i = i + 1; }
                return s;
            }
        """)
        space = nondet_space(program, "main", 2)
        assert len(space) == 2
        assert len(nondet_space(program, "main", 3)) == 3

    def test_call_sites_get_distinct_instances(self):
        program = parse_and_check("""
            u8 pick(u8 c){ u8 v = nondet_u8(); return v + c; }
            u8 main(){ return pick(1) - pick(2); }
        """)
        space = nondet_space(program, "main", 1)
        assert len(space) == 2
        assert len({s for s, _ in space}) == 2

    def test_enumeration_order(self):
        from cvbmc.lang import BOOL, U8

        space = [("a", BOOL), ("b", U8)]
        assignments = list(enumerate_assignments(space))
        assert len(assignments) == 512
        assert assignments[0] == {"a": 0, "b": 0}
        assert assignments[1] == {"a": 0, "b": 1}
        assert assignments[256] == {"a": 1, "b": 0}
        assert space_bits(space) == 9


class TestCounterexamples:
    def build(self, source, entry="main", k=4):
        program = parse_and_check(source)
        _, vcs = lower_program(program, entry, PipelineConfig(k=k))
        return program, vcs

    def test_extract_and_replay(self):
        program, vcs = self.build("void main(u8 x){ assert(x != 255); }")
        cex = extract_counterexample(program, "main", vcs[0], [("x", 255)],
                                     max_iters=4)
        assert cex.kind == "user-assert"
        assert cex.inputs == [{"symbol": "x", "type": "u8", "value": 255}]
        assert cex.trace[-1]["text"] == "assert((x != 255));"
        assert replay(program, cex, "main", max_iters=4)

    def test_non_violating_model_is_mismatch(self):
        program, vcs = self.build("void main(u8 x){ assert(x != 255); }")
        with pytest.raises(ReplayMismatch):
            extract_counterexample(program, "main", vcs[0], [("x", 3)],
                                   max_iters=4)

    def test_divide_by_zero_kind(self):
        program, vcs = self.build("u8 main(u8 x, u8 y){ return x / y; }")
        vc = next(v for v in vcs if v.kind == "div-by-zero")
        cex = extract_counterexample(program, "main", vc,
                                     [("x", 0), ("y", 0)], max_iters=4)
        assert cex.kind == "div-by-zero"
        assert replay(program, cex, "main", max_iters=4)

    def test_wrong_claim_is_mismatch(self):
        program, vcs = self.build(
            "void main(u8 x){ assert(x != 3); assert(x != 200); }")
        # x=200 violates the second claim, not the first.
        with pytest.raises(ReplayMismatch):
            extract_counterexample(program, "main", vcs[0], [("x", 200)],
                                   max_iters=4)

    def test_counterexample_json_round_trip(self):
        program, vcs = self.build("void main(u8 x){ assert(x != 255); }")
        cex = extract_counterexample(program, "main", vcs[0], [("x", 255)],
                                     max_iters=4)
        import json

        loaded = Counterexample.from_dict(json.loads(cex.to_json()))
        assert replay(program, loaded, "main", max_iters=4)

    def test_counterexample_schema_shape(self):
        program, vcs = self.build(
            "void main(u8 x){ u8 y = x + 1; assert(y != 0); }")
        cex = extract_counterexample(program, "main", vcs[0], [("x", 255)],
                                     max_iters=4)
        data = cex.to_dict()
        assert set(data) == {"vc_id", "inputs", "trace", "kind"}
        assert all(set(entry) == {"symbol", "type", "value"}
                   for entry in data["inputs"])
        assert all(set(entry) == {"line", "col", "text", "var", "value"}
                   for entry in data["trace"])


class TestExhaustiveOracle:
    def test_square_equals_49(self):
        program = parse_and_check("void main(i8 x){ assert(x * x != 49); }")
        oracle = exhaustive_oracle(program, "main", 1)
        sites = [key for key in oracle if key[2] == "user-assert"]
        assert len(sites) == 1
        verdict, witness = oracle[sites[0]]
        assert verdict == "VIOLATION"
        # bit-pattern order visits 7 before 249 (= -7)
        assert witness == {"x": 7}

    def test_unsigned_nonnegative_is_safe(self):
        program = parse_and_check("void main(u8 x){ assert(x >= 0); }")
        assert exhaustive_oracle(program, "main", 1) == {}

    def test_unwinding_assertion_oracle(self):
        program = parse_and_check("""
            u8 main(u8 n){
                assume(n < 6);
                u8 i = 0;
                while (i < n) { i = i + 1; }
                return i;
            }
        """)
        shallow = exhaustive_oracle(program, "main", 3, mode="assertion")
        assert any(key[2] == "unwinding-assertion" for key in shallow)
        deep = exhaustive_oracle(program, "main", 6, mode="assertion")
        assert not any(key[2] == "unwinding-assertion" for key in deep)
        # assumption mode treats deep executions as out of scope
        assumed = exhaustive_oracle(program, "main", 3, mode="assumption")
        assert not any(key[2] == "unwinding-assertion" for key in assumed)

    def test_bit_budget_enforced(self):
        program = parse_and_check("void main(u16 a, u16 b){ assert(a != b); }")
        with pytest.raises(BitBudgetExceeded):
            exhaustive_oracle(program, "main", 1)


class TestDifferentialSsa:
    def test_tree_and_ssa_agree_on_corpus(self):
        checked = 0
        for _, source in generate_corpus(42, 30, max_nondet_bits=8):
            program = parse_and_check(source)
            ssa, _ = lower_program(program, "main", PipelineConfig(k=3))
            space = nondet_space(program, "main", 3)
            if space_bits(space) > 10:
                continue
            for count, inputs in enumerate(enumerate_assignments(space)):
                if count >= 48:
                    break
                tree = interpret(program, "main", inputs, 3)
                run = ssa_eval(ssa, inputs)
                violated = run.first_violation()
                if tree.status == "violated":
                    assert violated is not None, (source, inputs)
                    assert (violated.span.rel_line, violated.span.col,
                            violated.kind) == (tree.span.rel_line,
                                               tree.span.col, tree.kind)
                elif tree.status == "completed":
                    assert violated is None, (source, inputs, violated.vc_id)
                    assert run.constraints_hold()
                    if "return" in ssa.exit_values:
                        assert run.exit_value(ssa, "return") == tree.return_value
                    for name, value in tree.globals_state.items():
                        if name in ssa.exit_values and not isinstance(value, list):
                            assert run.exit_value(ssa, name) == value
                elif tree.status == "assumption-failed":
                    # an execution the unwinding assumption or a user assume
                    # excludes: the SSA run must fail a constraint before
                    # violating anything
                    if violated is not None:
                        assert not run.constraints_hold()
                checked += 1
        assert checked > 300


class TestEnumerativeIsOracle:
    def test_verify_agrees_with_oracle_spot(self):
        source = """
            u8 main(u8 x){
                u8 y = x * 2;
                assert(y != 100);
                return y;
            }
        """
        program = parse_and_check(source)
        _, vcs = lower_program(program, "main", PipelineConfig(k=2))
        result = solve_enumerative(vcs[0])
        oracle = exhaustive_oracle(program, "main", 2)
        assert result.status == "sat"
        key = (vcs[0].span.rel_line, vcs[0].span.col, vcs[0].kind)
        assert oracle[key][0] == "VIOLATION"
        assert dict(result.model) == oracle[key][1]
