"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The heavy criteria (1 and 10) size their corpora to finish the whole
module in a few minutes on a laptop.
"""

import json
import os
import random
import time

from cvbmc.cli import main as cli_main
from cvbmc.cv import run_cv
from cvbmc.equiv import EQUIVALENT, NOT_EQUIVALENT, check_function_equivalence
from cvbmc.frontend import parse_and_check
from cvbmc.pipeline import (
    PipelineConfig, SAFE_UP_TO_K, UNKNOWN_STATUS, VIOLATION, lower_program,
    verify_program,
)
from cvbmc.solve import (
    BUILTIN_SOLVER, FeatureVector, extract_features, select_strategy,
)
from cvbmc.witness import exhaustive_oracle, interpret, replay

from conftest import reference_solver_config
from corpus import generate_corpus, mutation_pairs, refactoring_pairs


def record(number: int, name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {number} ({name}): {status}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert passed, line


def site_of(outcome) -> tuple:
    return (outcome.vc.span.rel_line, outcome.vc.span.col, outcome.vc.kind)


def compare_with_oracle(program, report, oracle) -> list:
    """Per claim site: BMC verdict (any VC violated) vs oracle verdict.
    Returns a list of disagreement descriptions."""
    problems = []
    bmc = {}
    for outcome in report.outcomes:
        key = site_of(outcome)
        if outcome.status == VIOLATION:
            bmc[key] = VIOLATION
        elif key not in bmc:
            bmc[key] = outcome.status
    for key, status in bmc.items():
        if status == UNKNOWN_STATUS:
            problems.append(f"unknown verdict at {key}")
            continue
        expected = VIOLATION if key in oracle else SAFE_UP_TO_K
        if status != expected:
            problems.append(f"{key}: bmc={status} oracle={expected}")
    for key in oracle:
        if key not in bmc:
            problems.append(f"oracle-only site {key}")
    return problems


def run_agreement_sweep(count: int, seed: int, cfg: PipelineConfig,
                        check_replay: bool = True) -> tuple:
    """(programs checked, vcs checked, violations replayed, problems)."""
    programs = 0
    vcs = 0
    violations = 0
    problems = []
    for _, source in generate_corpus(seed, count, max_nondet_bits=10):
        program = parse_and_check(source)
        report = verify_program(program, "main", cfg)
        oracle = exhaustive_oracle(program, "main", cfg.k, cfg.checks,
                                   cfg.mode)
        problems.extend(compare_with_oracle(program, report, oracle))
        programs += 1
        vcs += len(report.outcomes)
        for outcome in report.outcomes:
            if "replay mismatch" in outcome.detail:
                problems.append(f"replay mismatch: {outcome.vc.vc_id}")
            if outcome.status == VIOLATION and check_replay:
                violations += 1
                if not replay(program, outcome.witness, "main",
                              max_iters=cfg.k, checks=cfg.checks):
                    problems.append(f"witness does not replay: {outcome.vc.vc_id}")
        if problems:
            break
    return programs, vcs, violations, problems


# ---------------------------------------------------------------------------
# Criterion 1 + 2: oracle equivalence and replay soundness


VIOLATIONS_REPLAYED = {"count": 0}


def test_criterion_1_oracle_equivalence():
    started = time.monotonic()
    total_programs = 0
    total_vcs = 0
    problems = []
    # 500 programs across both unwinding modes and several bounds (k <= 8).
    for seed, count, cfg in [
        (101, 150, PipelineConfig(k=3)),
        (102, 125, PipelineConfig(k=2)),
        (103, 100, PipelineConfig(k=5, mode="assertion")),
        (104, 75, PipelineConfig(k=8)),
        (105, 50, PipelineConfig(k=4, mode="assertion")),
    ]:
        programs, vcs, violations, found = run_agreement_sweep(count, seed, cfg)
        total_programs += programs
        total_vcs += vcs
        VIOLATIONS_REPLAYED["count"] += violations
        problems.extend(found)
        if problems:
            break
    elapsed = time.monotonic() - started
    record(1, "oracle equivalence", not problems and total_programs >= 500,
           f"{total_programs} programs, {total_vcs} VCs, {elapsed:.0f}s"
           + (f"; first problem: {problems[0]}" if problems else ""))
    assert elapsed < 600, f"sweep took {elapsed:.0f}s, budget is 10 minutes"


def test_criterion_2_replay_soundness():
    # Criterion 1's sweep replayed every violation through the interpreter;
    # here a dedicated mixed corpus adds assertion-mode unwinding violations
    # and division/bounds/overflow witnesses, all of which must replay.
    cfg = PipelineConfig(k=2, mode="assertion")
    programs, vcs, violations, problems = run_agreement_sweep(60, 201, cfg)
    total = VIOLATIONS_REPLAYED["count"] + violations
    record(2, "replay soundness", not problems and total >= 100,
           f"{total} violations replayed, zero mismatches"
           + (f"; first problem: {problems[0]}" if problems else ""))


# ---------------------------------------------------------------------------
# Criterion 3: encoding-precision demonstration


def test_criterion_3_encoding_precision():
    failures = []
    for ty, max_value in (("u8", 255), ("u16", 65535)):
        for c in (1, 2):
            source = f"void main({ty} x){{ assert(x + {c} > x); }}"
            program = parse_and_check(source)
            bv_report = verify_program(program, "main",
                                       PipelineConfig(k=1, encoding="bv"))
            int_report = verify_program(program, "main",
                                        PipelineConfig(k=1, encoding="int"))
            bv_outcome = bv_report.outcomes[0]
            int_outcome = int_report.outcomes[0]
            witness = {i["symbol"]: i["value"]
                       for i in bv_outcome.witness.inputs} \
                if bv_outcome.witness else {}
            if bv_outcome.status != VIOLATION:
                failures.append(f"{ty},c={c}: BV said {bv_outcome.status}")
            elif witness.get("x") != max_value - c + 1:
                failures.append(f"{ty},c={c}: BV witness {witness}")
            if int_outcome.status != SAFE_UP_TO_K:
                failures.append(f"{ty},c={c}: INT said {int_outcome.status}")
            elif int_outcome.precision != "approximate":
                failures.append(f"{ty},c={c}: INT not flagged approximate")
    record(3, "encoding precision demonstrated", not failures,
           "; ".join(failures) if failures else
           "BV finds the wrap, INT safe but flagged approximate, 4 instances")


# ---------------------------------------------------------------------------
# Criterion 4: routing safety


def certified_linear_source(rng: random.Random) -> str:
    """A program guaranteed to lie in the certified linear fragment: u8
    inputs widened to u32 before any arithmetic, so nothing can wrap."""
    params = [f"p{i}" for i in range(rng.randint(1, 2))]
    terms = []
    for p in rng.sample(params, len(params)):
        terms.append(f"{rng.randint(1, 9)} * cast<u32>({p})")
    expr = " + ".join(terms + [str(rng.randint(0, 99))])
    threshold = rng.randint(0, 3000)
    lines = [f"void main({', '.join('u8 ' + p for p in params)}){{"]
    lines.append(f"    u32 acc = {expr};")
    lines.append(f"    assert(acc >= 0 || acc < {threshold});")
    lines.append(f"    assert(acc != {threshold});")
    lines.append("}")
    return "\n".join(lines)


def test_criterion_4_routing_safety():
    rng = random.Random(4242)
    bad_routes = 0
    for _ in range(10000):
        fv = FeatureVector(
            bitwise_ops=rng.randint(0, 4),
            shifts=rng.randint(0, 4),
            nonconst_mul=rng.randint(0, 2),
            nonconst_div_mod=rng.randint(0, 2),
            array_accesses=rng.randint(0, 4),
            nondet_bits_total=rng.randint(0, 64),
            max_width=rng.choice([1, 8, 16, 32]),
            has_overflow_claims=rng.random() < 0.5,
            in_width_certified=rng.random() < 0.5,
        )
        strategy = select_strategy(fv, [BUILTIN_SOLVER])
        if strategy.encoding.name == "int" and (
                fv.bitwise_ops or fv.shifts or fv.has_overflow_claims):
            bad_routes += 1
    agreement_problems = []
    checked_programs = 0
    vcs_compared = 0
    while checked_programs < 50:
        source = certified_linear_source(rng)
        program = parse_and_check(source)
        _, vcs = lower_program(program, "main", PipelineConfig(k=1))
        if not all(extract_features(vc).in_width_certified for vc in vcs):
            continue
        checked_programs += 1
        bv_report = verify_program(program, "main",
                                   PipelineConfig(k=1, encoding="bv"))
        int_report = verify_program(program, "main",
                                    PipelineConfig(k=1, encoding="int"))
        for a, b in zip(bv_report.outcomes, int_report.outcomes):
            vcs_compared += 1
            if a.status != b.status:
                agreement_problems.append(
                    f"{a.vc.vc_id}: bv={a.status} int={b.status}")
    record(4, "routing safety",
           bad_routes == 0 and not agreement_problems,
           f"10000 random feature vectors, 0 unsafe routes; "
           f"{checked_programs} certified programs, {vcs_compared} VCs agree"
           + (f"; {agreement_problems[0]}" if agreement_problems else ""))


# ---------------------------------------------------------------------------
# Criterion 5: unwinding soundness


def test_criterion_5_unwinding_soundness():
    failures = []
    for n in (1, 2, 3, 5, 7):
        source = f"""
            void main(){{
                u8 i = 0;
                while (i < {n}) {{ i = i + 1; }}
                assert(i == {n});
            }}
        """
        program = parse_and_check(source)
        for k in range(1, n + 3):
            report = verify_program(program, "main",
                                    PipelineConfig(k=k, mode="assertion"))
            unwinding = [o for o in report.outcomes
                         if o.vc.kind == "unwinding-assertion"]
            fired = any(o.status == VIOLATION for o in unwinding)
            if k < n and not fired:
                failures.append(f"n={n} k={k}: bound violation missed")
            if k >= n and fired:
                failures.append(f"n={n} k={k}: spurious bound violation")
            if k >= n and report.worst_status != SAFE_UP_TO_K:
                failures.append(f"n={n} k={k}: expected all safe")
            assumed = verify_program(program, "main",
                                     PipelineConfig(k=k, mode="assumption"))
            oracle = exhaustive_oracle(program, "main", k, mode="assumption")
            for outcome in assumed.outcomes:
                is_violation = outcome.status == VIOLATION
                oracle_says = site_of(outcome) in oracle
                if is_violation and not oracle_says:
                    failures.append(
                        f"n={n} k={k}: spurious assumption-mode violation")
    record(5, "unwinding soundness", not failures,
           "; ".join(failures[:3]) if failures else
           "assertion mode exact at every bound, assumption mode never spurious")


# ---------------------------------------------------------------------------
# Criterion 6: equivalence gate


def brute_force_equivalent(old_src: str, new_src: str, k: int = 8) -> bool:
    from cvbmc.witness import enumerate_assignments, nondet_space

    old = parse_and_check(old_src)
    new = parse_and_check(new_src)
    space = nondet_space(old, "f", k)
    for inputs in enumerate_assignments(space):
        a = interpret(old, "f", inputs, k, checks=frozenset())
        b = interpret(new, "f", inputs, k, checks=frozenset())
        if a.status != b.status or a.return_value != b.return_value:
            return False
    return True


def test_criterion_6_equivalence_gate():
    failures = []
    refactors = refactoring_pairs()
    mutations = mutation_pairs()
    assert len(refactors) >= 20 and len(mutations) >= 20
    for old_src, new_src in refactors:
        verdict = check_function_equivalence(
            parse_and_check(old_src), parse_and_check(new_src), "f", "f", 4)
        if verdict.status != EQUIVALENT:
            failures.append(f"refactor not proven: {old_src!r} ({verdict.status})")
    for old_src, new_src in mutations:
        verdict = check_function_equivalence(
            parse_and_check(old_src), parse_and_check(new_src), "f", "f", 4)
        if verdict.status != NOT_EQUIVALENT:
            failures.append(f"mutation missed: {new_src!r} ({verdict.status})")
            continue
        if brute_force_equivalent(old_src, new_src):
            failures.append(f"mutation pair actually equivalent: {new_src!r}")
            continue
        # witness validity: replaying the distinguishing inputs through both
        # versions produces different outputs
        inputs = verdict.witness.input_dict()
        old_prog = parse_and_check(old_src)
        new_prog = parse_and_check(new_src)
        arg_values = {p.name: inputs.get(p.name, 0)
                      for p in old_prog.function("f").params}
        a = interpret(old_prog, "f", arg_values, 8, checks=frozenset())
        b = interpret(new_prog, "f", arg_values, 8, checks=frozenset())
        if (a.status, a.return_value) == (b.status, b.return_value):
            failures.append(f"witness does not distinguish: {new_src!r}")
    record(6, "equivalence gate", not failures,
           "; ".join(failures[:3]) if failures else
           f"{len(refactors)} refactorings proven, "
           f"{len(mutations)} mutations detected with valid witnesses")


# ---------------------------------------------------------------------------
# Criterion 7 + 8: continuous-verification focus and test acceleration


def synthetic_project(worker_body: str) -> str:
    parts = []
    for i in range(17):
        parts.append(f"""
u8 leaf{i:02d}(u8 x){{
    u8 r = x ^ {i};
    assert(r < 128 || r >= 128);
    return r;
}}""")
    parts.append(f"u8 worker(u8 x){{ {worker_body} }}")
    parts.append("""
u8 mid(u8 x){
    u8 r = worker(x);
    assert(r >= 0 || r < 16);
    return r;
}""")
    parts.append("""
u8 top(u8 x){
    u8 r = mid(x);
    assert(r < 64 || r >= 64);
    return r;
}""")
    return "\n".join(parts)


def write_tree(path: str, source: str) -> None:
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "project.mc"), "w") as handle:
        handle.write(source)


def full_run_calls(source: str, cfg: PipelineConfig) -> int:
    program = parse_and_check(source)
    total = 0
    for func in program.function_names():
        fn_cfg = PipelineConfig(k=cfg.k, mode=cfg.mode, checks=cfg.checks,
                                havoc_globals=True)
        _, vcs = lower_program(program, func, fn_cfg)
        total += len(vcs)
    return total


def test_criterion_7_cv_focus(tmp_path):
    old_src = synthetic_project("return x + 1;")
    new_src = synthetic_project("return x + 2;")
    old_dir = str(tmp_path / "old")
    new_dir = str(tmp_path / "new")
    write_tree(old_dir, old_src)
    write_tree(new_dir, new_src)
    cache = str(tmp_path / "cache.jsonl")
    cfg = PipelineConfig(k=2)
    report = run_cv(old_dir, new_dir, cache, None, cfg)
    full_calls = full_run_calls(new_src, cfg)
    failures = []
    if report.changes.modified_same_signature != ["worker"]:
        failures.append(f"diff saw {report.changes.to_dict()}")
    if report.impact != ["worker", "mid", "top"]:
        failures.append(f"impact was {report.impact}")
    touched = {row["function"] for row in report.verdicts}
    if not touched <= {"worker", "mid", "top"}:
        failures.append(f"solver calls leaked to {touched}")
    if report.executed > full_calls * 3 / 20:
        failures.append(
            f"executed {report.executed} > 3/20 of full run ({full_calls})")
    rerun = run_cv(old_dir, new_dir, cache, None, cfg)
    if rerun.executed != 0:
        failures.append(f"re-run executed {rerun.executed}")
    record(7, "continuous-verification focus", not failures,
           "; ".join(failures) if failures else
           f"{report.executed} of {full_calls} full-run calls, "
           f"impact 3/20 functions, re-run executed=0")


def test_criterion_8_test_case_acceleration(tmp_path):
    old_src = synthetic_project("return x + 1;")
    # seeded reachable bug: top(x) = worker(x) = x + 2 equals 9 at x = 7
    buggy = synthetic_project("return x + 2;").replace(
        "assert(r < 64 || r >= 64);", "assert(r != 9);")
    for name, tests in (("with", [{"function": "top",
                                   "inputs": [{"ordinal": 0, "value": 7}]}]),
                        ("without", None)):
        base = tmp_path / name
        base.mkdir()
        write_tree(str(base / "old"), old_src)
        write_tree(str(base / "new"), buggy)
        tests_path = None
        if tests is not None:
            tests_path = str(base / "tests.json")
            with open(tests_path, "w") as handle:
                json.dump(tests, handle)
        report = run_cv(str(base / "old"), str(base / "new"),
                        str(base / "cache.jsonl"), tests_path,
                        PipelineConfig(k=2))
        violated = {row["vc_id"] for row in report.verdicts
                    if row["status"] == VIOLATION}
        if name == "with":
            with_violated = violated
            hit = next(row for row in report.verdicts
                       if row["status"] == VIOLATION
                       and row["function"] == "top")
            found_by_test = hit["found_by"] == "test[0]"
        else:
            without_violated = violated
    failures = []
    if not found_by_test:
        failures.append("constrained instance did not find the bug first")
    if with_violated != without_violated:
        failures.append(
            f"violated sets differ: {with_violated} vs {without_violated}")
    if not with_violated:
        failures.append("seeded bug not found at all")
    record(8, "test-case acceleration invariance", not failures,
           "; ".join(failures) if failures else
           "bug found by the constrained instance; violated set unchanged")


# ---------------------------------------------------------------------------
# Criterion 9: determinism


def test_criterion_9_determinism(tmp_path, capsys):
    source = """
        u8 helper(u8 x){ return x * 3; }
        u8 main(u8 n){
            assume(n < 40);
            u8 a[4];
            u8 i = 0;
            while (i < 3) { a[i] = helper(i); i = i + 1; }
            assert(a[n % 4] != 7);
            assert(n != 33);
            return n;
        }
    """
    path = tmp_path / "prog.mc"
    path.write_text(source)
    outputs = []
    dumps = []
    for run in range(2):
        dump_dir = tmp_path / f"smt{run}"
        code = cli_main(["verify", str(path), "--format", "json", "--jobs",
                         "1", "--dump-smt", str(dump_dir)])
        captured = capsys.readouterr()
        outputs.append(captured.out)
        contents = {}
        for name in sorted(os.listdir(dump_dir)):
            contents[name] = (dump_dir / name).read_text()
        dumps.append(contents)
    identical_json = outputs[0] == outputs[1]
    identical_smt = dumps[0] == dumps[1] and len(dumps[0]) > 0
    # cv reports from identical inputs and cache state are also byte-equal
    cv_outputs = []
    for run in range(2):
        old_dir = tmp_path / f"cv{run}" / "old"
        new_dir = tmp_path / f"cv{run}" / "new"
        write_tree(str(old_dir), synthetic_project("return x + 1;"))
        write_tree(str(new_dir), synthetic_project("return x + 2;"))
        cli_main(["cv", str(old_dir), str(new_dir), "--format", "json",
                  "--jobs", "1", "--unwind", "2",
                  "--cache", str(tmp_path / f"cv{run}" / "cache.jsonl")])
        cv_outputs.append(capsys.readouterr().out)
    identical_cv = cv_outputs[0] == cv_outputs[1]
    record(9, "determinism",
           identical_json and identical_smt and identical_cv,
           f"{len(dumps[0])} scripts byte-identical, verify and cv JSON "
           "byte-identical")


# ---------------------------------------------------------------------------
# Supporting invariant (witness module): tree interpretation and SSA
# evaluation agree on >= 500 generated programs.


def test_supporting_differential_500_programs():
    from cvbmc.witness import enumerate_assignments, nondet_space, ssa_eval

    programs = 0
    checked = 0
    problems = []
    for _, source in generate_corpus(900, 500, max_nondet_bits=10):
        program = parse_and_check(source)
        cfg = PipelineConfig(k=3)
        ssa, _ = lower_program(program, "main", cfg)
        space = nondet_space(program, "main", 3)
        programs += 1
        for count, inputs in enumerate(enumerate_assignments(space)):
            if count >= 10:
                break
            tree = interpret(program, "main", inputs, 3)
            run = ssa_eval(ssa, inputs)
            violated = run.first_violation()
            if tree.status == "violated":
                ok = violated is not None and (
                    violated.span.rel_line, violated.span.col,
                    violated.kind) == (tree.span.rel_line, tree.span.col,
                                       tree.kind)
            elif tree.status == "completed":
                ok = violated is None and run.constraints_hold()
                if ok and "return" in ssa.exit_values:
                    ok = run.exit_value(ssa, "return") == tree.return_value
            else:
                ok = True  # out-of-scope executions carry no obligation
            if not ok:
                problems.append(f"{source!r} on {inputs}")
                break
            checked += 1
        if problems:
            break
    print(f"SUPPORTING (differential): {programs} programs, "
          f"{checked} executions compared"
          + (f"; first problem: {problems[0]}" if problems else ""))
    assert not problems and programs >= 500


# ---------------------------------------------------------------------------
# Criterion 10: external-solver conformance (QF_ABV)


def find_real_solver():
    import shutil

    for name, command in (("z3", "z3 -in"), ("cvc5", "cvc5 --lang smt2"),
                          ("bitwuzla", "bitwuzla")):
        if shutil.which(name):
            from cvbmc.solve import SolverConfig

            return SolverConfig(name, command, frozenset({"QF_ABV"}), 30.0)
    return None


def test_criterion_10_external_solver_conformance():
    solver = find_real_solver()
    detail_prefix = ""
    if solver is None:
        # No SMT solver installed: substitute the test-only reference
        # evaluator, which accepts SMT-LIB 2 QF_ABV on stdin. The corpus is
        # reduced because it enumerates in pure Python.
        solver = reference_solver_config()
        detail_prefix = "no system solver; using the reference evaluator; "
    solvers = [solver, BUILTIN_SOLVER]
    failures = []
    # criterion 1, reduced: verify agrees with the oracle via the external
    programs = 0
    violations = 0
    for _, source in generate_corpus(1001, 20, max_nondet_bits=8,
                                     max_stmts=5):
        program = parse_and_check(source)
        cfg = PipelineConfig(k=2, solvers=solvers)
        report = verify_program(program, "main", cfg)
        oracle = exhaustive_oracle(program, "main", 2)
        failures.extend(compare_with_oracle(program, report, oracle))
        programs += 1
        for outcome in report.outcomes:
            # criterion 2: replays still hold with the external solver
            if outcome.status == VIOLATION:
                violations += 1
                if not replay(program, outcome.witness, "main", max_iters=2):
                    failures.append(f"no replay: {outcome.vc.vc_id}")
        if failures:
            break
    used_external = False
    if not failures:
        # criterion 3 through the external solver
        program = parse_and_check("void main(u8 x){ assert(x + 1 > x); }")
        bv_report = verify_program(program, "main", PipelineConfig(
            k=1, encoding="bv", solvers=solvers))
        outcome = bv_report.outcomes[0]
        used_external = outcome.solver == solver.name
        witness = {i["symbol"]: i["value"] for i in outcome.witness.inputs} \
            if outcome.witness else {}
        if outcome.status != VIOLATION or witness.get("x") != 255:
            failures.append(f"external BV wrap check: {outcome.status} {witness}")
        if not used_external:
            failures.append(f"external solver unused: {outcome.solver}")
        int_report = verify_program(program, "main", PipelineConfig(
            k=1, encoding="int", solvers=solvers))
        if int_report.outcomes[0].status != SAFE_UP_TO_K \
                or int_report.outcomes[0].precision != "approximate":
            failures.append("INT side lost its approximate flag")
    record(10, "external-solver conformance", not failures,
           detail_prefix + (
               "; ".join(failures[:3]) if failures else
               f"{programs} programs re-checked, {violations} witnesses "
               f"replayed via {solver.name}"))
