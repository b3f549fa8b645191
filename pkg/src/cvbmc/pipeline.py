"""The verify pipeline: lower, instrument, route, solve, replay.

verify_program drives one entry function through inline -> unroll -> SSA ->
instrumentation -> VC generation, picks an encoding/solver strategy per VC
(auto-routing, a forced encoding, or a portfolio race), solves, and converts
sat models into replayed counterexamples on the original program. Every
VIOLATION reported by a precise strategy has survived a concrete replay.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Optional

from .frontend import parse_and_check
from .lang import Binary, BOOL, Lit, Nondet, NO_SPAN, Program
from .transform import (
    ASSUMPTION, ConstraintStep, ORIGIN_TEST_CASE, SsaProgram, UnknownEntry,
    inline_calls, nondet_base_names, to_ssa, unroll_loops,
)
from .vcgen import (
    DEFAULT_CHECKS, VerificationCondition, generate_vcs, instrument_properties,
)
from .encode import (
    APPROXIMATE, BV, Encoding, INT, PRECISE, UnsupportedOperator, encode_bv,
    encode_int,
)
from .solve import (
    AllFailed, BUILTIN, BUILTIN_SOLVER, FeatureVector, NoCapableSolver, SAT,
    SolveResult, Strategy, UNSAT, extract_features, select_strategy,
    solve_portfolio, solve_program_enumerative,
)
from .witness import (
    BitBudgetExceeded, Counterexample, ReplayMismatch, extract_counterexample,
)

SAFE_UP_TO_K = "SAFE-up-to-k"
VIOLATION = "VIOLATION"
UNKNOWN_STATUS = "UNKNOWN"


class EncodingRefused(Exception):
    """A forced integer encoding that the routing invariant forbids."""


@dataclass
class PipelineConfig:
    k: int = 4
    mode: str = ASSUMPTION
    checks: frozenset = DEFAULT_CHECKS
    encoding: str = "auto"  # bv | int | auto | portfolio
    solvers: list = field(default_factory=lambda: [BUILTIN_SOLVER])
    limit_bits: int = 20
    jobs: int = 1
    havoc_globals: bool = False
    force_approximate: bool = False
    dump_smt: Optional[str] = None


@dataclass
class VcOutcome:
    vc: VerificationCondition
    status: str
    witness: Optional[Counterexample] = None
    strategy: Optional[dict] = None
    features: Optional[dict] = None
    precision: str = PRECISE
    solver: str = ""
    wall_time: float = 0.0
    found_by: str = "symbolic"
    detail: str = ""


@dataclass
class VerifyReport:
    entry: str
    k: int
    mode: str
    outcomes: list = field(default_factory=list)

    @property
    def worst_status(self) -> str:
        statuses = {o.status for o in self.outcomes}
        if VIOLATION in statuses:
            return VIOLATION
        if UNKNOWN_STATUS in statuses:
            return UNKNOWN_STATUS
        return SAFE_UP_TO_K


def lower_program(program: Program, entry: str, cfg: PipelineConfig):
    """inline -> unroll -> SSA -> instrument -> VCs for one entry."""
    if not any(f.name == entry for f in program.functions):
        raise UnknownEntry(
            f"no function named {entry!r}; choose one of "
            + ", ".join(program.function_names()))
    bases = nondet_base_names(program, entry, cfg.havoc_globals)
    inlined = inline_calls(program, entry)
    slim = Program([inlined.function(entry)], program.globals)
    unrolled = unroll_loops(slim, cfg.k, cfg.mode)
    ssa = to_ssa(unrolled, entry, cfg.k, cfg.havoc_globals, bases)
    instrument_properties(ssa, cfg.checks)
    return ssa, generate_vcs(ssa)


def plan_strategies(vc: VerificationCondition, fv: FeatureVector,
                    cfg: PipelineConfig) -> list:
    """Strategies to run for one VC under the configured encoding mode."""
    if cfg.encoding == "auto":
        return [select_strategy(fv, cfg.solvers)]
    if cfg.encoding == "bv":
        return [_forced_strategy(Encoding(BV, "QF_ABV", PRECISE), cfg)]
    if cfg.encoding == "int":
        return [_int_strategy(fv, cfg)]
    if cfg.encoding == "portfolio":
        encodings = [Encoding(BV, "QF_ABV", PRECISE)]
        if fv.bitwise_ops == 0 and fv.shifts == 0 and not fv.has_overflow_claims:
            certified = fv.linear_only and fv.in_width_certified
            logic = "QF_AUFLIA" if fv.linear_only else "QF_AUFNIA"
            encodings.append(Encoding(INT, logic,
                                      PRECISE if certified else APPROXIMATE))
        strategies = []
        for encoding in encodings:
            for solver in cfg.solvers:
                if encoding.logic in solver.logics:
                    strategies.append(Strategy(
                        encoding, solver,
                        [f"portfolio: {encoding.name} on {solver.name}"]))
        if not strategies:
            raise NoCapableSolver("no solver supports any portfolio encoding")
        return strategies
    raise ValueError(f"unknown encoding mode {cfg.encoding!r}")


def _int_strategy(fv: FeatureVector, cfg: PipelineConfig,
                  forced: bool = True) -> Strategy:
    if fv.bitwise_ops > 0 or fv.shifts > 0:
        raise EncodingRefused(
            "bitwise/shift operators cannot be encoded in the integer theory")
    if fv.has_overflow_claims and forced and not cfg.force_approximate:
        raise EncodingRefused(
            "integer encoding refused for overflow claims; pass "
            "--force-approximate to override")
    certified = fv.linear_only and fv.in_width_certified
    logic = "QF_AUFLIA" if fv.linear_only else "QF_AUFNIA"
    precision = PRECISE if certified else APPROXIMATE
    encoding = Encoding(INT, logic, precision)
    return _forced_strategy(encoding, cfg,
                            rationale=["forced integer encoding"
                                       + ("" if certified else " (approximate)")])


def _forced_strategy(encoding: Encoding, cfg: PipelineConfig,
                     rationale: Optional[list] = None) -> Strategy:
    for solver in cfg.solvers:
        if encoding.logic in solver.logics:
            return Strategy(encoding, solver,
                            rationale or [f"forced {encoding.name} encoding"])
    raise NoCapableSolver(f"no solver supports {encoding.logic}")


def _dump_queries(vc: VerificationCondition, strategies: list,
                  dump_dir: str) -> None:
    os.makedirs(dump_dir, exist_ok=True)
    safe_id = re.sub(r"[^A-Za-z0-9_.-]", "_", vc.vc_id)
    for strategy in strategies:
        name = strategy.encoding.name
        try:
            query = encode_bv(vc) if name == BV else encode_int(
                vc, strategy.encoding.precision == PRECISE)
        except UnsupportedOperator:
            continue
        path = os.path.join(dump_dir, f"{safe_id}.{name}.smt2")
        with open(path, "w") as handle:
            handle.write(query.text)


def _status_of(result: SolveResult) -> str:
    if result.status == SAT:
        return VIOLATION
    if result.status == UNSAT:
        return SAFE_UP_TO_K
    return UNKNOWN_STATUS


def solve_one_vc(program: Program, entry: str, vc: VerificationCondition,
                 cfg: PipelineConfig,
                 precomputed: Optional[SolveResult] = None) -> VcOutcome:
    """Route and solve one VC, replaying any sat model into a witness."""
    fv = extract_features(vc)
    strategies = plan_strategies(vc, fv, cfg)
    if cfg.dump_smt:
        _dump_queries(vc, strategies, cfg.dump_smt)
    outcome = VcOutcome(vc, UNKNOWN_STATUS, features=fv.to_dict(),
                        strategy=strategies[0].describe())
    if precomputed is not None:
        result = precomputed
    else:
        try:
            result = solve_portfolio(vc, strategies, cfg.limit_bits, cfg.jobs)
        except AllFailed as err:
            outcome.detail = str(err)
            return outcome
    outcome.status = _status_of(result)
    outcome.precision = result.precision
    outcome.solver = result.solver_name
    outcome.wall_time = result.wall_time
    outcome.detail = result.detail
    if result.status == SAT:
        try:
            outcome.witness = extract_counterexample(
                program, entry, vc, result.model, max_iters=cfg.k,
                checks=cfg.checks, havoc_globals=cfg.havoc_globals)
        except ReplayMismatch as err:
            # A precise strategy must replay; anything else is a bug signal.
            outcome.status = UNKNOWN_STATUS
            outcome.detail = f"replay mismatch: {err}"
    return outcome


def verify_program(program: Program, entry: str,
                   cfg: PipelineConfig) -> VerifyReport:
    """Check every claim of the entry at bound k and report per-VC verdicts.

    When every VC routes to the builtin solver under bit-vector semantics,
    one batched enumeration over the program's inputs decides all VCs with
    results identical to per-VC solving.
    """
    ssa, vcs = lower_program(program, entry, cfg)
    report = VerifyReport(entry, cfg.k, cfg.mode)
    if not vcs:
        return report
    batched: dict = {}
    if cfg.encoding in ("auto", "bv"):
        plans = {}
        all_builtin_bv = True
        for vc in vcs:
            fv = extract_features(vc)
            try:
                strategies = plan_strategies(vc, fv, cfg)
            except (EncodingRefused, NoCapableSolver):
                all_builtin_bv = False
                break
            plans[vc.vc_id] = strategies
            if not (len(strategies) == 1
                    and strategies[0].solver.kind == BUILTIN
                    and strategies[0].encoding.name == BV):
                all_builtin_bv = False
                break
        if all_builtin_bv:
            try:
                batched = solve_program_enumerative(ssa, vcs, cfg.limit_bits)
            except BitBudgetExceeded:
                batched = {}
    for vc in vcs:
        report.outcomes.append(
            solve_one_vc(program, entry, vc, cfg, batched.get(vc.vc_id)))
    return report


def verify_source(source: str, entry: str, cfg: PipelineConfig) -> VerifyReport:
    return verify_program(parse_and_check(source), entry, cfg)


# ---------------------------------------------------------------------------
# Test-case constrained instances (used by the cv driver)


def constrain_vc(vc: VerificationCondition, bindings: list) -> VerificationCondition:
    """A copy of the VC whose slice starts with assume(symbol == value) for
    each binding: a strictly smaller search space for bug hunting."""
    types = dict(vc.ssa.nondet_symbols)
    steps = []
    for symbol, value in bindings:
        ty = types[symbol]
        ref = Nondet(NO_SPAN, ty, -1, symbol, (), symbol)
        eq = Binary(NO_SPAN, BOOL, "==", ref, Lit(NO_SPAN, ty, value))
        steps.append(ConstraintStep(None, eq, ORIGIN_TEST_CASE))
    sub = SsaProgram(
        entry=vc.ssa.entry,
        steps=steps + list(vc.ssa.steps),
        nondet_symbols=list(vc.ssa.nondet_symbols),
        bound_k=vc.ssa.bound_k,
        arrays=vc.ssa.arrays,
        exit_values={},
    )
    return VerificationCondition(vc.vc_id, sub, vc.property_expr,
                                 vc.property_guard, vc.kind, vc.span)


# ---------------------------------------------------------------------------
# JSON rendering


def outcome_to_dict(outcome: VcOutcome, include_timing: bool) -> dict:
    data = {
        "vc_id": outcome.vc.vc_id,
        "kind": outcome.vc.kind,
        "line": outcome.vc.span.line,
        "col": outcome.vc.span.col,
        "status": outcome.status,
        "precision": outcome.precision,
        "solver": outcome.solver,
        "encoding": (outcome.strategy or {}).get("encoding", ""),
        "found_by": outcome.found_by,
    }
    if outcome.witness is not None:
        data["witness"] = outcome.witness.to_dict()
    if outcome.detail:
        data["detail"] = outcome.detail
    if include_timing:
        data["wall_time_ms"] = round(outcome.wall_time * 1000.0, 3)
    return data


def report_to_dict(report: VerifyReport, include_timing: bool = False) -> dict:
    return {
        "entry": report.entry,
        "unwind": report.k,
        "unwinding_mode": report.mode,
        "status": report.worst_status,
        "verdicts": [outcome_to_dict(o, include_timing) for o in report.outcomes],
    }


def exit_code_for(status: str) -> int:
    if status == VIOLATION:
        return 10
    if status == UNKNOWN_STATUS:
        return 20
    return 0
