"""Continuous verification: diff two program versions, gate re-verification
on proven equivalence, scope work to the impacted call-graph slice, use test
cases to steer the search, and persist verdicts in a content-keyed cache.

Functions are compared by name, normalized AST hash, and signature. A
modified function proven equivalent up to the bound contributes nothing to
the impact set; everything else (added, signature-changed, non-equivalent,
or unknown) is re-verified together with its transitive callers. Cache keys
cover the function's whole inlined closure plus the bound, encoding,
solver, checks, and unwinding mode, so a callee edit can never resurrect a
stale verdict.
"""

from __future__ import annotations

import glob
import json
import os
import time
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .frontend import (
    CallGraph, call_graph, normalized_hash, parse_and_check, verification_hash,
)
from .lang import Program
from .pipeline import (
    PipelineConfig, SAFE_UP_TO_K, UNKNOWN_STATUS, VIOLATION, VcOutcome,
    constrain_vc, exit_code_for, lower_program, outcome_to_dict, plan_strategies,
    solve_one_vc,
)
from .solve import extract_features
from .equiv import EQUIVALENT, check_function_equivalence


# ---------------------------------------------------------------------------
# Version diffing


@dataclass
class ChangeSet:
    added: list = field(default_factory=list)
    removed: list = field(default_factory=list)
    modified_same_signature: list = field(default_factory=list)
    modified_signature_changed: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "added": self.added,
            "removed": self.removed,
            "modified_same_signature": self.modified_same_signature,
            "modified_signature_changed": self.modified_signature_changed,
        }


def diff_versions(old: Program, new: Program) -> ChangeSet:
    """Classify functions by name presence, normalized-hash equality, and
    signature equality. Unchanged functions appear in no set."""
    old_fns = {f.name: f for f in old.functions}
    new_fns = {f.name: f for f in new.functions}
    cs = ChangeSet()
    for name in sorted(new_fns):
        if name not in old_fns:
            cs.added.append(name)
            continue
        if normalized_hash(old_fns[name]) == normalized_hash(new_fns[name]):
            continue
        if old_fns[name].signature == new_fns[name].signature:
            cs.modified_same_signature.append(name)
        else:
            cs.modified_signature_changed.append(name)
    cs.removed = sorted(name for name in old_fns if name not in new_fns)
    return cs


def compute_impact(cs: ChangeSet, equiv_results: dict, cg: CallGraph) -> set:
    """Functions to re-verify: everything added or signature-changed, every
    modified function not proven equivalent, plus all their transitive
    callers. Proven-equivalent changes contribute nothing."""
    seeds = set(cs.added) | set(cs.modified_signature_changed)
    for name in cs.modified_same_signature:
        if equiv_results.get(name) != EQUIVALENT:
            seeds.add(name)
    impact = set(seeds)
    for name in seeds:
        impact |= cg.transitive_callers(name)
    return impact


# ---------------------------------------------------------------------------
# Test cases


@dataclass
class TestCase:
    function: str
    inputs: list  # of (ordinal, value)


def load_tests(path: str) -> list:
    with open(path) as handle:
        data = json.load(handle)
    tests = []
    for entry in data:
        tests.append(TestCase(entry["function"],
                              [(item["ordinal"], item["value"])
                               for item in entry["inputs"]]))
    return tests


def _test_bindings(test: TestCase, symbols: list) -> tuple:
    """Resolve ordinals to (symbol, value) bindings; returns (bindings,
    error) where error is a diagnostic string for an invalid test."""
    bindings = []
    for ordinal, value in test.inputs:
        if not 0 <= ordinal < len(symbols):
            return [], (f"ordinal {ordinal} out of range for "
                        f"{test.function} ({len(symbols)} nondet symbols)")
        symbol, ty = symbols[ordinal]
        if not ty.min_value <= value <= ty.max_value:
            return [], (f"value {value} out of range for {symbol}: {ty.name}")
        bindings.append((symbol, value))
    return bindings, None


# ---------------------------------------------------------------------------
# Verdict cache (JSON lines, append with compaction on save)


class VerdictCache:
    def __init__(self, path: Optional[str]):
        self.path = path
        self.entries: dict = {}
        self.hits = 0
        if path and os.path.exists(path):
            with open(path) as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    self.entries[self._key_str(entry["key"])] = entry

    @staticmethod
    def _key_str(key: dict) -> str:
        return json.dumps(key, sort_keys=True)

    def lookup(self, key: dict) -> Optional[dict]:
        entry = self.entries.get(self._key_str(key))
        if entry is not None:
            self.hits += 1
        return entry

    def store(self, key: dict, status: str, witness: Optional[dict]) -> None:
        self.entries[self._key_str(key)] = {
            "key": key,
            "status": status,
            "witness": witness,
            "timestamp": time.time(),
            "tool_version": __version__,
        }

    def save(self) -> None:
        if not self.path:
            return
        with open(self.path, "w") as handle:
            for key_str in sorted(self.entries):
                handle.write(json.dumps(self.entries[key_str], sort_keys=True))
                handle.write("\n")


def vc_cache_key(fn_hash: str, vc_id: str, cfg: PipelineConfig,
                 encoding: str, solver: str) -> dict:
    return {
        "kind": "vc",
        "fn_hash": fn_hash,
        "vc_id": vc_id,
        "k": cfg.k,
        "mode": cfg.mode,
        "encoding": encoding,
        "solver": solver,
        "checks": sorted(cfg.checks),
    }


def equiv_cache_key(old_hash: str, new_hash: str, k: int,
                    cfg: PipelineConfig) -> dict:
    return {
        "kind": "equiv",
        "old_hash": old_hash,
        "new_hash": new_hash,
        "k": k,
        "encoding": cfg.encoding,
        "solver": ",".join(s.name for s in cfg.solvers),
    }


# ---------------------------------------------------------------------------
# Planning


@dataclass
class PlanInstance:
    vc: object  # VerificationCondition (possibly constrained)
    kind: str  # "test" | "symbolic"
    test_index: int = -1


@dataclass
class VcPlan:
    vc_id: str
    cache_key: dict
    cached: Optional[dict] = None
    instances: list = field(default_factory=list)


@dataclass
class FunctionPlan:
    function: str
    fn_hash: str
    vc_plans: list = field(default_factory=list)


@dataclass
class ChangePlan:
    functions: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def planned(self) -> int:
        return sum(len(vp.instances) for fp in self.functions
                   for vp in fp.vc_plans)

    @property
    def cache_hits(self) -> int:
        return sum(1 for fp in self.functions for vp in fp.vc_plans
                   if vp.cached is not None)


def _function_cfg(cfg: PipelineConfig) -> PipelineConfig:
    """Per-function verification context: parameters and globals are free."""
    return PipelineConfig(
        k=cfg.k, mode=cfg.mode, checks=cfg.checks, encoding=cfg.encoding,
        solvers=cfg.solvers, limit_bits=cfg.limit_bits, jobs=cfg.jobs,
        havoc_globals=True, force_approximate=cfg.force_approximate,
        dump_smt=cfg.dump_smt)


def make_plan(impact: set, cache: VerdictCache, tests: list,
              cfg: PipelineConfig, new_prog: Program) -> ChangePlan:
    """Per impacted function and VC: a cache hit skips solving entirely,
    otherwise one bug-hunting instance per matching test case (inputs pinned
    by injected assumes) followed by the unconstrained symbolic instance."""
    plan = ChangePlan()
    fn_cfg = _function_cfg(cfg)
    impacted_order = [name for name in new_prog.function_names() if name in impact]
    by_function: dict = {}
    for test in tests:
        by_function.setdefault(test.function, []).append(test)
    for test in tests:
        if test.function not in impact:
            plan.notes.append(
                f"test for {test.function} ignored: function not impacted")
    for name in impacted_order:
        fn_hash = verification_hash(new_prog, name)
        fplan = FunctionPlan(name, fn_hash)
        ssa, vcs = lower_program(new_prog, name, fn_cfg)
        for vc in vcs:
            fv = extract_features(vc)
            strategy = plan_strategies(vc, fv, fn_cfg)[0]
            key = vc_cache_key(fn_hash, vc.vc_id, cfg,
                               strategy.encoding.name, strategy.solver.name)
            vplan = VcPlan(vc.vc_id, key, cache.lookup(key))
            if vplan.cached is None:
                for index, test in enumerate(by_function.get(name, [])):
                    bindings, error = _test_bindings(test, ssa.nondet_symbols)
                    if error:
                        note = f"test for {name} rejected: {error}"
                        if note not in plan.notes:
                            plan.notes.append(note)
                        continue
                    vplan.instances.append(
                        PlanInstance(constrain_vc(vc, bindings), "test", index))
                vplan.instances.append(PlanInstance(vc, "symbolic"))
            fplan.vc_plans.append(vplan)
        plan.functions.append(fplan)
    return plan


# ---------------------------------------------------------------------------
# Execution


@dataclass
class CvReport:
    changes: ChangeSet
    equivalences: list = field(default_factory=list)
    impact: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)  # row dicts
    planned: int = 0
    executed: int = 0
    cache_hits: int = 0
    notes: list = field(default_factory=list)
    wall_time_ms: float = 0.0

    @property
    def worst_status(self) -> str:
        statuses = {row["status"] for row in self.verdicts}
        if VIOLATION in statuses:
            return VIOLATION
        if UNKNOWN_STATUS in statuses:
            return UNKNOWN_STATUS
        return SAFE_UP_TO_K

    def to_dict(self, include_timing: bool = False) -> dict:
        data = {
            "changes": self.changes.to_dict(),
            "equivalences": self.equivalences,
            "impact": self.impact,
            "plan_stats": {"planned": self.planned, "executed": self.executed,
                           "cache_hits": self.cache_hits},
            "verdicts": self.verdicts,
            "status": self.worst_status,
            "notes": self.notes,
        }
        if include_timing:
            data["wall_time_ms"] = round(self.wall_time_ms, 3)
        return data


def run_plan(plan: ChangePlan, cfg: PipelineConfig, cache: VerdictCache,
             new_prog: Program) -> CvReport:
    """Execute plan instances in order with per-VC early exit on the first
    VIOLATION; a VC is safe only when its unconstrained instance is unsat.
    Fresh verdicts are cached; unknowns never are."""
    report = CvReport(ChangeSet())
    report.notes = list(plan.notes)
    fn_cfg = _function_cfg(cfg)
    for fplan in plan.functions:
        for vplan in fplan.vc_plans:
            if vplan.cached is not None:
                row = {"function": fplan.function, "vc_id": vplan.vc_id,
                       "status": vplan.cached["status"], "cached": True,
                       "found_by": "cache"}
                if vplan.cached.get("witness"):
                    row["witness"] = vplan.cached["witness"]
                report.verdicts.append(row)
                continue
            final: Optional[VcOutcome] = None
            found_by = "symbolic"
            for instance in vplan.instances:
                report.executed += 1
                outcome = solve_one_vc(new_prog, fplan.function, instance.vc,
                                       fn_cfg)
                if outcome.status == VIOLATION:
                    final = outcome
                    found_by = ("symbolic" if instance.kind == "symbolic"
                                else f"test[{instance.test_index}]")
                    break
                if instance.kind == "symbolic":
                    final = outcome
                # A safe/unknown constrained instance proves nothing: go on.
            assert final is not None
            final.found_by = found_by
            row = outcome_to_dict(final, include_timing=False)
            row["function"] = fplan.function
            row["cached"] = False
            report.verdicts.append(row)
            if final.status != UNKNOWN_STATUS:
                witness = final.witness.to_dict() if final.witness else None
                cache.store(vplan.cache_key, final.status, witness)
    report.planned = plan.planned
    report.cache_hits = plan.cache_hits
    return report


# ---------------------------------------------------------------------------
# Project loading and the top-level driver


def load_project(directory: str) -> Program:
    """A project is the sorted concatenation of the directory's *.mc files,
    parsed as one compilation unit."""
    paths = sorted(glob.glob(os.path.join(directory, "*.mc")))
    if not paths:
        raise FileNotFoundError(f"no .mc files in {directory}")
    chunks = []
    for path in paths:
        with open(path) as handle:
            chunks.append(handle.read())
    return parse_and_check("\n".join(chunks))


def run_cv(old_dir: str, new_dir: str, cache_path: Optional[str],
           tests_path: Optional[str], cfg: PipelineConfig,
           equiv_k: Optional[int] = None) -> CvReport:
    """Diff, equivalence-gate, scope, plan, and execute one cv run."""
    started = time.monotonic()
    if equiv_k is not None and equiv_k < cfg.k:
        raise ValueError(
            f"equivalence bound {equiv_k} below verification bound {cfg.k} "
            "would make skipping unsound")
    k_eq = equiv_k if equiv_k is not None else cfg.k
    old_prog = load_project(old_dir)
    new_prog = load_project(new_dir)
    cache = VerdictCache(cache_path)
    tests = load_tests(tests_path) if tests_path else []

    cs = diff_versions(old_prog, new_prog)
    equivalences = []
    equiv_results: dict = {}
    for name in cs.modified_same_signature:
        key = equiv_cache_key(verification_hash(old_prog, name),
                              verification_hash(new_prog, name), k_eq, cfg)
        cached = cache.lookup(key)
        if cached is not None:
            status = cached["status"]
            equivalences.append({"function": name, "status": status,
                                 "cached": True})
        else:
            verdict = check_function_equivalence(old_prog, new_prog, name,
                                                 name, k_eq, cfg)
            status = verdict.status
            if status in (EQUIVALENT, "not-equivalent"):
                cache.store(key, status, None)
            equivalences.append({"function": name, "status": status,
                                 "cached": False})
        equiv_results[name] = status

    impact = compute_impact(cs, equiv_results, call_graph(new_prog))
    plan = make_plan(impact, cache, tests, cfg, new_prog)
    report = run_plan(plan, cfg, cache, new_prog)
    report.changes = cs
    report.equivalences = equivalences
    report.impact = [n for n in new_prog.function_names() if n in impact]
    cache.save()
    report.wall_time_ms = (time.monotonic() - started) * 1000.0
    return report


def cv_exit_code(report: CvReport) -> int:
    return exit_code_for(report.worst_status)
