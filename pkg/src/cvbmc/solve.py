"""Strategy selection and solving.

extract_features takes one pass over a VC and counts the syntactic
ingredients that decide which theory can represent it faithfully; an
interval pass certifies whether every expression provably stays inside its
declared width (the wrap-free fragment where the integer encoding is
exact). select_strategy applies a fixed rule chain biased toward soundness:
bit-level constructs or overflow claims force bit-vectors, the certified
linear fragment may use integers, everything else defaults to bit-vectors.

Solvers: external SMT processes speaking SMT-LIB 2 over stdin or a file
(first output line sat/unsat/unknown, then the get-value s-expression), and
a builtin enumerative solver that walks the VC's input space with the
witness evaluator, exact by construction. solve_portfolio races strategies;
only precise answers win outright, approximate sats must survive a concrete
replay, and approximate unsats are reported, labeled, only when nothing
precise arrived.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import threading
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Optional

from .lang import (
    ArrayRead, Binary, Cast, Expr, Ite, Lit, Nondet, ScalarType, Unary, Var,
    walk_exprs,
)
from .semantics import sdiv
from .transform import (
    ClaimStep, ConstraintStep, DefineStep, MergeStep, SsaProgram, StoreStep,
    step_exprs,
)
from .vcgen import SIGNED_OVERFLOW, VerificationCondition
from .encode import (
    APPROXIMATE, BV, Encoding, INT, PRECISE, SmtQuery, encode_bv, encode_int,
)
from .witness import (
    BitBudgetExceeded, enumerate_assignments, space_bits, ssa_eval, vc_holds,
)

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"
TIMEOUT = "timeout"
SOLVER_ERROR = "solver-error"
CANCELLED = "cancelled"


class SolveError(Exception):
    pass


class NoCapableSolver(SolveError):
    pass


class AllFailed(SolveError):
    """Every portfolio strategy timed out, errored, or answered unknown."""


# ---------------------------------------------------------------------------
# Feature extraction


@dataclass
class FeatureVector:
    bitwise_ops: int = 0
    shifts: int = 0
    nonconst_mul: int = 0
    nonconst_div_mod: int = 0
    array_accesses: int = 0
    nondet_bits_total: int = 0
    max_width: int = 0
    has_overflow_claims: bool = False
    in_width_certified: bool = False

    @property
    def linear_only(self) -> bool:
        return self.nonconst_mul == 0 and self.nonconst_div_mod == 0

    def to_dict(self) -> dict:
        return {
            "bitwise_ops": self.bitwise_ops,
            "shifts": self.shifts,
            "nonconst_mul": self.nonconst_mul,
            "nonconst_div_mod": self.nonconst_div_mod,
            "array_accesses": self.array_accesses,
            "nondet_bits_total": self.nondet_bits_total,
            "max_width": self.max_width,
            "has_overflow_claims": self.has_overflow_claims,
            "linear_only": self.linear_only,
            "in_width_certified": self.in_width_certified,
        }


def _vc_exprs(vc: VerificationCondition):
    for step in vc.ssa.steps:
        yield step, None
    yield None, vc.property_guard
    yield None, vc.property_expr


def extract_features(vc: VerificationCondition) -> FeatureVector:
    fv = FeatureVector()
    fv.nondet_bits_total = space_bits(vc.ssa.nondet_symbols)
    fv.max_width = max((ty.width for _, ty in vc.ssa.nondet_symbols), default=0)
    if vc.kind == SIGNED_OVERFLOW:
        fv.has_overflow_claims = True

    def scan(e: Expr) -> None:
        for node in walk_exprs(e):
            if node.ty is not None and not node.ty.is_bool:
                fv.max_width = max(fv.max_width, node.ty.width)
            if isinstance(node, Unary) and node.op == "~":
                fv.bitwise_ops += 1
            elif isinstance(node, Binary):
                if node.op in ("&", "|", "^"):
                    fv.bitwise_ops += 1
                elif node.op in ("<<", ">>"):
                    fv.shifts += 1
                elif node.op == "*" and not isinstance(node.lhs, Lit) \
                        and not isinstance(node.rhs, Lit):
                    fv.nonconst_mul += 1
                elif node.op in ("/", "%") and not isinstance(node.rhs, Lit):
                    fv.nonconst_div_mod += 1
            elif isinstance(node, ArrayRead):
                fv.array_accesses += 1

    for step, _ in _vc_exprs(vc):
        if step is None:
            continue
        if isinstance(step, StoreStep):
            fv.array_accesses += 1
        if isinstance(step, ConstraintStep) and step.claim_kind == SIGNED_OVERFLOW:
            fv.has_overflow_claims = True
        for expr in step_exprs(step):
            scan(expr)
    if vc.property_guard is not None:
        scan(vc.property_guard)
    scan(vc.property_expr)
    fv.in_width_certified = _certify_in_width(vc)
    return fv


class _NotCertified(Exception):
    pass


def _hull(a: tuple, b: tuple) -> tuple:
    return (min(a[0], b[0]), max(a[1], b[1]))


class _Intervals:
    """Exact interval arithmetic over the slice; certification fails on any
    expression whose unbounded result can leave its declared width, on any
    bit-level operator, and on division by a possibly-zero divisor."""

    def __init__(self, ssa: SsaProgram):
        self.ssa = ssa
        self.scalars: dict = {}
        self.arrays: dict = {}

    def check(self, iv: tuple, ty: ScalarType) -> tuple:
        if iv[0] < ty.min_value or iv[1] > ty.max_value:
            raise _NotCertified()
        return iv

    def expr(self, e: Expr) -> tuple:
        if isinstance(e, Lit):
            return (e.value, e.value)
        if isinstance(e, Var):
            return self.scalars[(e.name, e.version)]
        if isinstance(e, Nondet):
            return (e.ty.min_value, e.ty.max_value)
        if isinstance(e, Unary):
            iv = self.expr(e.operand)
            if e.op == "!":
                return (0, 1)
            if e.op == "~":
                raise _NotCertified()
            return self.check((-iv[1], -iv[0]), e.ty)
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Cast):
            iv = self.expr(e.operand)
            return self.check(iv, e.target)
        if isinstance(e, ArrayRead):
            self.expr(e.index)
            elem = self.arrays[(e.name, e.version)]
            return _hull(elem, (0, 0))  # masked reads may yield zero
        if isinstance(e, Ite):
            self.expr(e.cond)
            return _hull(self.expr(e.then), self.expr(e.other))
        raise AssertionError(f"unknown expr {e!r}")

    def binary(self, e: Binary) -> tuple:
        op = e.op
        if op in ("&", "|", "^", "<<", ">>"):
            raise _NotCertified()
        a = self.expr(e.lhs)
        b = self.expr(e.rhs)
        if op in ("&&", "||", "==", "!=", "<", "<=", ">", ">="):
            return (0, 1)
        if op == "+":
            return self.check((a[0] + b[0], a[1] + b[1]), e.ty)
        if op == "-":
            return self.check((a[0] - b[1], a[1] - b[0]), e.ty)
        if op == "*":
            products = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
            return self.check((min(products), max(products)), e.ty)
        if op == "/":
            if b[0] <= 0 <= b[1]:
                raise _NotCertified()  # divisor may be zero
            quotients = [sdiv(x, y) for x in a for y in b]
            return self.check((min(quotients), max(quotients)), e.ty)
        if op == "%":
            if b[0] <= 0 <= b[1]:
                raise _NotCertified()
            bound = max(abs(b[0]), abs(b[1])) - 1
            lo = 0 if a[0] >= 0 else -bound
            hi = 0 if a[1] <= 0 else bound
            return self.check((lo, hi), e.ty)
        raise AssertionError(f"unknown operator {op}")

    def run(self, vc: VerificationCondition) -> bool:
        try:
            for name, (_, base) in self.ssa.arrays.items():
                self.arrays[(name, base)] = (0, 0)
            for step in self.ssa.steps:
                if step.guard is not None:
                    self.expr(step.guard)
                if isinstance(step, DefineStep):
                    self.scalars[(step.name, step.version)] = \
                        self.check(self.expr(step.expr), step.expr.ty)
                elif isinstance(step, StoreStep):
                    self.expr(step.index)
                    value = self.expr(step.value)
                    prev = self.arrays[(step.name, step.prev_version)]
                    self.arrays[(step.name, step.version)] = _hull(prev, value)
                elif isinstance(step, MergeStep):
                    self.expr(step.cond)
                    if step.name in self.ssa.arrays:
                        self.arrays[(step.name, step.version)] = _hull(
                            self.arrays[(step.name, step.then_version)],
                            self.arrays[(step.name, step.else_version)])
                    else:
                        self.scalars[(step.name, step.version)] = _hull(
                            self.scalars[(step.name, step.then_version)],
                            self.scalars[(step.name, step.else_version)])
                elif isinstance(step, (ConstraintStep, ClaimStep)):
                    self.expr(step.expr)
            if vc.property_guard is not None:
                self.expr(vc.property_guard)
            self.expr(vc.property_expr)
            return True
        except _NotCertified:
            return False


def _certify_in_width(vc: VerificationCondition) -> bool:
    return _Intervals(vc.ssa).run(vc)


# ---------------------------------------------------------------------------
# Solver configuration and strategy selection

EXTERNAL = "external"
BUILTIN = "builtin-enumerative"

ALL_LOGICS = frozenset({"QF_ABV", "QF_AUFLIA", "QF_AUFNIA"})


@dataclass
class SolverConfig:
    name: str
    command: str = ""  # template; {file} placeholder selects file mode
    logics: frozenset = ALL_LOGICS
    timeout: float = 10.0
    kind: str = EXTERNAL

    @property
    def uses_file(self) -> bool:
        return "{file}" in self.command


BUILTIN_SOLVER = SolverConfig("builtin", "", ALL_LOGICS, 0.0, BUILTIN)


def load_registry(path: Optional[str], default_timeout: float = 10.0) -> list:
    """Parse the solver registry (INI key-value text) and append the builtin
    solver as the final fallback. CVBMC_SOLVERS overrides the path."""
    import configparser

    env = os.environ.get("CVBMC_SOLVERS")
    if env:
        path = env
    configs = []
    if path:
        parser = configparser.ConfigParser()
        with open(path) as handle:
            parser.read_file(handle)
        for section in parser.sections():
            entry = parser[section]
            logics = frozenset(entry.get("logics", " ".join(sorted(ALL_LOGICS))).split())
            configs.append(SolverConfig(
                name=section,
                command=entry.get("command", ""),
                logics=logics,
                timeout=float(entry.get("timeout", default_timeout)),
                kind=entry.get("kind", EXTERNAL),
            ))
    configs.append(BUILTIN_SOLVER)
    return configs


@dataclass
class Strategy:
    encoding: Encoding
    solver: SolverConfig
    rationale: list = field(default_factory=list)

    def describe(self) -> dict:
        return {"encoding": self.encoding.name,
                "logic": self.encoding.logic,
                "precision": self.encoding.precision,
                "solver": self.solver.name,
                "rationale": list(self.rationale)}


def _int_logic_for(fv: FeatureVector) -> str:
    return "QF_AUFLIA" if fv.linear_only else "QF_AUFNIA"


def select_strategy(fv: FeatureVector, available: list) -> Strategy:
    """First-match rule chain: (1) bit-level constructs or overflow claims
    force the bit-vector encoding; (2) the certified linear fragment may use
    integers, precise; (3) everything else defaults to bit-vectors. The
    solver is the first registered one supporting the chosen logic."""
    if not available:
        raise NoCapableSolver("no solvers registered")
    rationale = []
    if fv.bitwise_ops > 0 or fv.shifts > 0 or fv.has_overflow_claims:
        rationale.append("rule-1: bit-level operators or overflow claims need "
                         "bit-accurate reasoning")
        encoding = Encoding(BV, "QF_ABV", PRECISE)
    elif fv.linear_only and fv.in_width_certified:
        rationale.append("rule-2: linear and certified in-width; integer "
                         "encoding is exact here")
        encoding = Encoding(INT, _int_logic_for(fv), PRECISE)
    else:
        rationale.append("rule-3: default to the precise bit-vector encoding")
        encoding = Encoding(BV, "QF_ABV", PRECISE)
    for cfg in available:
        if encoding.logic in cfg.logics:
            return Strategy(encoding, cfg, rationale)
    raise NoCapableSolver(f"no solver supports {encoding.logic}")


# ---------------------------------------------------------------------------
# Results


@dataclass
class SolveResult:
    status: str
    model: Optional[list] = None  # [(plain symbol, value)] when sat
    precision: str = PRECISE
    wall_time: float = 0.0
    solver_name: str = ""
    encoding_name: str = ""
    detail: str = ""


# ---------------------------------------------------------------------------
# External solving


class _ProcessRegistry:
    """Live subprocess handles for one solve run, so a portfolio winner can
    cancel the losers and tests can assert nothing stayed alive."""

    def __init__(self):
        self.lock = threading.Lock()
        self.procs: list = []
        self.cancelled = threading.Event()

    def add(self, proc) -> None:
        with self.lock:
            self.procs.append(proc)
        # A cancel that raced the spawn must still take the process down.
        if self.cancelled.is_set() and proc.poll() is None:
            proc.kill()

    def cancel_all(self) -> None:
        self.cancelled.set()
        with self.lock:
            procs = list(self.procs)
        for proc in procs:
            if proc.poll() is None:
                proc.kill()
        for proc in procs:
            try:
                proc.wait(timeout=5)
            except Exception:
                pass

    def none_alive(self) -> bool:
        with self.lock:
            return all(p.poll() is not None for p in self.procs)


def solve_external(query: SmtQuery, cfg: SolverConfig,
                   registry: Optional[_ProcessRegistry] = None) -> SolveResult:
    """Run one script through an external solver and parse the verdict and,
    when sat, the (get-value ...) model into bit-precise values."""
    start = time.monotonic()
    if registry is not None and registry.cancelled.is_set():
        return SolveResult(CANCELLED, None, query.precision, 0.0, cfg.name,
                           query.encoding.name)
    tmp_path = None
    try:
        if cfg.uses_file:
            fd, tmp_path = tempfile.mkstemp(suffix=".smt2", text=True)
            with os.fdopen(fd, "w") as handle:
                handle.write(query.text)
            argv = [part.replace("{file}", tmp_path)
                    for part in shlex.split(cfg.command)]
            stdin_data = None
        else:
            argv = shlex.split(cfg.command)
            stdin_data = query.text
        try:
            proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.PIPE, text=True)
        except OSError as err:
            return SolveResult(SOLVER_ERROR, None, query.precision,
                               time.monotonic() - start, cfg.name,
                               query.encoding.name, f"spawn failed: {err}")
        if registry is not None:
            registry.add(proc)
        try:
            stdout, stderr = proc.communicate(stdin_data, timeout=cfg.timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
            return SolveResult(TIMEOUT, None, query.precision,
                               time.monotonic() - start, cfg.name,
                               query.encoding.name)
        elapsed = time.monotonic() - start
        if registry is not None and registry.cancelled.is_set():
            return SolveResult(CANCELLED, None, query.precision, elapsed,
                               cfg.name, query.encoding.name)
        lines = [line.strip() for line in stdout.splitlines() if line.strip()]
        if not lines:
            return SolveResult(SOLVER_ERROR, None, query.precision, elapsed,
                               cfg.name, query.encoding.name,
                               f"no output; stderr: {stderr.strip()[:500]}")
        verdict = lines[0]
        if verdict == "unsat":
            return SolveResult(UNSAT, None, query.precision, elapsed,
                               cfg.name, query.encoding.name)
        if verdict == "unknown":
            return SolveResult(UNKNOWN, None, query.precision, elapsed,
                               cfg.name, query.encoding.name)
        if verdict == "sat":
            try:
                model = _parse_model("\n".join(lines[1:]), query)
            except ValueError as err:
                return SolveResult(SOLVER_ERROR, None, query.precision,
                                   elapsed, cfg.name, query.encoding.name,
                                   f"model parse: {err}")
            return SolveResult(SAT, model, query.precision, elapsed,
                               cfg.name, query.encoding.name)
        return SolveResult(SOLVER_ERROR, None, query.precision, elapsed,
                           cfg.name, query.encoding.name,
                           f"unrecognized verdict {verdict!r}; "
                           f"stderr: {stderr.strip()[:500]}")
    finally:
        if tmp_path is not None:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass


# -- model parsing ------------------------------------------------------------


def _tokenize_sexp(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == "|":
            end = text.index("|", i + 1)
            tokens.append(text[i:end + 1])
            i = end + 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in "()":
                i += 1
            tokens.append(text[start:i])
    return tokens


def _parse_sexp(tokens: list, pos: int = 0):
    if tokens[pos] == "(":
        items = []
        pos += 1
        while tokens[pos] != ")":
            item, pos = _parse_sexp(tokens, pos)
            items.append(item)
        return items, pos + 1
    return tokens[pos], pos + 1


def _atom_value(atom) -> int:
    """Decode an SMT value term into an unsigned integer pattern or a plain
    integer (negatives arrive as (- n))."""
    if isinstance(atom, list):
        if len(atom) == 2 and atom[0] == "-":
            return -_atom_value(atom[1])
        if len(atom) == 3 and atom[0] == "_" and str(atom[1]).startswith("bv"):
            return int(str(atom[1])[2:])
        raise ValueError(f"unsupported value term {atom!r}")
    text = str(atom)
    if text.startswith("#b"):
        return int(text[2:], 2)
    if text.startswith("#x"):
        return int(text[2:], 16)
    if text == "true":
        return 1
    if text == "false":
        return 0
    return int(text)


def _parse_model(text: str, query: SmtQuery) -> list:
    """((sym val) (sym val) ...) -> [(plain symbol, canonical value)] in the
    query's declaration order; every value symbol must be covered."""
    from .semantics import from_unsigned

    if not query.value_symbols:
        return []
    tokens = _tokenize_sexp(text)
    if not tokens:
        raise ValueError("empty model")
    sexp, _ = _parse_sexp(tokens)
    assignments = {}
    for pair in sexp:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError(f"malformed model entry {pair!r}")
        assignments[str(pair[0])] = _atom_value(pair[1])
    model = []
    for mangled, plain, ty in query.value_symbols:
        if mangled not in assignments:
            raise ValueError(f"model missing {mangled}")
        raw = assignments[mangled]
        # Bit-vector patterns are non-negative; reinterpret per the type.
        value = from_unsigned(raw, ty) if raw >= 0 else raw
        if not ty.min_value <= value <= ty.max_value:
            raise ValueError(f"value {raw} out of range for {plain}: {ty.name}")
        model.append((plain, value))
    return model


# ---------------------------------------------------------------------------
# Builtin enumerative solving


def _fixed_test_bindings(vc: VerificationCondition) -> dict:
    """Leading test-case constraints of the form symbol == literal pin those
    symbols; enumeration only needs to walk the rest. Assignments violating
    the constraint would be excluded anyway, so this is a pure speedup."""
    from .transform import ORIGIN_TEST_CASE

    fixed = {}
    for step in vc.ssa.steps:
        if not isinstance(step, ConstraintStep) or step.origin != ORIGIN_TEST_CASE:
            break
        e = step.expr
        if isinstance(e, Binary) and e.op == "==" \
                and isinstance(e.lhs, Nondet) and isinstance(e.rhs, Lit):
            fixed[e.lhs.symbol] = e.rhs.value
    return fixed


def solve_enumerative(vc: VerificationCondition, limit_bits: int = 20,
                      semantics: str = "bitvec",
                      cancel: Optional[threading.Event] = None) -> SolveResult:
    """Enumerate all assignments to the VC's nondet symbols in lexicographic
    order and evaluate with the witness evaluator; the first falsifying
    assignment is the model. Precise by construction under bitvec semantics;
    unbounded semantics mirror the integer encoding instead."""
    space = vc.ssa.nondet_symbols
    fixed = _fixed_test_bindings(vc)
    free_space = [(s, t) for s, t in space if s not in fixed]
    bits = space_bits(free_space)
    if bits > limit_bits:
        raise BitBudgetExceeded(
            f"{bits} nondet bits exceed the {limit_bits}-bit budget")
    start = time.monotonic()
    precision = PRECISE if semantics == "bitvec" else APPROXIMATE
    checked = 0
    for free in enumerate_assignments(free_space):
        if cancel is not None and checked % 256 == 0 and cancel.is_set():
            return SolveResult(CANCELLED, None, precision,
                               time.monotonic() - start, "builtin", "")
        checked += 1
        inputs = dict(fixed)
        inputs.update(free)
        holds = vc_holds(vc, inputs, semantics)
        if holds is False:
            model = [(sym, inputs[sym]) for sym, _ in space]
            return SolveResult(SAT, model, precision,
                               time.monotonic() - start, "builtin", "")
    return SolveResult(UNSAT, None, precision, time.monotonic() - start,
                       "builtin", "")


def solve_program_enumerative(ssa: SsaProgram, vcs: list,
                              limit_bits: int = 20,
                              semantics: str = "bitvec") -> dict:
    """Batched enumeration: one pass over the whole program's input space
    decides every VC at once (first-cause semantics), with results identical
    to per-VC solve_enumerative. Returns {vc_id: SolveResult}."""
    bits = space_bits(ssa.nondet_symbols)
    if bits > limit_bits:
        raise BitBudgetExceeded(
            f"{bits} nondet bits exceed the {limit_bits}-bit budget")
    start = time.monotonic()
    precision = PRECISE if semantics == "bitvec" else APPROXIMATE
    by_id = {vc.vc_id: vc for vc in vcs}
    results: dict = {}
    for inputs in enumerate_assignments(ssa.nondet_symbols):
        if len(results) == len(vcs):
            break
        run = ssa_eval(ssa, inputs, semantics)
        violated = run.first_violation()
        if violated is None or violated.vc_id in results:
            continue
        vc = by_id.get(violated.vc_id)
        if vc is None:
            continue
        model = [(sym, inputs[sym]) for sym, _ in vc.ssa.nondet_symbols]
        results[violated.vc_id] = SolveResult(
            SAT, model, precision, 0.0, "builtin", "")
    elapsed = time.monotonic() - start
    for vc in vcs:
        if vc.vc_id not in results:
            results[vc.vc_id] = SolveResult(UNSAT, None, precision, elapsed,
                                            "builtin", "")
    return results


# ---------------------------------------------------------------------------
# Running a strategy and racing a portfolio


def build_query(vc: VerificationCondition, encoding_name: str,
                certified: bool = False) -> SmtQuery:
    if encoding_name == BV:
        return encode_bv(vc)
    return encode_int(vc, certified)


def run_strategy(vc: VerificationCondition, strategy: Strategy,
                 limit_bits: int = 20,
                 registry: Optional[_ProcessRegistry] = None,
                 cancel: Optional[threading.Event] = None) -> SolveResult:
    """Solve one VC under one strategy. The builtin solver interprets the
    encoding's semantics directly (unbounded evaluation for INT), external
    solvers get the corresponding SMT-LIB script."""
    certified = strategy.encoding.precision == PRECISE
    if strategy.solver.kind == BUILTIN:
        semantics = "bitvec" if strategy.encoding.name == BV else "unbounded"
        try:
            result = solve_enumerative(vc, limit_bits, semantics, cancel)
        except BitBudgetExceeded as err:
            return SolveResult(UNKNOWN, None, strategy.encoding.precision,
                               0.0, "builtin", strategy.encoding.name, str(err))
        result.precision = strategy.encoding.precision
        result.encoding_name = strategy.encoding.name
        return result
    query = build_query(vc, strategy.encoding.name, certified)
    result = solve_external(query, strategy.solver, registry)
    result.precision = strategy.encoding.precision
    result.encoding_name = strategy.encoding.name
    return result


def _validate_approximate_sat(vc: VerificationCondition,
                              result: SolveResult) -> Optional[SolveResult]:
    """An approximate encoding's model is only accepted if it concretely
    falsifies the VC under exact bit-level semantics."""
    inputs = dict(result.model)
    for symbol, _ in vc.ssa.nondet_symbols:
        inputs.setdefault(symbol, 0)
    if vc_holds(vc, inputs) is False:
        validated = SolveResult(SAT, result.model, PRECISE, result.wall_time,
                                result.solver_name, result.encoding_name,
                                "approximate model validated by replay")
        return validated
    return None


def solve_portfolio(vc: VerificationCondition, strategies: list,
                    limit_bits: int = 20, jobs: int = 0) -> SolveResult:
    """Race strategies; first precise sat/unsat wins and cancels the rest.
    Approximate sats must validate concretely; an approximate unsat is
    reported, still labeled approximate, only when nothing precise answered.
    Raises AllFailed when every strategy fails."""
    if not strategies:
        raise AllFailed("empty portfolio")
    registry = _ProcessRegistry()
    held_approx: list = []
    failures: list = []

    def finish(result: SolveResult) -> SolveResult:
        registry.cancel_all()
        return result

    def consider(result: SolveResult, strategy: Strategy) -> Optional[SolveResult]:
        if result.status in (TIMEOUT, SOLVER_ERROR, UNKNOWN, CANCELLED):
            failures.append(result)
            return None
        if result.precision == PRECISE:
            return result
        if result.status == SAT:
            validated = _validate_approximate_sat(vc, result)
            if validated is not None:
                return validated
            failures.append(SolveResult(
                SOLVER_ERROR, None, APPROXIMATE, result.wall_time,
                result.solver_name, result.encoding_name,
                "approximate model failed concrete validation"))
            return None
        held_approx.append(result)
        return None

    if jobs == 1 or len(strategies) == 1:
        for strategy in strategies:
            outcome = consider(run_strategy(vc, strategy, limit_bits, registry),
                               strategy)
            if outcome is not None:
                return finish(outcome)
    else:
        workers = jobs if jobs > 0 else len(strategies)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_strategy, vc, strategy, limit_bits, registry,
                            registry.cancelled): strategy
                for strategy in strategies}
            pending = set(futures)
            winner = None
            while pending and winner is None:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    outcome = consider(future.result(), futures[future])
                    if outcome is not None and winner is None:
                        winner = outcome
                        registry.cancel_all()
            if winner is not None:
                for future in pending:
                    future.result()
                return winner
    registry.cancel_all()
    if held_approx:
        return held_approx[0]
    raise AllFailed("; ".join(
        f"{f.solver_name}:{f.status}" + (f" ({f.detail})" if f.detail else "")
        for f in failures) or "no strategies ran")
