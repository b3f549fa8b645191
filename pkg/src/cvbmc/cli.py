"""Command-line interface.

Subcommands: verify (BMC one entry function), equiv (bounded equivalence of
two function versions), cv (continuous verification over two project
trees), features (dump per-VC feature vectors and chosen strategies),
replay (re-run a counterexample), report (render figures + CSV from a JSON
report).

Exit codes: 0 all safe / equivalent, 10 violation / not equivalent, 20
unknown or incomparable, 2 usage or front-end errors. JSON output is
deterministic for fixed inputs with --jobs 1 and the builtin solver;
timing fields only appear under --timings.
"""

from __future__ import annotations

import argparse
import json
import sys

from .frontend import CheckFailure, SourceError, parse_and_check
from .transform import ASSERTION, ASSUMPTION, TransformError
from .vcgen import (
    ARRAY_BOUNDS, DEFAULT_CHECKS, DIV_BY_ZERO, MOD_BY_ZERO, SHIFT_RANGE,
    SIGNED_OVERFLOW,
)
from .pipeline import (
    EncodingRefused, PipelineConfig, exit_code_for, lower_program,
    plan_strategies, report_to_dict, verify_program,
)
from .solve import NoCapableSolver, extract_features, load_registry
from .equiv import EQUIVALENT, NOT_EQUIVALENT, check_function_equivalence
from .cv import cv_exit_code, run_cv
from .witness import Counterexample, replay

CHECK_FLAGS = {
    "bounds": ARRAY_BOUNDS,
    "div": DIV_BY_ZERO,
    "mod": MOD_BY_ZERO,
    "overflow": SIGNED_OVERFLOW,
    "shift": SHIFT_RANGE,
}


class UsageError(Exception):
    pass


def parse_checks(text: str) -> frozenset:
    if text == "all":
        return DEFAULT_CHECKS
    if text == "none":
        return frozenset()
    checks = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part not in CHECK_FLAGS:
            raise UsageError(
                f"unknown check {part!r}; choose from "
                f"{', '.join(sorted(CHECK_FLAGS))}, all, none")
        checks.add(CHECK_FLAGS[part])
    return frozenset(checks)


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--unwind", type=int, default=4, metavar="K",
                        help="loop unwinding bound (default 4)")
    parser.add_argument("--unwinding-mode", choices=["assume", "assert"],
                        default="assume",
                        help="after the k-th copy: assume(!cond) restricts "
                             "to <= k iterations; assert(!cond) checks that "
                             "k sufficed (default assume)")
    parser.add_argument("--checks", default="all", metavar="LIST",
                        help="comma list of bounds,div,mod,overflow,shift "
                             "or all/none (default all)")
    parser.add_argument("--encoding", choices=["bv", "int", "auto", "portfolio"],
                        default="auto")
    parser.add_argument("--solvers", metavar="FILE", default=None,
                        help="solver registry (INI); CVBMC_SOLVERS overrides")
    parser.add_argument("--timeout", type=float, default=None, metavar="SECS",
                        help="per-VC solver timeout override")
    parser.add_argument("--format", choices=["human", "json"], default="human")
    parser.add_argument("--dump-smt", metavar="DIR", default=None,
                        help="write every emitted SMT-LIB script into DIR")
    parser.add_argument("--jobs", type=int, default=1, metavar="N")
    parser.add_argument("--force-approximate", action="store_true",
                        help="allow the integer encoding where routing "
                             "forbids it (results flagged approximate)")
    parser.add_argument("--timings", action="store_true",
                        help="include wall-clock fields in the JSON report")
    parser.add_argument("--limit-bits", type=int, default=20, metavar="N",
                        help="builtin solver input budget (default 20)")


def build_config(args) -> PipelineConfig:
    if args.unwind < 1:
        raise UsageError("--unwind must be at least 1")
    solvers = load_registry(args.solvers)
    if args.timeout is not None:
        for cfg in solvers:
            cfg.timeout = args.timeout
    return PipelineConfig(
        k=args.unwind,
        mode=ASSUMPTION if args.unwinding_mode == "assume" else ASSERTION,
        checks=parse_checks(args.checks),
        encoding=args.encoding,
        solvers=solvers,
        limit_bits=args.limit_bits,
        jobs=args.jobs,
        force_approximate=args.force_approximate,
        dump_smt=args.dump_smt,
    )


def load_source(path: str):
    try:
        with open(path) as handle:
            return parse_and_check(handle.read())
    except OSError as err:
        raise UsageError(str(err)) from None


def emit(data: dict, fmt: str, human_lines) -> None:
    if fmt == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in human_lines(data):
            print(line)


# ---------------------------------------------------------------------------
# verify


def human_verify(data: dict):
    yield (f"{data['entry']}: {data['status']}  "
           f"(unwind {data['unwind']}, {data['unwinding_mode']})")
    for verdict in data["verdicts"]:
        line = (f"  [{verdict['status']:>12}] {verdict['vc_id']} "
                f"({verdict['encoding']}/{verdict['solver']}"
                f"{', approximate' if verdict['precision'] == 'approximate' else ''})")
        yield line
        witness = verdict.get("witness")
        if witness:
            inputs = ", ".join(f"{i['symbol']}={i['value']}"
                               for i in witness["inputs"])
            yield f"      inputs: {inputs}"
            for entry in witness["trace"]:
                var = f"  {entry['var']} = {entry['value']}" \
                    if entry.get("var") else ""
                yield (f"      {entry['line']}:{entry['col']} "
                       f"{entry['text']}{var}")


def cmd_verify(args) -> int:
    cfg = build_config(args)
    program = load_source(args.file)
    report = verify_program(program, args.entry, cfg)
    data = report_to_dict(report, include_timing=args.timings)
    emit(data, args.format, human_verify)
    if args.plot:
        from .report import write_report_artifacts

        for path in write_report_artifacts(data, args.plot):
            print(f"wrote {path}", file=sys.stderr)
    return exit_code_for(report.worst_status)


# ---------------------------------------------------------------------------
# equiv


def human_equiv(data: dict):
    yield f"{data['function']}: {data['status']} (k={data['k']})"
    witness = data.get("witness")
    if witness:
        inputs = ", ".join(f"{i['symbol']}={i['value']}" for i in witness["inputs"])
        yield f"  distinguishing inputs: {inputs}"


def cmd_equiv(args) -> int:
    cfg = build_config(args)
    old_prog = load_source(args.old)
    new_prog = load_source(args.new)
    verdict = check_function_equivalence(old_prog, new_prog, args.function,
                                         args.function, cfg.k, cfg)
    data = verdict.to_dict()
    data["function"] = args.function
    emit(data, args.format, human_equiv)
    if verdict.status == EQUIVALENT:
        return 0
    if verdict.status == NOT_EQUIVALENT:
        return 10
    return 20


# ---------------------------------------------------------------------------
# cv


def human_cv(data: dict):
    changes = data["changes"]
    yield (f"changes: +{len(changes['added'])} -{len(changes['removed'])} "
           f"~{len(changes['modified_same_signature'])} "
           f"sig~{len(changes['modified_signature_changed'])}")
    for item in data["equivalences"]:
        cached = " (cached)" if item["cached"] else ""
        yield f"  equiv {item['function']}: {item['status']}{cached}"
    stats = data["plan_stats"]
    yield (f"plan: {stats['planned']} planned, {stats['executed']} executed, "
           f"{stats['cache_hits']} cache hits")
    for note in data["notes"]:
        yield f"  note: {note}"
    for verdict in data["verdicts"]:
        cached = " (cached)" if verdict.get("cached") else ""
        yield (f"  [{verdict['status']:>12}] {verdict['function']} "
               f"{verdict['vc_id']} via {verdict.get('found_by', '')}{cached}")
    yield f"overall: {data['status']}"


def cmd_cv(args) -> int:
    cfg = build_config(args)
    report = run_cv(args.old_dir, args.new_dir, args.cache, args.tests, cfg,
                    args.equiv_unwind)
    data = report.to_dict(include_timing=args.timings)
    emit(data, args.format, human_cv)
    if args.plot:
        from .report import write_report_artifacts

        for path in write_report_artifacts(data, args.plot):
            print(f"wrote {path}", file=sys.stderr)
    return cv_exit_code(report)


# ---------------------------------------------------------------------------
# features


def cmd_features(args) -> int:
    cfg = build_config(args)
    program = load_source(args.file)
    _, vcs = lower_program(program, args.entry, cfg)
    rows = []
    for vc in vcs:
        fv = extract_features(vc)
        strategies = plan_strategies(vc, fv, cfg)
        rows.append({
            "vc_id": vc.vc_id,
            "kind": vc.kind,
            "features": fv.to_dict(),
            "strategies": [s.describe() for s in strategies],
        })
    data = {"entry": args.entry, "vcs": rows}

    def human(d):
        for row in d["vcs"]:
            yield row["vc_id"]
            for key, value in sorted(row["features"].items()):
                yield f"    {key} = {value}"
            for s in row["strategies"]:
                yield (f"    -> {s['encoding']}/{s['solver']} "
                       f"[{s['precision']}] {'; '.join(s['rationale'])}")

    emit(data, args.format, human)
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args) -> int:
    program = load_source(args.file)
    try:
        with open(args.cex) as handle:
            cex = Counterexample.from_dict(json.load(handle))
    except (OSError, KeyError, ValueError) as err:
        raise UsageError(f"cannot load counterexample: {err}") from None
    checks = parse_checks(args.checks)
    ok = replay(program, cex, args.entry, max_iters=args.unwind,
                checks=checks, havoc_globals=args.havoc_globals)
    data = {"vc_id": cex.vc_id, "confirmed": ok}
    emit(data, args.format,
         lambda d: [f"{d['vc_id']}: "
                    + ("confirmed" if d["confirmed"] else "NOT reproduced")])
    return 0 if ok else 10


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    from .report import write_report_artifacts

    try:
        with open(args.report) as handle:
            data = json.load(handle)
    except (OSError, ValueError) as err:
        raise UsageError(f"cannot load report: {err}") from None
    for path in write_report_artifacts(data, args.out):
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvbmc",
        description="Bounded model checker for MiniC with continuous "
                    "verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="check one entry function")
    p_verify.add_argument("file")
    p_verify.add_argument("--entry", default="main")
    p_verify.add_argument("--plot", metavar="DIR", default=None,
                          help="render figures + verdicts.csv into DIR")
    add_common_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_equiv = sub.add_parser("equiv", help="bounded equivalence of two versions")
    p_equiv.add_argument("old")
    p_equiv.add_argument("new")
    p_equiv.add_argument("--function", required=True)
    add_common_flags(p_equiv)
    p_equiv.set_defaults(func=cmd_equiv)

    p_cv = sub.add_parser("cv", help="continuous verification over two trees")
    p_cv.add_argument("old_dir")
    p_cv.add_argument("new_dir")
    p_cv.add_argument("--cache", metavar="FILE", default=None)
    p_cv.add_argument("--tests", metavar="FILE", default=None)
    p_cv.add_argument("--equiv-unwind", type=int, default=None, metavar="K",
                      help="equivalence bound (>= --unwind; default equal)")
    p_cv.add_argument("--plot", metavar="DIR", default=None,
                      help="render figures + verdicts.csv into DIR")
    add_common_flags(p_cv)
    p_cv.set_defaults(func=cmd_cv)

    p_feat = sub.add_parser("features",
                            help="dump feature vectors and chosen strategies")
    p_feat.add_argument("file")
    p_feat.add_argument("--entry", default="main")
    add_common_flags(p_feat)
    p_feat.set_defaults(func=cmd_features)

    p_replay = sub.add_parser("replay", help="re-run a counterexample")
    p_replay.add_argument("file")
    p_replay.add_argument("cex")
    p_replay.add_argument("--entry", default="main")
    p_replay.add_argument("--unwind", type=int, default=4)
    p_replay.add_argument("--checks", default="all")
    p_replay.add_argument("--havoc-globals", action="store_true",
                          help="treat globals as inputs (per-function replay)")
    p_replay.add_argument("--format", choices=["human", "json"], default="human")
    p_replay.set_defaults(func=cmd_replay)

    p_report = sub.add_parser("report",
                              help="render figures + CSV from a JSON report")
    p_report.add_argument("report")
    p_report.add_argument("--out", required=True, metavar="DIR")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (SourceError, CheckFailure) as err:
        if isinstance(err, CheckFailure):
            for diag in err.diagnostics:
                print(f"error: {diag}", file=sys.stderr)
        else:
            print(f"error: {err}", file=sys.stderr)
        return 2
    except (EncodingRefused, NoCapableSolver, TransformError, ValueError,
            FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
