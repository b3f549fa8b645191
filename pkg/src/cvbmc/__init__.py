"""cvbmc: a bounded model checker for MiniC with bit-vector and integer SMT
encodings, syntactic strategy selection, equivalence checking, and a
continuous-verification driver."""

__version__ = "0.1.0"

from .frontend import (  # noqa: F401
    CallGraph, CheckFailure, LexError, ParseError, SourceError,
    TypeCheckError, call_graph, normalized_hash, parse_and_check,
)
from .transform import (  # noqa: F401
    ASSERTION, ASSUMPTION, InternalLoweringError, NonPositiveBound,
    SsaProgram, UnknownEntry, inline_calls, to_ssa, unroll_loops,
)
from .vcgen import (  # noqa: F401
    DEFAULT_CHECKS, PROPERTY_KINDS, VerificationCondition, generate_vcs,
    instrument_properties,
)
from .witness import (  # noqa: F401
    BitBudgetExceeded, Counterexample, ExecOutcome, InputArityMismatch,
    ReplayMismatch, exhaustive_oracle, extract_counterexample, interpret,
    replay, ssa_eval,
)
from .encode import (  # noqa: F401
    Encoding, SmtQuery, UnsupportedOperator, encode_bv, encode_int,
)
from .solve import (  # noqa: F401
    AllFailed, FeatureVector, NoCapableSolver, SolveResult, SolverConfig,
    Strategy, extract_features, select_strategy, solve_enumerative,
    solve_external, solve_portfolio,
)
from .pipeline import (  # noqa: F401
    PipelineConfig, VerifyReport, verify_program, verify_source,
)
from .equiv import (  # noqa: F401
    EquivVerdict, Miter, SignatureMismatch, build_miter, check_equivalence,
)
from .cv import (  # noqa: F401
    ChangeSet, CvReport, TestCase, compute_impact, diff_versions, run_cv,
)
