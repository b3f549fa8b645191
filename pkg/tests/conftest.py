import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cvbmc.frontend import parse_and_check
from cvbmc.pipeline import PipelineConfig, lower_program
from cvbmc.solve import SolverConfig

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
CONFORMANT_SOLVER = os.path.join(TESTS_DIR, "conformant_solver.py")
FAKE_SOLVER = os.path.join(TESTS_DIR, "fake_solver.py")


def fake_solver_config(mode: str, timeout: float = 10.0, **extra) -> SolverConfig:
    args = " ".join(str(a) for a in extra.get("args", ()))
    return SolverConfig(
        name=f"fake-{mode}",
        command=f"{sys.executable} {FAKE_SOLVER} {mode} {args}".strip(),
        timeout=timeout,
    )


def reference_solver_config(timeout: float = 60.0) -> SolverConfig:
    return SolverConfig(
        name="refbv",
        command=f"{sys.executable} {CONFORMANT_SOLVER}",
        logics=frozenset({"QF_ABV"}),
        timeout=timeout,
    )


@pytest.fixture
def compile_vcs():
    """source -> (program, ssa, vcs) through the standard pipeline."""

    def build(source: str, entry: str = "main", k: int = 4,
              mode: str = "assumption", **cfg_kwargs):
        program = parse_and_check(source)
        cfg = PipelineConfig(k=k, mode=mode, **cfg_kwargs)
        ssa, vcs = lower_program(program, entry, cfg)
        return program, ssa, vcs

    return build
