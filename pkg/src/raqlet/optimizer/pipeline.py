"""Pass registry and configurable pipelines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..diagnostics import Diagnostic
from ..dlir.ir import Program
from ..schema import DlSchema
from .dead import eliminate_dead_rules
from .dedup import deduplicate_atoms
from .inline import inline_rules
from .magic import apply_magic_sets
from .prune import prune_unsatisfiable_joins

PassFn = Callable[[Program, "DlSchema | None"], "tuple[Program, list[Diagnostic]]"]

PASSES: dict[str, PassFn] = {}

DEFAULT_PASSES = ("inline", "dedup-atoms", "prune-unsat", "dead-rule-elim")
MAX_ROUNDS = 50


def register_pass(name: str, fn: PassFn) -> None:
    PASSES[name] = fn


def unregister_pass(name: str) -> None:
    PASSES.pop(name, None)


def _simple(fn: Callable[[Program], Program]) -> PassFn:
    return lambda prog, d: (fn(prog), [])


def _magic(prog: Program, d: DlSchema | None):
    res = apply_magic_sets(prog)
    return res.program, list(res.diagnostics)


register_pass("inline", _simple(inline_rules))
register_pass("dead-rule-elim", _simple(eliminate_dead_rules))
register_pass("dedup-atoms", _simple(deduplicate_atoms))
register_pass("prune-unsat", lambda prog, d: (prune_unsatisfiable_joins(prog, d), []))
register_pass("magic-sets", _magic)


@dataclass(frozen=True)
class PassPipeline:
    """Passes applied in order.

    With ``fixpoint`` set, each run of passes between two ``magic-sets``
    entries repeats until the program stops changing; ``magic-sets`` itself
    runs once, since adorning an adorned program again is pointless.
    """

    passes: tuple[str, ...]
    fixpoint: bool = True

    def __post_init__(self):
        unknown = [p for p in self.passes if p not in PASSES]
        if unknown:
            raise ValueError(f"unknown pass(es): {', '.join(unknown)}; known: {', '.join(sorted(PASSES))}")

    def run(self, prog: Program, d: DlSchema | None = None) -> tuple[Program, list[Diagnostic]]:
        diags: list[Diagnostic] = []
        segment: list[str] = []
        for name in list(self.passes) + [None]:
            if name is None or name == "magic-sets":
                prog = self._segment(segment, prog, d, diags)
                segment = []
                if name is not None:
                    prog, ds = PASSES[name](prog, d)
                    diags.extend(ds)
            else:
                segment.append(name)
        return prog, diags

    def _segment(self, names: list[str], prog: Program, d, diags: list[Diagnostic]) -> Program:
        if not names:
            return prog
        for _ in range(MAX_ROUNDS if self.fixpoint else 1):
            before = prog
            for name in names:
                prog, ds = PASSES[name](prog, d)
                diags.extend(ds)
            if prog == before:
                break
        return prog


def parse_pipeline(spec: str) -> PassPipeline:
    """``none``, ``full`` or a comma-separated pass list."""
    spec = spec.strip()
    if spec == "none":
        return PassPipeline(())
    if spec == "default":
        return PassPipeline(DEFAULT_PASSES)
    if spec == "full":
        return PassPipeline(DEFAULT_PASSES + ("magic-sets",))
    return PassPipeline(tuple(p.strip() for p in spec.split(",") if p.strip()))
