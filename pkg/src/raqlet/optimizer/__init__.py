from .dead import eliminate_dead_rules
from .dedup import deduplicate_atoms
from .inline import inline_rules
from .magic import MagicResult, apply_magic_sets, hoist_constants
from .pipeline import DEFAULT_PASSES, PASSES, PassPipeline, parse_pipeline, register_pass, unregister_pass
from .prune import prune_unsatisfiable_joins


def magic_set_transform(prog):
    """Magic-set rewrite returning only the program (unchanged when not applicable)."""
    return apply_magic_sets(prog).program


__all__ = [
    "DEFAULT_PASSES",
    "PASSES",
    "MagicResult",
    "PassPipeline",
    "apply_magic_sets",
    "deduplicate_atoms",
    "eliminate_dead_rules",
    "hoist_constants",
    "inline_rules",
    "magic_set_transform",
    "parse_pipeline",
    "prune_unsatisfiable_joins",
    "register_pass",
    "unregister_pass",
]
