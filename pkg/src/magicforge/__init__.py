"""Magic-templates compilation of logic grammars, filter optimizations and
bottom-up evaluation."""

from .engine import Chart, EvalConfig, ResourceExceeded, answers, evaluate, trace
from .magic import (
    CompileError,
    MagicProgram,
    adorn_and_trim,
    lexical_only_transform,
    magic_transform,
    make_seed,
    prune_lexical_magic,
)
from .optimize import add_indexing, analyze_duplicates, remove_cycles, unfold_magic
from .pipeline import PipelineConfig, compile_program
from .program import (
    AbstractQuery,
    Clause,
    ParseError,
    Program,
    is_lexical,
    parse_atom,
    parse_program,
    print_program,
)
from .terms import Const, Predicate, Struct, Var, predicate_of, subsumes, unify, variant

__version__ = "0.1.0"

__all__ = [
    "AbstractQuery", "Chart", "Clause", "CompileError", "Const", "EvalConfig",
    "MagicProgram", "ParseError", "PipelineConfig", "Predicate", "Program",
    "ResourceExceeded", "Struct", "Var", "add_indexing", "adorn_and_trim",
    "analyze_duplicates", "answers", "compile_program", "evaluate", "is_lexical",
    "lexical_only_transform", "magic_transform", "make_seed", "parse_atom",
    "parse_program", "predicate_of", "print_program", "prune_lexical_magic", "remove_cycles",
    "subsumes", "trace", "unfold_magic", "unify", "variant",
]
