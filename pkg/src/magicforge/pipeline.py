"""Compile-and-optimize pipelines with named presets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .magic import (
    DEFAULT_DEPTH,
    FULL_MAGIC,
    LEXICAL_ONLY,
    MagicProgram,
    adorn_and_trim,
    magic_transform,
    prune_lexical_magic,
)
from .optimize import ALL, OVERLAPPING_ONLY, add_indexing, remove_cycles, unfold_magic
from .program import AbstractQuery, Program
from .terms import Predicate

# Canonical application order; requested steps always run in this order.
OPTIMIZATIONS = ("prune_lexical", "trim", "cycles", "index", "unfold")

PRESETS = {
    "magic": (),
    "v1": ("prune_lexical", "trim"),
    "v1-no-cycle-removal": ("prune_lexical", "trim"),
    "v2": OPTIMIZATIONS,
}


class ConfigError(ValueError):
    """An invalid combination of pipeline options."""


@dataclass(frozen=True)
class PipelineConfig:
    optimizations: tuple = ()
    compile_mode: str = FULL_MAGIC
    keep_structural: bool = False
    depth: int = DEFAULT_DEPTH
    scope: str = OVERLAPPING_ONLY

    def __post_init__(self):
        opts = tuple(self.optimizations)
        unknown = [o for o in opts if o not in OPTIMIZATIONS]
        if unknown:
            raise ConfigError(f"unknown optimization(s): {', '.join(unknown)}")
        object.__setattr__(self, "optimizations", tuple(o for o in OPTIMIZATIONS if o in opts))
        if self.compile_mode not in (FULL_MAGIC, LEXICAL_ONLY):
            raise ConfigError(f"unknown compile mode {self.compile_mode!r}")
        if self.scope not in (OVERLAPPING_ONLY, ALL):
            raise ConfigError(f"unknown indexing scope {self.scope!r}")
        if self.depth < 1:
            raise ConfigError("depth bound must be at least 1")
        if "unfold" in opts and "cycles" not in opts:
            raise ConfigError("unfold requires cycles")
        if self.compile_mode == LEXICAL_ONLY and "prune_lexical" in opts:
            raise ConfigError("prune_lexical makes no sense with lexical_only compilation")

    @classmethod
    def preset(cls, name: str, **overrides) -> "PipelineConfig":
        if name not in PRESETS:
            raise ConfigError(f"unknown pipeline {name!r}")
        return cls(optimizations=PRESETS[name], **overrides)

    @property
    def needs_mode(self) -> bool:
        return "trim" in self.optimizations or "cycles" in self.optimizations


def compile_program(
    p: Program,
    query: Predicate,
    cfg: PipelineConfig = PipelineConfig(),
    mode: Optional[AbstractQuery] = None,
) -> MagicProgram:
    """Magic-compile ``p`` for ``query`` and apply the requested filters."""
    if mode is None:
        mode = p.mode_for(query)
    if cfg.needs_mode and mode is None:
        raise ConfigError(f"no mode given for {query}; trim and cycles need one")
    if mode is not None and mode.predicate != query:
        raise ConfigError(f"mode {mode} does not belong to query predicate {query}")
    opts = cfg.optimizations
    mp = magic_transform(p, query, cfg.compile_mode)
    if "prune_lexical" in opts:
        mp = prune_lexical_magic(mp)
    if "trim" in opts:
        mp = adorn_and_trim(mp, mode, cfg.keep_structural, cfg.depth)
    if "cycles" in opts:
        mp = remove_cycles(mp, mode, cfg.depth)
    if "index" in opts:
        mp = add_indexing(mp, cfg.scope)
    if "unfold" in opts:
        mp = unfold_magic(mp)
    return mp
