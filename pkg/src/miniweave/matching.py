"""Pointcut matching, advice ordering, and the match table.

Static matching decides execution/call/get/set and within against the
shadow; this/target/args/cflow tests are collected into a residue that the
interpreter evaluates at dispatch time. When a call/get/set shadow's
receiver class could not be resolved statically, a concrete class segment
in the pattern also becomes a residue (a runtime target-class test).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

from .aspects import (
    AdviceDecl,
    AspectDecl,
    PcAnd,
    PcArgs,
    PcCall,
    PcCflow,
    PcExecution,
    PcGet,
    PcNot,
    PcOr,
    PcSet,
    PcTarget,
    PcThis,
    PcWithin,
)
from .joinpoints import Shadow, ShadowKind, ShadowTable
from .values import class_name_of, value_eq


class _True:
    """The empty residue: statically matched, nothing left to test."""

    def __repr__(self) -> str:
        return "TRUE"


TRUE = _True()

_KIND_FOR_PRIM = {
    PcExecution: ShadowKind.METHOD_EXECUTION,
    PcCall: ShadowKind.METHOD_CALL,
    PcGet: ShadowKind.FIELD_GET,
    PcSet: ShadowKind.FIELD_SET,
}


def match(pc, shadow: Shadow):
    """Match a pointcut against a shadow: None for no, a residue for yes.

    TRUE is the empty residue. `not` over a residue-bearing subtree yields
    a negated residue; combinators fold the three-valued outcomes.
    """
    cls = type(pc)
    if cls in _KIND_FOR_PRIM:
        if shadow.kind is not _KIND_FOR_PRIM[cls]:
            return None
        if not pc.pattern.member_matches(shadow.member):
            return None
        if pc.pattern.cls == "*":
            return TRUE
        if shadow.cls is None:
            # receiver class unknown statically: test the runtime target
            return PcTarget(pc.pattern.cls)
        return TRUE if pc.pattern.cls == shadow.cls else None
    if cls is PcWithin:
        return TRUE if shadow.within_cls == pc.type_name else None
    if cls in (PcThis, PcTarget, PcArgs, PcCflow):
        return pc
    if cls is PcNot:
        inner = match(pc.inner, shadow)
        if inner is None:
            return TRUE
        if inner is TRUE:
            return None
        return PcNot(inner)
    if cls is PcAnd:
        residues = []
        for part in pc.parts:
            r = match(part, shadow)
            if r is None:
                return None
            if r is not TRUE:
                residues.append(r)
        if not residues:
            return TRUE
        return residues[0] if len(residues) == 1 else PcAnd(tuple(residues))
    if cls is PcOr:
        residues = []
        for part in pc.parts:
            r = match(part, shadow)
            if r is TRUE:
                return TRUE
            if r is not None:
                residues.append(r)
        if not residues:
            return None
        return residues[0] if len(residues) == 1 else PcOr(tuple(residues))
    raise TypeError(f"not a pointcut node: {pc!r}")


def render_residue(residue) -> str:
    return "" if residue is TRUE else str(residue)


# ---------------------------------------------------------------------------
# Advice ordering
# ---------------------------------------------------------------------------


def advice_sort_key(advice: AdviceDecl, precedence: list[str]):
    """Total order on advice: @order value (missing sorts last), then the
    global precedence declaration (listed aspects before unlisted), then
    aspect name, then declaration index.

    Lexicographic keying keeps the order transitive even when @order and
    aspect-level rules disagree pairwise.
    """
    order = advice.order if advice.order is not None else inf
    try:
        pos = precedence.index(advice.aspect_name)
        listed = 0
    except ValueError:
        pos = 0
        listed = 1
    return (order, listed, pos, advice.aspect_name, advice.index)


def compare_advice(a: AdviceDecl, b: AdviceDecl, precedence: list[str]) -> int:
    """-1 when a precedes b, +1 when it follows. Total and antisymmetric."""
    ka = advice_sort_key(a, precedence)
    kb = advice_sort_key(b, precedence)
    if ka == kb:
        return 0  # only for a == b: (aspect, index) is unique
    return -1 if ka < kb else 1


# ---------------------------------------------------------------------------
# Match table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchEntry:
    advice: AdviceDecl
    residue: object


@dataclass
class MatchTable:
    """Map shadow id -> advice entries in precedence order (highest first)."""

    entries: dict[int, tuple[MatchEntry, ...]]
    shadows: dict[int, Shadow]
    precedence: list[str]

    def at(self, sid: int) -> tuple[MatchEntry, ...]:
        return self.entries.get(sid, ())

    def pairs(self):
        for sid in self.entries:
            for entry in self.entries[sid]:
                yield self.shadows[sid], entry

    def restricted_keys(self, aspect_names: set[str]) -> set:
        """Comparison view: (advice, shadow key, residue) triples."""
        out = set()
        for shadow, entry in self.pairs():
            if entry.advice.aspect_name in aspect_names:
                out.add(
                    (
                        entry.advice.aspect_name,
                        entry.advice.index,
                        shadow.key,
                        render_residue(entry.residue),
                    )
                )
        return out


def build_match_table(
    aspects: list[AspectDecl], visible: ShadowTable, precedence: list[str]
) -> MatchTable:
    """Match every advice against every visible shadow and sort by precedence."""
    all_advice = [adv for aspect in aspects for adv in aspect.advice]
    entries: dict[int, tuple[MatchEntry, ...]] = {}
    shadows: dict[int, Shadow] = {}
    for shadow in visible:
        hits = []
        for adv in all_advice:
            residue = match(adv.pointcut, shadow)
            if residue is not None:
                hits.append(MatchEntry(adv, residue))
        shadows[shadow.sid] = shadow
        if hits:
            hits.sort(key=lambda e: advice_sort_key(e.advice, precedence))
            entries[shadow.sid] = tuple(hits)
    return MatchTable(entries, shadows, list(precedence))


def advice_sequence_at(sid: int, table: MatchTable):
    """Runtime dispatch order at a shadow: before-advice in precedence order,
    after-advice in reverse precedence order (highest precedence last)."""
    entries = table.at(sid)
    before = tuple(e for e in entries if e.advice.kind == "before")
    after = tuple(reversed([e for e in entries if e.advice.kind == "after"]))
    return before, after


# ---------------------------------------------------------------------------
# Residue evaluation (dispatch time)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CflowFrame:
    """One entered join point on a thread's stack, with its bindings."""

    shadow: Shadow
    this_obj: object
    target_obj: object
    args: tuple


def cflow_active(frames, scope_pc) -> bool:
    """True iff some entered frame on this thread matches the scope pointcut."""
    for frame in frames:
        residue = match(scope_pc, frame.shadow)
        if residue is None:
            continue
        if eval_residue(residue, frame.this_obj, frame.target_obj, frame.args, frames):
            return True
    return False


def eval_residue(residue, this_obj, target_obj, args, frames) -> bool:
    if residue is TRUE:
        return True
    cls = type(residue)
    if cls is PcThis:
        return class_name_of(this_obj) == residue.type_name
    if cls is PcTarget:
        return class_name_of(target_obj) == residue.type_name
    if cls is PcArgs:
        if residue.position >= len(args):
            return False
        if residue.is_wildcard:
            return True
        return value_eq(args[residue.position], residue.value)
    if cls is PcCflow:
        return cflow_active(frames, residue.inner)
    if cls is PcNot:
        return not eval_residue(residue.inner, this_obj, target_obj, args, frames)
    if cls is PcAnd:
        return all(eval_residue(p, this_obj, target_obj, args, frames) for p in residue.parts)
    if cls is PcOr:
        return any(eval_residue(p, this_obj, target_obj, args, frames) for p in residue.parts)
    raise TypeError(f"not a residue node: {residue!r}")
