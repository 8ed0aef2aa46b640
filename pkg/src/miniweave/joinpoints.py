"""Join-point shadow model: extraction from compilation units and @hide filtering.

A shadow is the static location a join point arises from. Extraction walks
the parsed base program and any aspect declarations, producing one table in
source order. Hide specs (from @hideField/@hideMethod/@hideType annotations)
suppress shadows before matching; `within` suppression is positional (all
shadows lexically inside the annotated member), the other kinds suppress by
signature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import minilang as ml
from .diagnostics import CompileError, Loc


class ShadowKind(enum.Enum):
    METHOD_EXECUTION = "method_execution"
    METHOD_CALL = "method_call"
    FIELD_GET = "field_get"
    FIELD_SET = "field_set"
    PRE_INITIALIZATION = "pre_initialization"
    INITIALIZATION = "initialization"
    STATIC_INITIALIZATION = "static_initialization"

    def __str__(self) -> str:
        return self.value


_BODY_KINDS = (ShadowKind.METHOD_CALL, ShadowKind.FIELD_GET, ShadowKind.FIELD_SET)

# pseudo member names for initializer enclosures
INIT_MEMBER = "<init>"
PREINIT_MEMBER = "<preinit>"
STATIC_MEMBER = "<clinit>"


@dataclass
class Shadow:
    sid: int
    kind: ShadowKind
    cls: str | None  # None = receiver class not statically known
    member: str | None  # method/field name; None for init kinds
    arity: int | None
    within_cls: str
    within_member: str
    loc: Loc
    origin: str  # "base" | "generated"

    @property
    def signature(self) -> str:
        if self.kind in (ShadowKind.METHOD_EXECUTION, ShadowKind.METHOD_CALL):
            return f"{self.cls or '?'}.{self.member}/{self.arity}"
        if self.kind in (ShadowKind.FIELD_GET, ShadowKind.FIELD_SET):
            return f"{self.cls or '?'}.{self.member}"
        return str(self.cls)

    @property
    def key(self):
        """Identity that is stable across compilations of differing unit sets."""
        return (self.kind.value, self.signature, self.loc.path, self.loc.line, self.loc.col)

    def describe(self) -> str:
        return f"{self.kind} {self.signature} @ {self.loc}"


@dataclass
class HideSpec:
    """Suppression metadata attached to one declaration."""

    target: str  # "field" | "method" | "type"
    cls: str
    member: str | None  # None for type specs
    kinds: tuple[str, ...]
    explicit: bool
    loc: Loc

    def describe(self) -> str:
        tag = {"field": "@hideField", "method": "@hideMethod", "type": "@hideType"}[self.target]
        where = self.cls if self.member is None else f"{self.cls}.{self.member}"
        return f"{tag}({', '.join(self.kinds)}) {where}"


_HIDE_DEFAULTS = {
    "field": ("set", "get"),
    "method": ("call", "execution", "within"),
    "type": ("pre_init", "init", "static_init", "within_init", "within_static_init"),
}

_HIDE_ANN_FOR = {"field": "hideField", "method": "hideMethod", "type": "hideType"}


def hide_spec_of(target: str, annotations, cls: str, member: str | None = None) -> HideSpec | None:
    """Build the HideSpec for one declaration, or None when no @hide is present.

    A bare annotation hides the full default kind set for its category; an
    explicit argument list hides exactly the listed kinds (an empty list
    hides nothing).
    """
    wanted = _HIDE_ANN_FOR[target]
    spec = None
    for ann in annotations:
        if ann.name != wanted:
            continue
        if spec is not None:
            raise CompileError(f"duplicate @{wanted}", ann.loc)
        if ann.args is None:
            kinds = _HIDE_DEFAULTS[target]
            explicit = False
        else:
            for k in ann.args:
                if not isinstance(k, str) or k not in _HIDE_DEFAULTS[target]:
                    raise CompileError(
                        f"unknown join point kind {k!r} for @{wanted}", ann.loc
                    )
            kinds = tuple(dict.fromkeys(ann.args))
            explicit = True
        spec = HideSpec(target, cls, member, kinds, explicit, ann.loc)
    return spec


def _check_annotation_categories(annotations, allowed: set[str], what: str) -> None:
    for ann in annotations:
        if ann.name not in allowed:
            raise CompileError(f"annotation @{ann.name} is not allowed on a {what}", ann.loc)


@dataclass
class ShadowTable:
    shadows: list[Shadow]
    suppressed: list[tuple[Shadow, HideSpec, str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.shadows)

    def __len__(self) -> int:
        return len(self.shadows)

    def by_kind(self, kind: ShadowKind) -> list[Shadow]:
        return [s for s in self.shadows if s.kind == kind]

    def by_signature(self, signature: str) -> list[Shadow]:
        return [s for s in self.shadows if s.signature == signature]

    def keys(self) -> set:
        return {s.key for s in self.shadows}

    def diagnostics(self) -> list[str]:
        lines = []
        for shadow, spec, kind in self.suppressed:
            lines.append(
                f"HIDDEN {shadow.kind} {shadow.signature} @ {shadow.loc} "
                f"by {spec.describe()} [{kind}]"
            )
        return lines


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


class _Extractor:
    def __init__(self, generated_paths: frozenset[str]):
        self.generated_paths = generated_paths
        self.records: list[tuple[Loc, int, ShadowKind, dict, object, str]] = []
        self.seq = 0

    def origin_of(self, loc: Loc) -> str:
        return "generated" if loc.path in self.generated_paths else "base"

    def add(self, kind: ShadowKind, loc: Loc, node, attr: str, **fields) -> None:
        self.records.append((loc, self.seq, kind, fields, node, attr))
        self.seq += 1

    # -- receiver class inference: `this`, `new C(...)`, and locals that are
    #    declared as `var x = new C(...)` and never reassigned.

    def local_classes(self, body: list, self_cls: str) -> dict[str, str]:
        declared: dict[str, str] = {}
        reassigned: set[str] = set()

        def scan(stmts):
            for st in stmts:
                if isinstance(st, ml.VarDecl):
                    if st.name in declared:
                        reassigned.add(st.name)
                    elif isinstance(st.init, ml.New):
                        declared[st.name] = st.init.class_name
                    elif isinstance(st.init, ml.ThisRef):
                        declared[st.name] = self_cls
                elif isinstance(st, ml.Assign):
                    if isinstance(st.target, ml.LocalRef):
                        reassigned.add(st.target.name)
                elif isinstance(st, ml.If):
                    scan(st.then)
                    scan(st.orelse)
                elif isinstance(st, ml.While):
                    scan(st.body)

        scan(body)
        return {k: v for k, v in declared.items() if k not in reassigned}

    def receiver_class(self, expr, self_cls: str, locals_map: dict[str, str]) -> str | None:
        if isinstance(expr, ml.ThisRef):
            return self_cls
        if isinstance(expr, ml.New):
            return expr.class_name
        if isinstance(expr, ml.LocalRef):
            return locals_map.get(expr.name)
        return None

    # -- walking

    def walk_body(self, body: list, ctx: dict) -> None:
        for stmt in body:
            self.walk_stmt(stmt, ctx)

    def walk_stmt(self, stmt, ctx: dict) -> None:
        if isinstance(stmt, ml.VarDecl):
            if stmt.init is not None:
                self.walk_expr(stmt.init, ctx)
        elif isinstance(stmt, ml.Assign):
            if isinstance(stmt.target, ml.FieldGet):
                tgt = stmt.target
                self.walk_expr(tgt.obj, ctx)
                cls = self.receiver_class(tgt.obj, ctx["self_cls"], ctx["locals"])
                self.add(
                    ShadowKind.FIELD_SET,
                    tgt.loc,
                    stmt,
                    "sid",
                    cls=cls,
                    member=tgt.name,
                    arity=None,
                    within_cls=ctx["within_cls"],
                    within_member=ctx["within_member"],
                )
            elif isinstance(stmt.target, ml.Index):
                self.walk_expr(stmt.target.obj, ctx)
                self.walk_expr(stmt.target.index, ctx)
            self.walk_expr(stmt.value, ctx)
        elif isinstance(stmt, ml.If):
            self.walk_expr(stmt.cond, ctx)
            self.walk_body(stmt.then, ctx)
            self.walk_body(stmt.orelse, ctx)
        elif isinstance(stmt, ml.While):
            self.walk_expr(stmt.cond, ctx)
            self.walk_body(stmt.body, ctx)
        elif isinstance(stmt, ml.Return):
            if stmt.value is not None:
                self.walk_expr(stmt.value, ctx)
        elif isinstance(stmt, ml.ExprStmt):
            self.walk_expr(stmt.expr, ctx)

    def walk_expr(self, expr, ctx: dict) -> None:
        if isinstance(expr, ml.ListLit):
            for item in expr.items:
                self.walk_expr(item, ctx)
        elif isinstance(expr, ml.FieldGet):
            self.walk_expr(expr.obj, ctx)
            cls = self.receiver_class(expr.obj, ctx["self_cls"], ctx["locals"])
            self.add(
                ShadowKind.FIELD_GET,
                expr.loc,
                expr,
                "sid",
                cls=cls,
                member=expr.name,
                arity=None,
                within_cls=ctx["within_cls"],
                within_member=ctx["within_member"],
            )
        elif isinstance(expr, ml.Index):
            self.walk_expr(expr.obj, ctx)
            self.walk_expr(expr.index, ctx)
        elif isinstance(expr, ml.MethodCall):
            self.walk_expr(expr.obj, ctx)
            for a in expr.args:
                self.walk_expr(a, ctx)
            cls = self.receiver_class(expr.obj, ctx["self_cls"], ctx["locals"])
            self.add(
                ShadowKind.METHOD_CALL,
                expr.loc,
                expr,
                "sid",
                cls=cls,
                member=expr.name,
                arity=len(expr.args),
                within_cls=ctx["within_cls"],
                within_member=ctx["within_member"],
            )
        elif isinstance(expr, ml.BuiltinCall):
            for a in expr.args:
                self.walk_expr(a, ctx)
        elif isinstance(expr, ml.New):
            for a in expr.args:
                self.walk_expr(a, ctx)
        elif isinstance(expr, ml.Spawn):
            # spawn is a thread-launch primitive, not a call site: only the
            # execution join point on the new thread exists
            self.walk_expr(expr.call.obj, ctx)
            for a in expr.call.args:
                self.walk_expr(a, ctx)
        elif isinstance(expr, ml.Unary):
            self.walk_expr(expr.operand, ctx)
        elif isinstance(expr, ml.Binary):
            self.walk_expr(expr.left, ctx)
            self.walk_expr(expr.right, ctx)

    def body_ctx(self, self_cls: str, within_member: str, body: list) -> dict:
        return {
            "self_cls": self_cls,
            "within_cls": self_cls,
            "within_member": within_member,
            "locals": self.local_classes(body, self_cls),
        }

    def take_class(self, cls: ml.ClassDecl) -> None:
        # init-kind shadows exist only where their span does: a field-initializer
        # span, a constructor body, a static block
        initialized = [f for f in cls.fields if f.init is not None]
        if initialized:
            self.add(
                ShadowKind.PRE_INITIALIZATION,
                initialized[0].loc,
                cls,
                "pre_sid",
                cls=cls.name,
                member=None,
                arity=None,
                within_cls=cls.name,
                within_member=PREINIT_MEMBER,
            )
        if cls.ctor is not None:
            self.add(
                ShadowKind.INITIALIZATION,
                cls.ctor.loc,
                cls,
                "init_sid",
                cls=cls.name,
                member=None,
                arity=None,
                within_cls=cls.name,
                within_member=INIT_MEMBER,
            )
        if cls.static_block is not None:
            self.add(
                ShadowKind.STATIC_INITIALIZATION,
                cls.static_block.loc,
                cls,
                "static_sid",
                cls=cls.name,
                member=None,
                arity=None,
                within_cls=cls.name,
                within_member=STATIC_MEMBER,
            )
        # field initializers are evaluated as part of instance initialization,
        # so their shadows sit within <init> (same as constructor-body shadows)
        init_ctx = {
            "self_cls": cls.name,
            "within_cls": cls.name,
            "within_member": INIT_MEMBER,
            "locals": {},
        }
        for f in cls.fields:
            if f.init is not None:
                self.walk_expr(f.init, init_ctx)
        if cls.ctor is not None:
            ctx = self.body_ctx(cls.name, INIT_MEMBER, cls.ctor.body)
            self.walk_body(cls.ctor.body, ctx)
        if cls.static_block is not None:
            ctx = self.body_ctx(cls.name, STATIC_MEMBER, cls.static_block.body)
            self.walk_body(cls.static_block.body, ctx)
        for m in cls.methods:
            self.add(
                ShadowKind.METHOD_EXECUTION,
                m.loc,
                m,
                "exec_sid",
                cls=cls.name,
                member=m.name,
                arity=len(m.params),
                within_cls=cls.name,
                within_member=m.name,
            )
            self.walk_body(m.body, self.body_ctx(cls.name, m.name, m.body))

    def take_aspect(self, aspect) -> None:
        # aspect fields are initialized by the runtime outside any join point
        # span; their initializer expressions yield no shadows
        for helper in aspect.helpers:
            self.add(
                ShadowKind.METHOD_EXECUTION,
                helper.loc,
                helper,
                "exec_sid",
                cls=aspect.name,
                member=helper.name,
                arity=len(helper.params),
                within_cls=aspect.name,
                within_member=helper.name,
            )
            self.walk_body(helper.body, self.body_ctx(aspect.name, helper.name, helper.body))
        for adv in aspect.advice:
            ctx = self.body_ctx(aspect.name, adv.member_name, adv.body)
            self.walk_body(adv.body, ctx)

    def finish(self) -> ShadowTable:
        self.records.sort(key=lambda r: (r[0].path, r[0].line, r[0].col, r[1]))
        shadows = []
        for sid, (loc, _seq, kind, fields, node, attr) in enumerate(self.records):
            shadow = Shadow(
                sid=sid, kind=kind, loc=loc, origin=self.origin_of(loc), **fields
            )
            shadows.append(shadow)
            setattr(node, attr, sid)
        return ShadowTable(shadows)


def extract_shadows(
    program: ml.Program, aspects=(), generated_paths: frozenset[str] = frozenset()
) -> ShadowTable:
    """Extract every join-point shadow from the program and aspect declarations.

    Side effect: shadow ids are written back onto the AST nodes they arise
    from, which is how the interpreter finds the match-table entry for a
    site. Iteration order of the result is source order (path, line, col).
    """
    ex = _Extractor(frozenset(generated_paths))
    for cls in program.classes:
        ex.take_class(cls)
    for aspect in aspects:
        ex.take_aspect(aspect)
    return ex.finish()


# ---------------------------------------------------------------------------
# Hide specs
# ---------------------------------------------------------------------------


def collect_hide_specs(program: ml.Program, aspects=()) -> list[HideSpec]:
    """Gather HideSpecs from annotations, checking annotation categories."""
    specs: list[HideSpec] = []

    def put(spec: HideSpec | None) -> None:
        if spec is not None:
            specs.append(spec)

    for cls in program.classes:
        _check_annotation_categories(cls.annotations, {"hideType"}, "class")
        put(hide_spec_of("type", cls.annotations, cls.name))
        for f in cls.fields:
            _check_annotation_categories(f.annotations, {"hideField"}, "field")
            put(hide_spec_of("field", f.annotations, cls.name, f.name))
        for m in cls.methods:
            _check_annotation_categories(m.annotations, {"hideMethod"}, "method")
            put(hide_spec_of("method", m.annotations, cls.name, m.name))
    for aspect in aspects:
        _check_annotation_categories(aspect.annotations, {"hideType"}, "aspect")
        put(hide_spec_of("type", aspect.annotations, aspect.name))
        for f in aspect.fields:
            _check_annotation_categories(f.annotations, {"hideField"}, "field")
            put(hide_spec_of("field", f.annotations, aspect.name, f.name))
        for helper in aspect.helpers:
            _check_annotation_categories(helper.annotations, {"hideMethod"}, "method")
            put(hide_spec_of("method", helper.annotations, aspect.name, helper.name))
        for adv in aspect.advice:
            hide_anns = [a for a in adv.annotations if a.name.startswith("hide")]
            _check_annotation_categories(hide_anns, {"hideMethod"}, "advice")
            put(hide_spec_of("method", hide_anns, aspect.name, adv.member_name))
    return specs


def _spec_hides(spec: HideSpec, kind: str, shadow: Shadow) -> bool:
    if spec.target == "method":
        if kind == "execution":
            return (
                shadow.kind == ShadowKind.METHOD_EXECUTION
                and shadow.cls == spec.cls
                and shadow.member == spec.member
            )
        if kind == "call":
            # signature-based: only call sites whose receiver class resolved
            return (
                shadow.kind == ShadowKind.METHOD_CALL
                and shadow.cls == spec.cls
                and shadow.member == spec.member
            )
        if kind == "within":
            return shadow.within_cls == spec.cls and shadow.within_member == spec.member
    elif spec.target == "field":
        if kind == "get":
            return (
                shadow.kind == ShadowKind.FIELD_GET
                and shadow.cls == spec.cls
                and shadow.member == spec.member
            )
        if kind == "set":
            return (
                shadow.kind == ShadowKind.FIELD_SET
                and shadow.cls == spec.cls
                and shadow.member == spec.member
            )
    elif spec.target == "type":
        if kind == "pre_init":
            return shadow.kind == ShadowKind.PRE_INITIALIZATION and shadow.cls == spec.cls
        if kind == "init":
            return shadow.kind == ShadowKind.INITIALIZATION and shadow.cls == spec.cls
        if kind == "static_init":
            return shadow.kind == ShadowKind.STATIC_INITIALIZATION and shadow.cls == spec.cls
        if kind == "within_init":
            return (
                shadow.kind in _BODY_KINDS
                and shadow.within_cls == spec.cls
                and shadow.within_member == INIT_MEMBER
            )
        if kind == "within_static_init":
            return (
                shadow.kind in _BODY_KINDS
                and shadow.within_cls == spec.cls
                and shadow.within_member == STATIC_MEMBER
            )
    return False


def apply_hide_filter(
    table: ShadowTable, specs: list[HideSpec], strip_hide: bool = False
) -> ShadowTable:
    """Return the table minus suppressed shadows.

    Each suppressed shadow is attributed to exactly one (spec, kind) pair:
    the first match in spec declaration order, kinds in the order listed on
    the annotation. strip_hide=True returns the input unchanged.
    """
    if strip_hide:
        return ShadowTable(list(table.shadows))
    visible: list[Shadow] = []
    suppressed: list[tuple[Shadow, HideSpec, str]] = []
    for shadow in table.shadows:
        hit = None
        for spec in specs:
            for kind in spec.kinds:
                if _spec_hides(spec, kind, shadow):
                    hit = (spec, kind)
                    break
            if hit is not None:
                break
        if hit is None:
            visible.append(shadow)
        else:
            suppressed.append((shadow, hit[0], hit[1]))
    return ShadowTable(visible, suppressed)
