"""COOL-style coordination DSAL: parser, validator, and aspect generator.

A `.cool` file declares one coordinator for a target class: selfex/mutex
method sets, condition variables, coordinator fields, and per-method
requires/on_entry/on_exit additions. The transformer emits one MiniAspect
whose helpers implement a monitor protocol per target object:

    enter: acquire; while not canEnter: wait; busy+=1; on_entry; release
    exit:  acquire; busy-=1; on_exit; notify_all; release

Every generated helper and field carries full-default hide annotations and
the aspect carries @hideType, so the woven protocol adds no visible join
point shadows. Each advice carries @loc pointing back at the coordinator
clause it came from.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import minilang as ml
from .diagnostics import CompileError, Loc, ParseError
from .lexer import EOF, NAME, PUNCT
from .render import render_block, render_expr

# names the generated protocol code uses internally
_RESERVED_COOL = {"t", "st", "i", "entry", "this", "thisObject", "targetObject", "args", "jp"}


@dataclass
class MethodAddition:
    name: str
    requires: object | None
    on_entry: list
    on_exit: list
    loc: Loc


@dataclass
class CoordinatorDecl:
    target: str
    selfex: list[tuple[list[str], Loc]]
    mutex: list[tuple[list[str], Loc]]
    conditions: list[tuple[str, object, Loc]]
    fields: list[tuple[str, object, Loc]]
    additions: dict[str, MethodAddition]
    loc: Loc
    path: str

    def coordinated_methods(self) -> list[str]:
        """Union of selfex/mutex/addition methods in first-appearance order."""
        seen: dict[str, None] = {}
        for group, _ in self.selfex:
            for name in group:
                seen.setdefault(name)
        for group, _ in self.mutex:
            for name in group:
                seen.setdefault(name)
        for name in self.additions:
            seen.setdefault(name)
        return list(seen)

    def state_names(self) -> list[str]:
        return [name for name, _, _ in self.conditions] + [name for name, _, _ in self.fields]


class CoolParser(ml.MiniParser):
    def parse_coordinator(self) -> CoordinatorDecl:
        loc = self.ts.loc()
        self.ts.expect(NAME, "coordinator")
        target = self.ts.expect(NAME).text
        self.ts.expect(PUNCT, "{")
        selfex: list = []
        mutex: list = []
        conditions: list = []
        fields: list = []
        additions: dict[str, MethodAddition] = {}
        while not self.ts.accept(PUNCT, "}"):
            item_loc = self.ts.loc()
            if self.ts.at_name("selfex"):
                self.ts.advance()
                selfex.append((self.parse_name_set(), item_loc))
                self.ts.expect(PUNCT, ";")
            elif self.ts.at_name("mutex"):
                self.ts.advance()
                mutex.append((self.parse_name_set(), item_loc))
                self.ts.expect(PUNCT, ";")
            elif self.ts.at_name("condition"):
                self.ts.advance()
                while True:
                    cloc = self.ts.loc()
                    name = self.parse_decl_name()
                    self.ts.expect(PUNCT, "=")
                    conditions.append((name, self.parse_expr(), cloc))
                    if not self.ts.accept(PUNCT, ","):
                        break
                self.ts.expect(PUNCT, ";")
            elif self.ts.at_name("var"):
                self.ts.advance()
                floc = self.ts.loc()
                name = self.parse_decl_name()
                self.ts.expect(PUNCT, "=")
                fields.append((name, self.parse_expr(), floc))
                self.ts.expect(PUNCT, ";")
            elif self.ts.at_name("requires"):
                raise ParseError("requires is only allowed inside a method addition", item_loc)
            elif self.ts.at(NAME):
                add = self.parse_addition(item_loc)
                if add.name in additions:
                    raise ParseError(f"duplicate addition for method {add.name!r}", item_loc)
                additions[add.name] = add
            else:
                raise self.ts.error("expected a coordinator clause")
        if not self.ts.at(EOF):
            raise self.ts.error("unexpected text after coordinator")
        seen: set[str] = set()
        for name, _, nloc in conditions + fields:
            if name in seen:
                raise ParseError(f"duplicate condition/field name {name!r}", nloc)
            if name in _RESERVED_COOL:
                raise ParseError(f"{name!r} is reserved in coordinator code", nloc)
            seen.add(name)
        return CoordinatorDecl(
            target, selfex, mutex, conditions, fields, additions, loc, self.path
        )

    def parse_name_set(self) -> list[str]:
        self.ts.expect(PUNCT, "{")
        names: list[str] = []
        if not self.ts.at_punct("}"):
            while True:
                names.append(self.ts.expect(NAME).text)
                if not self.ts.accept(PUNCT, ","):
                    break
        self.ts.expect(PUNCT, "}")
        return names

    def parse_addition(self, loc: Loc) -> MethodAddition:
        name = self.ts.expect(NAME).text
        self.ts.expect(PUNCT, ":")
        requires = None
        on_entry: list = []
        on_exit: list = []
        if self.ts.accept(NAME, "requires"):
            self.ts.expect(PUNCT, "(")
            requires = self.parse_expr()
            self.ts.expect(PUNCT, ")")
            self.ts.accept(PUNCT, ";")
        if self.ts.accept(NAME, "on_entry"):
            on_entry = self.parse_block()
        if self.ts.accept(NAME, "on_exit"):
            on_exit = self.parse_block()
        return MethodAddition(name, requires, on_entry, on_exit, loc)


def parse_cool(text: str, path: str) -> CoordinatorDecl:
    """Parse a `.cool` coordinator. Raises ParseError with file:line."""
    return CoolParser(text, path).parse_coordinator()


def validate_cool(coord: CoordinatorDecl, program: ml.Program) -> None:
    """Check the coordinator against the base program at compile time."""
    cls = program.by_name().get(coord.target)
    if cls is None:
        raise CompileError(f"coordinator target class {coord.target!r} not found", coord.loc)
    for group, gloc in coord.selfex + coord.mutex:
        for name in group:
            if cls.method(name) is None:
                raise CompileError(
                    f"method {name!r} does not exist on {coord.target}", gloc
                )
    for add in coord.additions.values():
        if cls.method(add.name) is None:
            raise CompileError(
                f"method {add.name!r} does not exist on {coord.target}", add.loc
            )
    target_fields = cls.field_names()
    state = set(coord.state_names())
    for name, init, nloc in coord.conditions + coord.fields:
        _check_cool_expr(init, set(), set(), target_fields, allow_state=False)
    for add in coord.additions.values():
        if add.requires is not None:
            _check_cool_expr(add.requires, set(), state, target_fields, allow_state=True)
        for block in (add.on_entry, add.on_exit):
            scope: set[str] = set()
            ml._collect_locals(block, scope)
            for name in scope & _RESERVED_COOL:
                raise CompileError(f"{name!r} is reserved in coordinator code", add.loc)
            for st in block:
                _check_cool_stmt(st, scope, state, target_fields)


def _check_cool_stmt(st, scope, state, target_fields) -> None:
    if isinstance(st, ml.VarDecl):
        if st.init is not None:
            _check_cool_expr(st.init, scope, state, target_fields, True)
    elif isinstance(st, ml.Assign):
        if not isinstance(st.target, ml.LocalRef):
            raise CompileError("coordinator code can only assign to names", st.loc)
        name = st.target.name
        if name not in scope and name not in state:
            raise CompileError(
                f"cannot assign to {name!r}: not a condition, coordinator field, or local",
                st.loc,
            )
        _check_cool_expr(st.value, scope, state, target_fields, True)
    elif isinstance(st, ml.If):
        _check_cool_expr(st.cond, scope, state, target_fields, True)
        for s in st.then:
            _check_cool_stmt(s, scope, state, target_fields)
        for s in st.orelse:
            _check_cool_stmt(s, scope, state, target_fields)
    elif isinstance(st, ml.While):
        _check_cool_expr(st.cond, scope, state, target_fields, True)
        for s in st.body:
            _check_cool_stmt(s, scope, state, target_fields)
    elif isinstance(st, ml.ExprStmt):
        _check_cool_expr(st.expr, scope, state, target_fields, True)
    elif isinstance(st, ml.Return):
        raise CompileError("return is not allowed in coordinator code", st.loc)
    else:
        raise CompileError("statement not allowed in coordinator code", st.loc)


def _check_cool_expr(e, scope, state, target_fields, allow_state: bool) -> None:
    if isinstance(e, (ml.IntLit, ml.BoolLit, ml.StrLit, ml.NullLit)):
        return
    if isinstance(e, ml.LocalRef):
        if e.name in scope or e.name in target_fields or (allow_state and e.name in state):
            return
        raise CompileError(f"unknown name {e.name!r} in coordinator code", e.loc)
    if isinstance(e, ml.Unary):
        _check_cool_expr(e.operand, scope, state, target_fields, allow_state)
        return
    if isinstance(e, ml.Binary):
        _check_cool_expr(e.left, scope, state, target_fields, allow_state)
        _check_cool_expr(e.right, scope, state, target_fields, allow_state)
        return
    if isinstance(e, ml.BuiltinCall):
        if e.name in ("len",):
            for a in e.args:
                _check_cool_expr(a, scope, state, target_fields, allow_state)
            return
        raise CompileError(f"builtin {e.name!r} not allowed in coordinator code", e.loc)
    if isinstance(e, ml.ListLit):
        for a in e.items:
            _check_cool_expr(a, scope, state, target_fields, allow_state)
        return
    if isinstance(e, ml.Index):
        _check_cool_expr(e.obj, scope, state, target_fields, allow_state)
        _check_cool_expr(e.index, scope, state, target_fields, allow_state)
        return
    raise CompileError("expression not allowed in coordinator code", e.loc)


# ---------------------------------------------------------------------------
# Reference semantics for the entry guard
# ---------------------------------------------------------------------------


def can_enter(
    coord: CoordinatorDecl,
    method: str,
    busy: dict[str, int],
    conds: dict[str, object],
    fields: dict[str, object],
    target_fields: dict[str, object] | None = None,
) -> bool:
    """Entry guard: selfex => own busy count is zero; for each mutex set the
    method belongs to, every other member's busy count is zero; and the
    requires expression (if any) holds under the current state."""
    for group, _ in coord.selfex:
        if method in group and busy.get(method, 0) != 0:
            return False
    for group, _ in coord.mutex:
        if method in group:
            for other in group:
                if other != method and busy.get(other, 0) != 0:
                    return False
    add = coord.additions.get(method)
    if add is not None and add.requires is not None:
        env = dict(conds)
        env.update(fields)
        value = _eval_guard(add.requires, env, target_fields or {})
        if not isinstance(value, bool):
            raise CompileError("requires expression must be boolean", add.loc)
        return value
    return True


def _eval_guard(e, env: dict, target_fields: dict):
    if isinstance(e, (ml.IntLit, ml.BoolLit, ml.StrLit)):
        return e.value
    if isinstance(e, ml.NullLit):
        return None
    if isinstance(e, ml.LocalRef):
        if e.name in env:
            return env[e.name]
        if e.name in target_fields:
            return target_fields[e.name]
        raise CompileError(f"unknown name {e.name!r}", e.loc)
    if isinstance(e, ml.Unary):
        v = _eval_guard(e.operand, env, target_fields)
        return (not v) if e.op == "!" else -v
    if isinstance(e, ml.Binary):
        a = _eval_guard(e.left, env, target_fields)
        if e.op == "&&":
            return bool(a) and bool(_eval_guard(e.right, env, target_fields))
        if e.op == "||":
            return bool(a) or bool(_eval_guard(e.right, env, target_fields))
        b = _eval_guard(e.right, env, target_fields)
        ops = {
            "==": lambda: a == b,
            "!=": lambda: a != b,
            "+": lambda: a + b,
            "-": lambda: a - b,
            "*": lambda: a * b,
            "/": lambda: a // b,
            "%": lambda: a % b,
            "<": lambda: a < b,
            "<=": lambda: a <= b,
            ">": lambda: a > b,
            ">=": lambda: a >= b,
        }
        return ops[e.op]()
    if isinstance(e, ml.BuiltinCall) and e.name == "len":
        return len(_eval_guard(e.args[0], env, target_fields))
    raise CompileError("expression not supported in guard evaluation", e.loc)


# ---------------------------------------------------------------------------
# Code generation
# ---------------------------------------------------------------------------


class _Rewriter:
    """Compile coordinator names: conditions/fields -> state-list slots,
    target-class fields -> reads off the bound target object `t`."""

    def __init__(self, index: dict[str, int], state: set[str]):
        self.index = index
        self.state = state

    def expr(self, e, scope: set[str]):
        if isinstance(e, (ml.IntLit, ml.BoolLit, ml.StrLit, ml.NullLit)):
            return e
        if isinstance(e, ml.LocalRef):
            if e.name in scope:
                return e
            if e.name in self.index:
                return ml.Index(e.loc, ml.LocalRef(e.loc, "st"), ml.IntLit(e.loc, self.index[e.name]))
            # anything else was validated as a target-class field
            return ml.FieldGet(e.loc, ml.LocalRef(e.loc, "t"), e.name)
        if isinstance(e, ml.Unary):
            return ml.Unary(e.loc, e.op, self.expr(e.operand, scope))
        if isinstance(e, ml.Binary):
            return ml.Binary(e.loc, e.op, self.expr(e.left, scope), self.expr(e.right, scope))
        if isinstance(e, ml.BuiltinCall):
            return ml.BuiltinCall(e.loc, e.name, [self.expr(a, scope) for a in e.args])
        if isinstance(e, ml.ListLit):
            return ml.ListLit(e.loc, [self.expr(a, scope) for a in e.items])
        if isinstance(e, ml.Index):
            return ml.Index(e.loc, self.expr(e.obj, scope), self.expr(e.index, scope))
        raise CompileError("expression not allowed in coordinator code", e.loc)

    def block(self, stmts, scope: set[str]) -> list:
        return [self.stmt(s, scope) for s in stmts]

    def stmt(self, s, scope: set[str]):
        if isinstance(s, ml.VarDecl):
            init = self.expr(s.init, scope) if s.init is not None else None
            return ml.VarDecl(s.loc, s.name, init)
        if isinstance(s, ml.Assign):
            if not isinstance(s.target, ml.LocalRef):
                raise CompileError("coordinator code can only assign to names", s.loc)
            value = self.expr(s.value, scope)
            name = s.target.name
            if name in scope:
                return ml.Assign(s.loc, s.target, value)
            if name not in self.index:
                raise CompileError(
                    f"cannot assign to {name!r}: not a condition, coordinator field, or local",
                    s.loc,
                )
            slot = ml.Index(
                s.loc, ml.LocalRef(s.loc, "st"), ml.IntLit(s.loc, self.index[name])
            )
            return ml.Assign(s.loc, slot, value)
        if isinstance(s, ml.If):
            return ml.If(
                s.loc, self.expr(s.cond, scope), self.block(s.then, scope), self.block(s.orelse, scope)
            )
        if isinstance(s, ml.While):
            return ml.While(s.loc, self.expr(s.cond, scope), self.block(s.body, scope))
        if isinstance(s, ml.ExprStmt):
            return ml.ExprStmt(s.loc, self.expr(s.expr, scope))
        raise CompileError("statement not allowed in coordinator code", s.loc)


def _mutates_state(block, state: set[str]) -> bool:
    for s in block:
        if isinstance(s, ml.Assign) and isinstance(s.target, ml.LocalRef):
            if s.target.name in state:
                return True
        elif isinstance(s, ml.If):
            if _mutates_state(s.then, state) or _mutates_state(s.orelse, state):
                return True
        elif isinstance(s, ml.While):
            if _mutates_state(s.body, state):
                return True
    return False


def clause_line(coord: CoordinatorDecl, method: str) -> int:
    """The coordinator line an advice for `method` bridges back to: its
    addition clause if present, else the first selfex/mutex set naming it."""
    add = coord.additions.get(method)
    if add is not None:
        return add.loc.line
    for group, gloc in coord.selfex + coord.mutex:
        if method in group:
            return gloc.line
    return coord.loc.line


def gen_cool_aspect(coord: CoordinatorDecl) -> str:
    """Emit the MiniAspect source implementing the coordinator protocol.

    One monitor per coordinator (an aspect field, so it exists before any
    thread runs); per-target-object state rows [busy counts..., conditions...,
    fields...] are created lazily under that monitor, which keeps the lookup
    race-free."""
    methods = coord.coordinated_methods()
    state = set(coord.state_names())
    busy_index = {m: i for i, m in enumerate(methods)}
    index: dict[str, int] = {}
    slot = len(methods)
    for name, _, _ in coord.conditions:
        index[name] = slot
        slot += 1
    for name, _, _ in coord.fields:
        index[name] = slot
        slot += 1
    rw = _Rewriter(index, state)
    aspect_name = f"Coord_{coord.target}"
    module = os.path.basename(coord.path)

    init_exprs = ["0"] * len(methods)
    for _, init, _ in coord.conditions + coord.fields:
        init_exprs.append(render_expr(rw.expr(init, set())))

    def emit_state_lookup(out: list[str]) -> None:
        out.append("    var st = null;")
        out.append("    var i = 0;")
        out.append("    while (st == null && i < len(this.states)) {")
        out.append("      var entry = this.states[i];")
        out.append("      if (entry[0] == t) {")
        out.append("        st = entry[1];")
        out.append("      }")
        out.append("      i = i + 1;")
        out.append("    }")
        out.append("    if (st == null) {")
        out.append(f"      st = [{', '.join(init_exprs)}];")
        out.append("      push_back(this.states, [t, st]);")
        out.append("    }")

    out: list[str] = []
    out.append(f"// generated by the cool transformer from {coord.path}")
    out.append("@hideType")
    out.append(f"aspect {aspect_name} {{")
    out.append("  @hideField")
    out.append("  var states = [];")
    if methods:
        out.append("")
        out.append("  @hideField")
        out.append("  var mon = make_monitor();")
    for m in methods:
        add = coord.additions.get(m)
        out.append("")
        out.append("  @hideMethod")
        out.append(f"  def canEnter_{m}(t, st) {{")
        if any(m in group for group, _ in coord.selfex):
            out.append(f"    if (st[{busy_index[m]}] != 0) {{")
            out.append("      return false;")
            out.append("    }")
        for group, _ in coord.mutex:
            if m in group:
                for other in group:
                    if other != m:
                        out.append(f"    if (st[{busy_index[other]}] != 0) {{")
                        out.append("      return false;")
                        out.append("    }")
        if add is not None and add.requires is not None:
            out.append(f"    return {render_expr(rw.expr(add.requires, set()))};")
        else:
            out.append("    return true;")
        out.append("  }")

        on_entry = add.on_entry if add is not None else []
        on_exit = add.on_exit if add is not None else []
        entry_scope: set[str] = set()
        ml._collect_locals(on_entry, entry_scope)
        exit_scope: set[str] = set()
        ml._collect_locals(on_exit, exit_scope)

        out.append("")
        out.append("  @hideMethod")
        out.append(f"  def enter_{m}(t) {{")
        out.append("    monitor_acquire(this.mon);")
        emit_state_lookup(out)
        out.append(f"    while (!(this.canEnter_{m}(t, st))) {{")
        out.append("      monitor_wait(this.mon);")
        out.append("    }")
        out.append(f"    st[{busy_index[m]}] = st[{busy_index[m]}] + 1;")
        out.extend(render_block(rw.block(on_entry, entry_scope), "    "))
        if _mutates_state(on_entry, state):
            out.append("    monitor_notify_all(this.mon);")
        out.append("    monitor_release(this.mon);")
        out.append("  }")

        out.append("")
        out.append("  @hideMethod")
        out.append(f"  def exit_{m}(t) {{")
        out.append("    monitor_acquire(this.mon);")
        emit_state_lookup(out)
        out.append(f"    st[{busy_index[m]}] = st[{busy_index[m]}] - 1;")
        out.extend(render_block(rw.block(on_exit, exit_scope), "    "))
        out.append("    monitor_notify_all(this.mon);")
        out.append("    monitor_release(this.mon);")
        out.append("  }")

    for m in methods:
        line = clause_line(coord, m)
        bridge = f'@loc(file="{coord.path}", line={line}, module="{module}")'
        out.append("")
        out.append(f"  {bridge}")
        out.append(f"  before(): execution({coord.target}.{m}) {{")
        out.append(f"    this.enter_{m}(thisObject);")
        out.append("  }")
        out.append("")
        out.append(f"  {bridge}")
        out.append(f"  after(): execution({coord.target}.{m}) {{")
        out.append(f"    this.exit_{m}(thisObject);")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
