"""Deterministic concurrent interpreter with advice dispatch.

Logical threads are Python generators resumed one interpreter step at a
time by a round-robin scheduler; the rotation order is derived from the
run seed, so a fixed (unit, entry, seed, step_limit) always produces a
byte-identical event trace. Monitors are non-reentrant and frame-scoped:
whatever a frame still holds when it unwinds is released.

At every visible join point the interpreter consults the match table and
runs the residue-passing advice: before-advice in precedence order,
after-advice in reverse precedence order. Hidden shadows neither emit
events nor maintain cflow state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import joinpoints as jp
from . import matching
from . import minilang as ml
from .aspects import AspectDecl, resolve_aspects
from .diagnostics import CompileError, Loc, MiniRuntimeError
from .joinpoints import ShadowTable
from .matching import CflowFrame, MatchTable, advice_sequence_at, eval_residue
from .values import (
    AspectInstance,
    JpInfo,
    MObject,
    Monitor,
    class_name_of,
    format_message,
    render_value,
    value_eq,
)

DEFAULT_STEP_LIMIT = 1_000_000

RUNNABLE = "runnable"
BLOCKED = "blocked"
WAITING = "waiting"
FINISHED = "finished"


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


@dataclass(frozen=True)
class _Block:
    monitor: Monitor


@dataclass(frozen=True)
class _Wait:
    monitor: Monitor


@dataclass(frozen=True)
class Event:
    step: int
    thread: int
    kind: str  # jp | advice_enter | advice_exit | print | audit | spawn | finish
    text: str

    def render(self) -> str:
        return f"step={self.step} t{self.thread} {self.kind} {self.text}".rstrip()


@dataclass(frozen=True)
class StuckThread:
    tid: int
    monitor: Monitor
    holder: int | None  # None for a thread parked in wait with no holder
    how: str  # "blocked" | "waiting"


@dataclass
class DeadlockReport:
    step: int
    stuck: list[StuckThread]

    @property
    def thread_ids(self) -> set[int]:
        return {s.tid for s in self.stuck}

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(s.tid, s.holder) for s in self.stuck if s.holder is not None]

    def self_edges(self) -> list[StuckThread]:
        return [s for s in self.stuck if s.holder == s.tid]

    def render(self) -> str:
        lines = [f"deadlock at step {self.step}:"]
        for s in sorted(self.stuck, key=lambda s: s.tid):
            where = f" (created at {s.monitor.created_at})" if s.monitor.created_at else ""
            if s.holder is None:
                lines.append(f"  t{s.tid} waits on {s.monitor}{where}, no holder")
            elif s.holder == s.tid:
                lines.append(f"  t{s.tid} {s.how} on {s.monitor}{where}, held by itself")
            else:
                lines.append(f"  t{s.tid} {s.how} on {s.monitor}{where}, held by t{s.holder}")
        return "\n".join(lines)


@dataclass
class ExecutionResult:
    status: str  # completed | deadlock | step-limit-exceeded | runtime-error
    events: list[Event]
    output: list[str]  # stdout lines: prints and audit lines in schedule order
    audit_lines: list[str]
    steps: int
    deadlock: DeadlockReport | None = None
    error: str | None = None

    def render_trace(self) -> str:
        return "".join(e.render() + "\n" for e in self.events)

    def count_jp(self, prefix: str) -> int:
        return sum(1 for e in self.events if e.kind == "jp" and e.text.startswith(prefix))


@dataclass
class WovenUnit:
    """Everything run() needs: the program, aspects, and the match relation."""

    program: ml.Program
    aspects: list[AspectDecl]
    precedence: list[str]
    all_shadows: ShadowTable
    visible: ShadowTable
    hide_specs: list
    match_table: MatchTable

    @classmethod
    def build(
        cls,
        program: ml.Program,
        aspects: list[AspectDecl] = (),
        precedence: list[str] = (),
        strip_hide: bool = False,
        generated_paths: frozenset[str] = frozenset(),
    ) -> "WovenUnit":
        aspects = list(aspects)
        class_names = set()
        for c in program.classes:
            class_names.add(c.name)
        for a in aspects:
            if a.name in class_names:
                raise CompileError(f"aspect {a.name!r} collides with a class name", a.loc)
            class_names.add(a.name)
        ml.resolve_program(program)
        resolve_aspects(aspects, set(program.by_name()))
        specs = jp.collect_hide_specs(program, aspects)
        table = jp.extract_shadows(program, aspects, generated_paths)
        visible = jp.apply_hide_filter(table, specs, strip_hide)
        mt = matching.build_match_table(aspects, visible, list(precedence))
        return cls(program, aspects, list(precedence), table, visible, specs, mt)


@dataclass
class _Frame:
    owner: "_Thread"
    acquired: list[Monitor] = field(default_factory=list)


def _frame_locals(decl, bound: dict) -> dict:
    locals_ = {name: None for name in decl.local_names}
    locals_.update(bound)
    return locals_


class _Env:
    __slots__ = ("locals", "this", "frame")

    def __init__(self, locals_: dict, this, frame: _Frame):
        self.locals = locals_
        self.this = this
        self.frame = frame


class _Thread:
    def __init__(self, tid: int, gen):
        self.tid = tid
        self.gen = gen
        self.status = RUNNABLE
        self.monitor: Monitor | None = None  # blocked/waiting target
        self.frames: list[_Frame] = []
        self.cflow: list[CflowFrame] = []


def _eligible(t: _Thread) -> bool:
    if t.status == RUNNABLE:
        return True
    if t.status == BLOCKED:
        return t.monitor is not None and t.monitor.holder is None
    return False


def detect_deadlock(threads: list[_Thread], step: int) -> DeadlockReport | None:
    """Report the stuck threads, or None while anything can still run."""
    unfinished = [t for t in threads if t.status != FINISHED]
    if not unfinished or any(_eligible(t) for t in threads):
        return None
    stuck = [
        StuckThread(t.tid, t.monitor, t.monitor.holder, t.status)
        for t in unfinished
        if t.monitor is not None
    ]
    return DeadlockReport(step, stuck)


class Interp:
    def __init__(self, unit: WovenUnit, seed: int = 0, step_limit: int = DEFAULT_STEP_LIMIT):
        if step_limit <= 0:
            raise ValueError("step_limit must be positive")
        self.unit = unit
        self.seed = seed
        self.step_limit = step_limit
        self.rng = random.Random(seed)
        self.threads: list[_Thread] = []
        self.rotation: list[int] = []
        self.rot_pos = 0
        self.current: _Thread | None = None
        self.steps = 0
        self.events: list[Event] = []
        self.output: list[str] = []
        self.audit_lines: list[str] = []
        self.next_obj = 0
        self.next_mon = 0
        self.aspect_instances: dict[str, AspectInstance] = {}
        self.classes = unit.program.by_name()
        self._sequences: dict[int, tuple] = {}

    # -- events

    def emit(self, kind: str, text: str) -> None:
        self.events.append(Event(self.steps, self.current.tid, kind, text))

    # -- scheduling

    def add_thread(self, gen) -> int:
        tid = len(self.threads)
        t = _Thread(tid, gen)
        self.threads.append(t)
        if not self.rotation:
            self.rotation.append(tid)
        else:
            idx = self.rng.randrange(len(self.rotation) + 1)
            self.rotation.insert(idx, tid)
            if idx <= self.rot_pos:
                self.rot_pos += 1
        return tid

    def pick_next(self) -> _Thread | None:
        n = len(self.rotation)
        for off in range(n):
            idx = (self.rot_pos + off) % n
            t = self.threads[self.rotation[idx]]
            if _eligible(t):
                self.rot_pos = (idx + 1) % n
                return t
        return None

    def run(self, entry: str) -> ExecutionResult:
        entry_cls, entry_method = self._check_entry(entry)
        self.add_thread(self._main(entry_cls, entry_method))
        while True:
            t = self.pick_next()
            if t is None:
                report = detect_deadlock(self.threads, self.steps)
                if report is None:
                    return self._result("completed")
                return self._result("deadlock", deadlock=report)
            if self.steps >= self.step_limit:
                return self._result("step-limit-exceeded")
            self.steps += 1
            self.current = t
            if t.status == BLOCKED:
                t.status = RUNNABLE
                t.monitor = None
            try:
                signal = next(t.gen)
            except StopIteration:
                t.status = FINISHED
                self.emit("finish", "")
                continue
            except MiniRuntimeError as e:
                return self._result("runtime-error", error=str(e))
            if signal is None:
                continue
            if isinstance(signal, _Block):
                t.status = BLOCKED
                t.monitor = signal.monitor
            elif isinstance(signal, _Wait):
                t.status = WAITING
                t.monitor = signal.monitor
            else:
                raise AssertionError(f"bad scheduler signal {signal!r}")

    def _result(self, status: str, deadlock=None, error=None) -> ExecutionResult:
        return ExecutionResult(
            status, self.events, self.output, self.audit_lines, self.steps, deadlock, error
        )

    def _check_entry(self, entry: str):
        if "." not in entry:
            raise CompileError(f"entry must be Class.method, got {entry!r}")
        cls_name, method_name = entry.split(".", 1)
        cls = self.classes.get(cls_name)
        if cls is None:
            raise CompileError(f"entry class {cls_name!r} not found")
        m = cls.method(method_name)
        if m is None:
            raise CompileError(f"entry method {entry!r} not found")
        if m.params:
            raise CompileError(f"entry method {entry!r} must take no parameters")
        if cls.ctor is not None and cls.ctor.params:
            raise CompileError(f"entry class {cls_name!r} needs a zero-arg constructor")
        return cls, method_name

    # -- thread bodies

    def _main(self, entry_cls, entry_method):
        # aspect singletons first, then static blocks in program order, then entry
        for aspect in self.unit.aspects:
            inst = AspectInstance(aspect)
            self.aspect_instances[aspect.name] = inst
            for f in aspect.fields:
                if f.init is not None:
                    frame = self._push_frame()
                    try:
                        inst.fields[f.name] = yield from self.eval_expr(
                            f.init, _Env({}, inst, frame)
                        )
                    finally:
                        self._pop_frame(frame)
        for cls in self.unit.program.classes:
            if cls.static_block is not None:
                yield from self._run_static(cls)
        obj = yield from self.instantiate(entry_cls, [], entry_cls.loc)
        yield from self.invoke(obj, entry_method, [], entry_cls.loc)

    def _run_static(self, cls):
        def inner():
            frame = self._push_frame()
            env = _Env(_frame_locals(cls.static_block, {}), None, frame)
            try:
                yield from self.exec_block(cls.static_block.body, env)
            except _ReturnSignal:
                pass
            finally:
                self._pop_frame(frame)
            return None

        yield from self.dispatch_jp(cls.static_sid, None, None, (), inner)

    def _spawned(self, recv, method_name: str, args, loc):
        yield from self.invoke(recv, method_name, args, loc)

    # -- frames and monitors

    def _push_frame(self) -> _Frame:
        frame = _Frame(self.current)
        self.current.frames.append(frame)
        return frame

    def _pop_frame(self, frame: _Frame) -> None:
        # also reached during generator teardown of parked threads, so the
        # owner comes from the frame, not from self.current
        t = frame.owner
        if frame in t.frames:
            t.frames.remove(frame)
        for mon in frame.acquired:
            if mon.holder == t.tid:
                mon.holder = None

    def _acquire(self, mon: Monitor, env: _Env):
        while mon.holder is not None:
            yield _Block(mon)
        mon.holder = self.current.tid
        env.frame.acquired.append(mon)

    def _release(self, mon: Monitor, loc: Loc) -> None:
        t = self.current
        if mon.holder != t.tid:
            raise MiniRuntimeError("release of a monitor not held", loc)
        mon.holder = None
        for frame in reversed(t.frames):
            if mon in frame.acquired:
                frame.acquired.remove(mon)
                break

    def _wait(self, mon: Monitor, loc: Loc):
        t = self.current
        if mon.holder != t.tid:
            raise MiniRuntimeError("wait on a monitor not held", loc)
        # atomic release-and-park; re-acquire before continuing
        mon.holder = None
        yield _Wait(mon)
        while mon.holder is not None:
            yield _Block(mon)
        mon.holder = t.tid

    def _notify_all(self, mon: Monitor, loc: Loc) -> None:
        if mon.holder != self.current.tid:
            raise MiniRuntimeError("notify on a monitor not held", loc)
        for t in self.threads:
            if t.status == WAITING and t.monitor is mon:
                t.status = BLOCKED

    # -- join point dispatch

    def dispatch_jp(self, sid: int | None, this_obj, target_obj, args, inner):
        """Wrap `inner` with advice dispatch when the shadow is visible."""
        mt = self.unit.match_table
        if sid is None or sid not in mt.shadows:
            result = yield from inner()
            return result
        shadow = mt.shadows[sid]
        yield None  # every woven join point is a scheduling point
        self.emit("jp", f"{shadow.kind} {shadow.signature} @ {shadow.loc}")
        t = self.current
        t.cflow.append(CflowFrame(shadow, this_obj, target_obj, tuple(args)))
        try:
            before, after = self._sequence(sid)
            for entry in before:
                if eval_residue(entry.residue, this_obj, target_obj, args, t.cflow):
                    yield from self.run_advice(entry.advice, shadow, this_obj, target_obj, args)
            result = yield from inner()
            for entry in after:
                if eval_residue(entry.residue, this_obj, target_obj, args, t.cflow):
                    yield from self.run_advice(entry.advice, shadow, this_obj, target_obj, args)
        finally:
            t.cflow.pop()
        return result

    def _sequence(self, sid: int):
        seq = self._sequences.get(sid)
        if seq is None:
            seq = advice_sequence_at(sid, self.unit.match_table)
            self._sequences[sid] = seq
        return seq

    def run_advice(self, advice, shadow, this_obj, target_obj, args):
        inst = self.aspect_instances[advice.aspect_name]
        tag = f"{advice.describe()} at {shadow.kind} {shadow.signature}"
        self.emit("advice_enter", tag)
        info = JpInfo(
            kind=str(shadow.kind),
            signature=shadow.signature,
            loc=str(shadow.loc),
            cls=class_name_of(target_obj) or class_name_of(this_obj) or (shadow.cls or ""),
            member=shadow.member or "",
            arity=shadow.arity if shadow.arity is not None else len(args),
        )
        frame = self._push_frame()
        bound = {
            "thisObject": this_obj,
            "targetObject": target_obj,
            "args": list(args),
            "jp": info,
        }
        env = _Env(_frame_locals(advice, bound), inst, frame)
        try:
            yield from self.exec_block(advice.body, env)
        except _ReturnSignal:
            pass
        finally:
            self._pop_frame(frame)
        self.emit("advice_exit", tag)

    # -- object lifecycle and method invocation

    def instantiate(self, cls, args, loc: Loc):
        expected = len(cls.ctor.params) if cls.ctor is not None else 0
        if len(args) != expected:
            raise MiniRuntimeError(
                f"constructor of {cls.name} expects {expected} argument(s), got {len(args)}",
                loc,
            )
        obj = MObject(cls, self.next_obj)
        self.next_obj += 1

        def run_preinit():
            frame = self._push_frame()
            env = _Env({}, obj, frame)
            try:
                for f in cls.fields:
                    if f.init is not None:
                        obj.fields[f.name] = yield from self.eval_expr(f.init, env)
            finally:
                self._pop_frame(frame)
            return None

        yield from self.dispatch_jp(cls.pre_sid, obj, obj, args, run_preinit)

        def run_ctor():
            if cls.ctor is None:
                return None
                yield  # pragma: no cover - makes this a generator
            frame = self._push_frame()
            env = _Env(_frame_locals(cls.ctor, dict(zip(cls.ctor.params, args))), obj, frame)
            try:
                yield from self.exec_block(cls.ctor.body, env)
            except _ReturnSignal:
                pass
            finally:
                self._pop_frame(frame)
            return None

        yield from self.dispatch_jp(cls.init_sid, obj, obj, args, run_ctor)
        return obj

    def invoke(self, recv, name: str, args, loc: Loc):
        if recv is None:
            raise MiniRuntimeError(f"null dereference calling {name!r}", loc)
        if isinstance(recv, MObject):
            decl = recv.cls.method(name)
        elif isinstance(recv, AspectInstance):
            decl = recv.decl.helper(name)
        else:
            decl = None
        if decl is None:
            raise MiniRuntimeError(
                f"unknown method {name!r} on {class_name_of(recv) or render_value(recv)}", loc
            )
        if len(decl.params) != len(args):
            raise MiniRuntimeError(
                f"{class_name_of(recv)}.{name} expects {len(decl.params)} argument(s), "
                f"got {len(args)}",
                loc,
            )

        def run_body():
            frame = self._push_frame()
            env = _Env(_frame_locals(decl, dict(zip(decl.params, args))), recv, frame)
            try:
                yield from self.exec_block(decl.body, env)
            except _ReturnSignal as sig:
                return sig.value
            finally:
                self._pop_frame(frame)
            return None

        result = yield from self.dispatch_jp(decl.exec_sid, recv, recv, args, run_body)
        return result

    # -- statements

    def exec_block(self, stmts, env: _Env):
        for stmt in stmts:
            yield None
            yield from self.exec_stmt(stmt, env)

    def exec_stmt(self, stmt, env: _Env):
        if isinstance(stmt, ml.VarDecl):
            value = None
            if stmt.init is not None:
                value = yield from self.eval_expr(stmt.init, env)
            env.locals[stmt.name] = value
        elif isinstance(stmt, ml.Assign):
            yield from self.exec_assign(stmt, env)
        elif isinstance(stmt, ml.If):
            cond = yield from self.eval_expr(stmt.cond, env)
            branch = stmt.then if self.as_bool(cond, stmt.loc) else stmt.orelse
            yield from self.exec_block(branch, env)
        elif isinstance(stmt, ml.While):
            while True:
                yield None
                cond = yield from self.eval_expr(stmt.cond, env)
                if not self.as_bool(cond, stmt.loc):
                    break
                yield from self.exec_block(stmt.body, env)
        elif isinstance(stmt, ml.Return):
            value = None
            if stmt.value is not None:
                value = yield from self.eval_expr(stmt.value, env)
            raise _ReturnSignal(value)
        elif isinstance(stmt, ml.ExprStmt):
            yield from self.eval_expr(stmt.expr, env)
        else:
            raise MiniRuntimeError(f"cannot execute {type(stmt).__name__}", stmt.loc)

    def exec_assign(self, stmt: ml.Assign, env: _Env):
        target = stmt.target
        if isinstance(target, ml.LocalRef):
            value = yield from self.eval_expr(stmt.value, env)
            env.locals[target.name] = value
            return
        if isinstance(target, ml.Index):
            seq = yield from self.eval_expr(target.obj, env)
            idx = yield from self.eval_expr(target.index, env)
            value = yield from self.eval_expr(stmt.value, env)
            self.index_check(seq, idx, target.loc)
            seq[idx] = value
            return
        # field set join point
        obj = yield from self.eval_expr(target.obj, env)
        value = yield from self.eval_expr(stmt.value, env)

        def write():
            self.field_write(obj, target.name, value, target.loc)
            return None
            yield  # pragma: no cover

        yield from self.dispatch_jp(stmt.sid, env.this, obj, (value,), write)

    # -- expressions

    def eval_expr(self, expr, env: _Env):
        if isinstance(expr, ml.IntLit):
            return expr.value
        if isinstance(expr, ml.BoolLit):
            return expr.value
        if isinstance(expr, ml.StrLit):
            return expr.value
        if isinstance(expr, ml.NullLit):
            return None
        if isinstance(expr, ml.ThisRef):
            return env.this
        if isinstance(expr, ml.LocalRef):
            return env.locals[expr.name]
        if isinstance(expr, ml.ListLit):
            items = []
            for item in expr.items:
                items.append((yield from self.eval_expr(item, env)))
            return items
        if isinstance(expr, ml.FieldGet):
            obj = yield from self.eval_expr(expr.obj, env)

            def read():
                return self.field_read(obj, expr.name, expr.loc)
                yield  # pragma: no cover

            result = yield from self.dispatch_jp(expr.sid, env.this, obj, (), read)
            return result
        if isinstance(expr, ml.Index):
            seq = yield from self.eval_expr(expr.obj, env)
            idx = yield from self.eval_expr(expr.index, env)
            self.index_check(seq, idx, expr.loc)
            return seq[idx]
        if isinstance(expr, ml.MethodCall):
            recv = yield from self.eval_expr(expr.obj, env)
            args = []
            for a in expr.args:
                args.append((yield from self.eval_expr(a, env)))

            def do_call():
                result = yield from self.invoke(recv, expr.name, args, expr.loc)
                return result

            result = yield from self.dispatch_jp(expr.sid, env.this, recv, args, do_call)
            return result
        if isinstance(expr, ml.BuiltinCall):
            result = yield from self.eval_builtin(expr, env)
            return result
        if isinstance(expr, ml.New):
            cls = self.classes[expr.class_name]
            args = []
            for a in expr.args:
                args.append((yield from self.eval_expr(a, env)))
            obj = yield from self.instantiate(cls, args, expr.loc)
            return obj
        if isinstance(expr, ml.Spawn):
            call = expr.call
            recv = yield from self.eval_expr(call.obj, env)
            args = []
            for a in call.args:
                args.append((yield from self.eval_expr(a, env)))
            if not isinstance(recv, (MObject, AspectInstance)):
                raise MiniRuntimeError("spawn needs an object receiver", expr.loc)
            tid = self.add_thread(self._spawned(recv, call.name, args, call.loc))
            self.emit("spawn", f"t{tid}")
            return tid
        if isinstance(expr, ml.Unary):
            value = yield from self.eval_expr(expr.operand, env)
            if expr.op == "!":
                return not self.as_bool(value, expr.loc)
            return -self.as_int(value, expr.loc)
        if isinstance(expr, ml.Binary):
            result = yield from self.eval_binary(expr, env)
            return result
        raise MiniRuntimeError(f"cannot evaluate {type(expr).__name__}", expr.loc)

    def eval_binary(self, expr: ml.Binary, env: _Env):
        op = expr.op
        left = yield from self.eval_expr(expr.left, env)
        if op == "&&":
            if not self.as_bool(left, expr.loc):
                return False
            right = yield from self.eval_expr(expr.right, env)
            return self.as_bool(right, expr.loc)
        if op == "||":
            if self.as_bool(left, expr.loc):
                return True
            right = yield from self.eval_expr(expr.right, env)
            return self.as_bool(right, expr.loc)
        right = yield from self.eval_expr(expr.right, env)
        if op == "==":
            return value_eq(left, right)
        if op == "!=":
            return not value_eq(left, right)
        if op == "+":
            if isinstance(left, str) and isinstance(right, str):
                return left + right
            return self.as_int(left, expr.loc) + self.as_int(right, expr.loc)
        a = self.as_int(left, expr.loc)
        b = self.as_int(right, expr.loc)
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op in ("/", "%"):
            if b == 0:
                raise MiniRuntimeError("division by zero", expr.loc)
            return a // b if op == "/" else a % b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise MiniRuntimeError(f"unknown operator {op!r}", expr.loc)

    def eval_builtin(self, expr: ml.BuiltinCall, env: _Env):
        name = expr.name
        args = []
        for a in expr.args:
            args.append((yield from self.eval_expr(a, env)))
        loc = expr.loc

        def need(n: int) -> None:
            if len(args) != n:
                raise MiniRuntimeError(f"{name} expects {n} argument(s)", loc)

        if name == "print":
            need(1)
            text = render_value(args[0])
            self.output.append(text)
            self.emit("print", text)
            return None
        if name == "len":
            need(1)
            if isinstance(args[0], (list, str)):
                return len(args[0])
            raise MiniRuntimeError("len expects a list or string", loc)
        if name == "push_back":
            need(2)
            if not isinstance(args[0], list):
                raise MiniRuntimeError("push_back expects a list", loc)
            args[0].append(args[1])
            return None
        if name == "format":
            if not args or not isinstance(args[0], str):
                raise MiniRuntimeError("format expects a template string", loc)
            try:
                return format_message(args[0], args[1:])
            except MiniRuntimeError as e:
                raise MiniRuntimeError(e.msg, loc) from None
        if name == "audit_emit":
            need(1)
            if not isinstance(args[0], str):
                raise MiniRuntimeError("audit_emit expects a string", loc)
            self.audit_lines.append(args[0])
            self.output.append(args[0])
            self.emit("audit", args[0])
            return None
        if name == "make_monitor":
            need(0)
            mon = Monitor(self.next_mon, loc)
            self.next_mon += 1
            return mon
        # monitor operations
        need(1)
        mon = args[0]
        if not isinstance(mon, Monitor):
            raise MiniRuntimeError(f"{name} expects a monitor", loc)
        if name == "monitor_acquire":
            yield from self._acquire(mon, env)
            return None
        if name == "monitor_release":
            self._release(mon, loc)
            return None
        if name == "monitor_wait":
            yield from self._wait(mon, loc)
            return None
        if name == "monitor_notify_all":
            self._notify_all(mon, loc)
            return None
        raise MiniRuntimeError(f"unknown builtin {name!r}", loc)

    # -- value helpers

    def field_read(self, obj, name: str, loc: Loc):
        if obj is None:
            raise MiniRuntimeError(f"null dereference reading {name!r}", loc)
        if isinstance(obj, (MObject, AspectInstance)):
            if name in obj.fields:
                return obj.fields[name]
            raise MiniRuntimeError(f"unknown field {name!r} on {obj.class_name}", loc)
        if isinstance(obj, JpInfo):
            if name in JpInfo.FIELDS:
                return getattr(obj, name)
            raise MiniRuntimeError(f"unknown join point attribute {name!r}", loc)
        raise MiniRuntimeError(f"unknown field {name!r} on {render_value(obj)}", loc)

    def field_write(self, obj, name: str, value, loc: Loc) -> None:
        if obj is None:
            raise MiniRuntimeError(f"null dereference writing {name!r}", loc)
        if isinstance(obj, (MObject, AspectInstance)):
            if name in obj.fields:
                obj.fields[name] = value
                return
            raise MiniRuntimeError(f"unknown field {name!r} on {obj.class_name}", loc)
        raise MiniRuntimeError(f"cannot write field {name!r} on {render_value(obj)}", loc)

    def index_check(self, seq, idx, loc: Loc) -> None:
        if not isinstance(seq, list):
            raise MiniRuntimeError("indexing expects a list", loc)
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise MiniRuntimeError("list index must be an int", loc)
        if idx < 0 or idx >= len(seq):
            raise MiniRuntimeError(f"list index {idx} out of range (len {len(seq)})", loc)

    def as_bool(self, value, loc: Loc) -> bool:
        if isinstance(value, bool):
            return value
        raise MiniRuntimeError(f"expected a bool, got {render_value(value)}", loc)

    def as_int(self, value, loc: Loc) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise MiniRuntimeError(f"expected an int, got {render_value(value)}", loc)
        return value


def run(
    unit: WovenUnit,
    entry: str = "Main.main",
    seed: int = 0,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ExecutionResult:
    """Interpret a woven unit to completion, deadlock, error, or step limit."""
    return Interp(unit, seed, step_limit).run(entry)
