"""MiniLang front-end: AST, parser, and the identifier-resolution pass.

MiniLang is a small dynamically typed class language (`.ml0`). A program
is a set of classes; each class has fields with optional initializers, an
optional constructor, an optional static block, and methods. Statements
are var/assign/if/while/return/expression; expressions cover literals,
lists, `new`, member access, method calls, `spawn`, and a fixed set of
builtins. Declarations may carry `@hideField` / `@hideMethod` /
`@hideType` annotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lexer
from .diagnostics import CompileError, Loc, ParseError
from .lexer import EOF, FLOAT, INT, NAME, PUNCT, STRING, TokenStream

BUILTINS = {
    "print",
    "len",
    "push_back",
    "make_monitor",
    "monitor_acquire",
    "monitor_release",
    "monitor_wait",
    "monitor_notify_all",
    "format",
    "audit_emit",
}

RESERVED = {
    "class",
    "def",
    "var",
    "static",
    "constructor",
    "if",
    "else",
    "while",
    "return",
    "new",
    "spawn",
    "true",
    "false",
    "null",
    "this",
}


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass
class Annotation:
    name: str
    args: list
    loc: Loc


@dataclass
class Node:
    loc: Loc


# -- expressions


@dataclass
class IntLit(Node):
    value: int


@dataclass
class BoolLit(Node):
    value: bool


@dataclass
class StrLit(Node):
    value: str


@dataclass
class NullLit(Node):
    pass


@dataclass
class ListLit(Node):
    items: list


@dataclass
class ThisRef(Node):
    pass


@dataclass
class LocalRef(Node):
    name: str


@dataclass
class FieldGet(Node):
    obj: Node
    name: str
    sid: int | None = None  # get-shadow id, assigned at extraction


@dataclass
class Index(Node):
    obj: Node
    index: Node


@dataclass
class MethodCall(Node):
    obj: Node
    name: str
    args: list
    sid: int | None = None  # call-shadow id


@dataclass
class BuiltinCall(Node):
    name: str
    args: list


@dataclass
class New(Node):
    class_name: str
    args: list


@dataclass
class Spawn(Node):
    call: MethodCall


@dataclass
class Unary(Node):
    op: str
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


# -- statements


@dataclass
class VarDecl(Node):
    name: str
    init: Node | None


@dataclass
class Assign(Node):
    target: Node  # LocalRef | FieldGet | Index
    value: Node
    sid: int | None = None  # set-shadow id when target is a FieldGet


@dataclass
class If(Node):
    cond: Node
    then: list
    orelse: list


@dataclass
class While(Node):
    cond: Node
    body: list


@dataclass
class Return(Node):
    value: Node | None


@dataclass
class ExprStmt(Node):
    expr: Node


# -- declarations


@dataclass
class FieldDecl:
    name: str
    init: Node | None
    annotations: list[Annotation]
    loc: Loc


@dataclass
class MethodDecl:
    name: str
    params: list[str]
    body: list
    annotations: list[Annotation]
    loc: Loc
    exec_sid: int | None = None
    # function-scoped locals, filled in by resolution; the interpreter hoists
    # them to null so a var declared in one branch reads as null elsewhere
    local_names: tuple[str, ...] = ()


@dataclass
class ClassDecl:
    name: str
    fields: list[FieldDecl]
    methods: list[MethodDecl]
    ctor: MethodDecl | None
    static_block: MethodDecl | None
    annotations: list[Annotation]
    loc: Loc
    pre_sid: int | None = None
    init_sid: int | None = None
    static_sid: int | None = None

    def field_names(self) -> set[str]:
        return {f.name for f in self.fields}

    def method(self, name: str) -> MethodDecl | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass
class Program:
    classes: list[ClassDecl] = field(default_factory=list)

    def by_name(self) -> dict[str, ClassDecl]:
        return {c.name: c for c in self.classes}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class MiniParser:
    """Recursive-descent parser for MiniLang; subclassed by the aspect parser."""

    def __init__(self, text: str, path: str):
        self.ts = TokenStream(lexer.tokenize(text, path), path)
        self.path = path

    # -- annotations

    def parse_annotations(self) -> list[Annotation]:
        anns = []
        while self.ts.at_punct("@"):
            loc = self.ts.loc()
            self.ts.advance()
            name = self.ts.expect(NAME).text
            args: list = []
            if self.ts.accept(PUNCT, "("):
                args = self.parse_annotation_args(name)
                self.ts.expect(PUNCT, ")")
            else:
                args = None  # bare annotation: defaults apply
            anns.append(Annotation(name, args, loc))
        return anns

    def parse_annotation_args(self, name: str) -> list:
        args: list = []
        if self.ts.at_punct(")"):
            return args
        while True:
            args.append(self.parse_annotation_arg())
            if not self.ts.accept(PUNCT, ","):
                return args

    def parse_annotation_arg(self):
        loc = self.ts.loc()
        if self.ts.at(NAME):
            name = self.ts.advance().text
            if self.ts.accept(PUNCT, "="):
                return (name, self.parse_annotation_value())
            return name
        return self.parse_annotation_value()

    def parse_annotation_value(self):
        neg = self.ts.accept(PUNCT, "-") is not None
        tok = self.ts.cur
        if tok.kind == INT:
            self.ts.advance()
            return -int(tok.text) if neg else int(tok.text)
        if tok.kind == FLOAT:
            self.ts.advance()
            return -float(tok.text) if neg else float(tok.text)
        if neg:
            raise self.ts.error("expected a number after '-'")
        if tok.kind == STRING:
            self.ts.advance()
            return tok.text
        if tok.kind == NAME and tok.text in ("true", "false"):
            self.ts.advance()
            return tok.text == "true"
        raise self.ts.error("bad annotation argument")

    # -- declarations

    def parse_program(self) -> Program:
        classes = []
        while not self.ts.at(EOF):
            anns = self.parse_annotations()
            if not self.ts.at_name("class"):
                raise self.ts.error("expected 'class'")
            classes.append(self.parse_class(anns))
        prog = Program(classes)
        self.check_duplicates(prog)
        return prog

    def check_duplicates(self, prog: Program) -> None:
        seen: dict[str, Loc] = {}
        for c in prog.classes:
            if c.name in seen:
                raise ParseError(f"duplicate class {c.name!r}", c.loc)
            seen[c.name] = c.loc

    def parse_class(self, anns: list[Annotation]) -> ClassDecl:
        loc = self.ts.loc()
        self.ts.expect(NAME, "class")
        name = self.parse_decl_name()
        self.ts.expect(PUNCT, "{")
        fields: list[FieldDecl] = []
        methods: list[MethodDecl] = []
        ctor: MethodDecl | None = None
        static_block: MethodDecl | None = None
        while not self.ts.accept(PUNCT, "}"):
            member_anns = self.parse_annotations()
            mloc = self.ts.loc()
            if self.ts.at_name("var"):
                fields.append(self.parse_field(member_anns))
            elif self.ts.at_name("def"):
                m = self.parse_method(member_anns)
                if any(prev.name == m.name for prev in methods):
                    raise ParseError(f"duplicate method {name}.{m.name!r}", m.loc)
                methods.append(m)
            elif self.ts.at_name("constructor"):
                if member_anns:
                    raise ParseError("annotations are not allowed on constructors", mloc)
                if ctor is not None:
                    raise ParseError("duplicate constructor", mloc)
                self.ts.advance()
                self.ts.expect(PUNCT, "(")
                params = self.parse_params()
                body = self.parse_block()
                ctor = MethodDecl("constructor", params, body, [], mloc)
            elif self.ts.at_name("static"):
                if member_anns:
                    raise ParseError("annotations are not allowed on static blocks", mloc)
                if static_block is not None:
                    raise ParseError("duplicate static block", mloc)
                self.ts.advance()
                body = self.parse_block()
                static_block = MethodDecl("static", [], body, [], mloc)
            else:
                raise self.ts.error("expected a field, method, constructor, or static block")
        seen_fields: set[str] = set()
        for f in fields:
            if f.name in seen_fields:
                raise ParseError(f"duplicate field {name}.{f.name!r}", f.loc)
            seen_fields.add(f.name)
        return ClassDecl(name, fields, methods, ctor, static_block, anns, loc)

    def parse_decl_name(self) -> str:
        tok = self.ts.expect(NAME)
        if tok.text in RESERVED:
            raise ParseError(f"{tok.text!r} is a reserved word", tok.loc(self.path))
        return tok.text

    def parse_field(self, anns: list[Annotation]) -> FieldDecl:
        loc = self.ts.loc()
        self.ts.expect(NAME, "var")
        name = self.parse_decl_name()
        init = None
        if self.ts.accept(PUNCT, "="):
            init = self.parse_expr()
        self.ts.expect(PUNCT, ";")
        return FieldDecl(name, init, anns, loc)

    def parse_method(self, anns: list[Annotation]) -> MethodDecl:
        loc = self.ts.loc()
        self.ts.expect(NAME, "def")
        name = self.parse_decl_name()
        self.ts.expect(PUNCT, "(")
        params = self.parse_params()
        body = self.parse_block()
        return MethodDecl(name, params, body, anns, loc)

    def parse_params(self) -> list[str]:
        params: list[str] = []
        if not self.ts.at_punct(")"):
            while True:
                params.append(self.parse_decl_name())
                if not self.ts.accept(PUNCT, ","):
                    break
        self.ts.expect(PUNCT, ")")
        if len(set(params)) != len(params):
            raise self.ts.error("duplicate parameter name")
        return params

    # -- statements

    def parse_block(self) -> list:
        self.ts.expect(PUNCT, "{")
        stmts = []
        while not self.ts.accept(PUNCT, "}"):
            stmts.append(self.parse_stmt())
        return stmts

    def parse_stmt(self) -> Node:
        loc = self.ts.loc()
        if self.ts.at_name("var"):
            self.ts.advance()
            name = self.parse_decl_name()
            init = None
            if self.ts.accept(PUNCT, "="):
                init = self.parse_expr()
            self.ts.expect(PUNCT, ";")
            return VarDecl(loc, name, init)
        if self.ts.at_name("if"):
            return self.parse_if()
        if self.ts.at_name("while"):
            self.ts.advance()
            self.ts.expect(PUNCT, "(")
            cond = self.parse_expr()
            self.ts.expect(PUNCT, ")")
            body = self.parse_block()
            return While(loc, cond, body)
        if self.ts.at_name("return"):
            self.ts.advance()
            value = None
            if not self.ts.at_punct(";"):
                value = self.parse_expr()
            self.ts.expect(PUNCT, ";")
            return Return(loc, value)
        expr = self.parse_expr()
        if self.ts.accept(PUNCT, "="):
            if not isinstance(expr, (LocalRef, FieldGet, Index)):
                raise ParseError("cannot assign to this expression", loc)
            value = self.parse_expr()
            self.ts.expect(PUNCT, ";")
            return Assign(loc, expr, value)
        self.ts.expect(PUNCT, ";")
        return ExprStmt(loc, expr)

    def parse_if(self) -> Node:
        loc = self.ts.loc()
        self.ts.expect(NAME, "if")
        self.ts.expect(PUNCT, "(")
        cond = self.parse_expr()
        self.ts.expect(PUNCT, ")")
        then = self.parse_block()
        orelse: list = []
        if self.ts.accept(NAME, "else"):
            if self.ts.at_name("if"):
                orelse = [self.parse_if()]
            else:
                orelse = self.parse_block()
        return If(loc, cond, then, orelse)

    # -- expressions (precedence climbing)

    def parse_expr(self) -> Node:
        return self.parse_or()

    def parse_or(self) -> Node:
        left = self.parse_and()
        while self.ts.at_punct("||"):
            loc = self.ts.loc()
            self.ts.advance()
            left = Binary(loc, "||", left, self.parse_and())
        return left

    def parse_and(self) -> Node:
        left = self.parse_equality()
        while self.ts.at_punct("&&"):
            loc = self.ts.loc()
            self.ts.advance()
            left = Binary(loc, "&&", left, self.parse_equality())
        return left

    def parse_equality(self) -> Node:
        left = self.parse_relational()
        while self.ts.at_punct("==") or self.ts.at_punct("!="):
            loc = self.ts.loc()
            op = self.ts.advance().text
            left = Binary(loc, op, left, self.parse_relational())
        return left

    def parse_relational(self) -> Node:
        left = self.parse_additive()
        while any(self.ts.at_punct(p) for p in ("<", "<=", ">", ">=")):
            loc = self.ts.loc()
            op = self.ts.advance().text
            left = Binary(loc, op, left, self.parse_additive())
        return left

    def parse_additive(self) -> Node:
        left = self.parse_multiplicative()
        while self.ts.at_punct("+") or self.ts.at_punct("-"):
            loc = self.ts.loc()
            op = self.ts.advance().text
            left = Binary(loc, op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> Node:
        left = self.parse_unary()
        while any(self.ts.at_punct(p) for p in ("*", "/", "%")):
            loc = self.ts.loc()
            op = self.ts.advance().text
            left = Binary(loc, op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Node:
        loc = self.ts.loc()
        if self.ts.accept(PUNCT, "!"):
            return Unary(loc, "!", self.parse_unary())
        if self.ts.accept(PUNCT, "-"):
            return Unary(loc, "-", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        expr = self.parse_primary()
        while True:
            if self.ts.accept(PUNCT, "."):
                loc = self.ts.loc()
                name = self.ts.expect(NAME).text
                if self.ts.accept(PUNCT, "("):
                    args = self.parse_args()
                    expr = MethodCall(loc, expr, name, args)
                else:
                    expr = FieldGet(loc, expr, name)
            elif self.ts.at_punct("["):
                loc = self.ts.loc()
                self.ts.advance()
                index = self.parse_expr()
                self.ts.expect(PUNCT, "]")
                expr = Index(loc, expr, index)
            else:
                return expr

    def parse_args(self) -> list:
        args = []
        if not self.ts.at_punct(")"):
            while True:
                args.append(self.parse_expr())
                if not self.ts.accept(PUNCT, ","):
                    break
        self.ts.expect(PUNCT, ")")
        return args

    def parse_primary(self) -> Node:
        loc = self.ts.loc()
        tok = self.ts.cur
        if tok.kind == INT:
            self.ts.advance()
            return IntLit(loc, int(tok.text))
        if tok.kind == FLOAT:
            raise self.ts.error("float literals are not part of the language")
        if tok.kind == STRING:
            self.ts.advance()
            return StrLit(loc, tok.text)
        if self.ts.at_punct("("):
            self.ts.advance()
            expr = self.parse_expr()
            self.ts.expect(PUNCT, ")")
            return expr
        if self.ts.at_punct("["):
            self.ts.advance()
            items = []
            if not self.ts.at_punct("]"):
                while True:
                    items.append(self.parse_expr())
                    if not self.ts.accept(PUNCT, ","):
                        break
            self.ts.expect(PUNCT, "]")
            return ListLit(loc, items)
        if tok.kind == NAME:
            word = tok.text
            if word == "true":
                self.ts.advance()
                return BoolLit(loc, True)
            if word == "false":
                self.ts.advance()
                return BoolLit(loc, False)
            if word == "null":
                self.ts.advance()
                return NullLit(loc)
            if word == "this":
                self.ts.advance()
                return ThisRef(loc)
            if word == "new":
                self.ts.advance()
                cls = self.ts.expect(NAME).text
                self.ts.expect(PUNCT, "(")
                args = self.parse_args()
                return New(loc, cls, args)
            if word == "spawn":
                self.ts.advance()
                call = self.parse_postfix()
                if not isinstance(call, MethodCall):
                    raise ParseError("spawn expects a method call", loc)
                return Spawn(loc, call)
            self.ts.advance()
            if self.ts.accept(PUNCT, "("):
                args = self.parse_args()
                return BuiltinCall(loc, word, args)
            return LocalRef(loc, word)
        raise self.ts.error("expected an expression")


def parse_base(text: str, path: str) -> Program:
    """Parse MiniLang source into a Program. Raises ParseError with file:line."""
    parser = MiniParser(text, path)
    return parser.parse_program()


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


def _collect_locals(body: list, acc: set[str]) -> None:
    for stmt in body:
        if isinstance(stmt, VarDecl):
            acc.add(stmt.name)
        elif isinstance(stmt, If):
            _collect_locals(stmt.then, acc)
            _collect_locals(stmt.orelse, acc)
        elif isinstance(stmt, While):
            _collect_locals(stmt.body, acc)


class Resolver:
    """Rewrites bare identifiers and checks that every name resolves.

    A bare name inside a method body resolves to a parameter or local first,
    then to a field of the enclosing class (rewritten to an implicit
    `this.name` access). Anything else is a compile error. Methods are
    function-scoped: a `var` anywhere in the body introduces the name for
    the whole body.
    """

    def __init__(self, program: Program, class_names: set[str] | None = None):
        self.program = program
        self.class_names = class_names if class_names is not None else set(program.by_name())

    def run(self) -> None:
        for cls in self.program.classes:
            for f in cls.fields:
                if f.init is not None:
                    f.init = self.resolve_expr(f.init, cls, set(), has_this=True)
            for m in cls.methods:
                self.resolve_method(m, cls, has_this=True)
            if cls.ctor is not None:
                self.resolve_method(cls.ctor, cls, has_this=True)
            if cls.static_block is not None:
                self.resolve_method(cls.static_block, cls, has_this=False)

    def resolve_method(self, m: MethodDecl, cls, has_this: bool) -> None:
        scope = set(m.params)
        _collect_locals(m.body, scope)
        m.local_names = tuple(sorted(scope - set(m.params)))
        self.resolve_block(m.body, cls, scope, has_this)

    def resolve_block(self, body: list, cls, scope: set[str], has_this: bool) -> None:
        for i, stmt in enumerate(body):
            body[i] = self.resolve_stmt(stmt, cls, scope, has_this)

    def resolve_stmt(self, stmt, cls, scope: set[str], has_this: bool):
        if isinstance(stmt, VarDecl):
            if stmt.init is not None:
                stmt.init = self.resolve_expr(stmt.init, cls, scope, has_this)
            return stmt
        if isinstance(stmt, Assign):
            stmt.target = self.resolve_expr(stmt.target, cls, scope, has_this)
            stmt.value = self.resolve_expr(stmt.value, cls, scope, has_this)
            if isinstance(stmt.target, (MethodCall, BuiltinCall)):
                raise CompileError("cannot assign to a call", stmt.loc)
            return stmt
        if isinstance(stmt, If):
            stmt.cond = self.resolve_expr(stmt.cond, cls, scope, has_this)
            self.resolve_block(stmt.then, cls, scope, has_this)
            self.resolve_block(stmt.orelse, cls, scope, has_this)
            return stmt
        if isinstance(stmt, While):
            stmt.cond = self.resolve_expr(stmt.cond, cls, scope, has_this)
            self.resolve_block(stmt.body, cls, scope, has_this)
            return stmt
        if isinstance(stmt, Return):
            if stmt.value is not None:
                stmt.value = self.resolve_expr(stmt.value, cls, scope, has_this)
            return stmt
        if isinstance(stmt, ExprStmt):
            stmt.expr = self.resolve_expr(stmt.expr, cls, scope, has_this)
            return stmt
        raise CompileError(f"unknown statement {type(stmt).__name__}")

    def field_of(self, cls, name: str) -> bool:
        return name in cls.field_names()

    def resolve_expr(self, expr, cls, scope: set[str], has_this: bool):
        if isinstance(expr, (IntLit, BoolLit, StrLit, NullLit)):
            return expr
        if isinstance(expr, ListLit):
            expr.items = [self.resolve_expr(e, cls, scope, has_this) for e in expr.items]
            return expr
        if isinstance(expr, ThisRef):
            if not has_this:
                raise CompileError("'this' is not available here", expr.loc)
            return expr
        if isinstance(expr, LocalRef):
            if expr.name in scope:
                return expr
            if has_this and self.field_of(cls, expr.name):
                return FieldGet(expr.loc, ThisRef(expr.loc), expr.name)
            raise CompileError(f"unresolved name {expr.name!r}", expr.loc)
        if isinstance(expr, FieldGet):
            expr.obj = self.resolve_expr(expr.obj, cls, scope, has_this)
            return expr
        if isinstance(expr, Index):
            expr.obj = self.resolve_expr(expr.obj, cls, scope, has_this)
            expr.index = self.resolve_expr(expr.index, cls, scope, has_this)
            return expr
        if isinstance(expr, MethodCall):
            expr.obj = self.resolve_expr(expr.obj, cls, scope, has_this)
            expr.args = [self.resolve_expr(a, cls, scope, has_this) for a in expr.args]
            return expr
        if isinstance(expr, BuiltinCall):
            if expr.name not in BUILTINS:
                raise CompileError(f"unknown function {expr.name!r}", expr.loc)
            expr.args = [self.resolve_expr(a, cls, scope, has_this) for a in expr.args]
            return expr
        if isinstance(expr, New):
            if expr.class_name not in self.class_names:
                raise CompileError(f"unknown class {expr.class_name!r}", expr.loc)
            expr.args = [self.resolve_expr(a, cls, scope, has_this) for a in expr.args]
            return expr
        if isinstance(expr, Spawn):
            expr.call = self.resolve_expr(expr.call, cls, scope, has_this)
            return expr
        if isinstance(expr, Unary):
            expr.operand = self.resolve_expr(expr.operand, cls, scope, has_this)
            return expr
        if isinstance(expr, Binary):
            expr.left = self.resolve_expr(expr.left, cls, scope, has_this)
            expr.right = self.resolve_expr(expr.right, cls, scope, has_this)
            return expr
        raise CompileError(f"unknown expression {type(expr).__name__}")


def resolve_program(program: Program, extra_class_names: set[str] = frozenset()) -> None:
    names = set(program.by_name()) | set(extra_class_names)
    Resolver(program, names).run()
