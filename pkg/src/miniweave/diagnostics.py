"""Source positions and error types shared by every front-end and the runtime."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Loc:
    """A source position. `col` is 1-based; 0 means column unknown."""

    path: str
    line: int
    col: int = 0

    def __str__(self) -> str:
        return f"{self.path}:{self.line}"


class CompileError(Exception):
    """Any error raised between reading sources and producing a woven unit."""

    def __init__(self, msg: str, loc: Loc | None = None):
        self.msg = msg
        self.loc = loc
        super().__init__(f"{loc}: {msg}" if loc is not None else msg)


class ParseError(CompileError):
    """Syntax or annotation-placement error with a line/column position."""


class MiniRuntimeError(Exception):
    """Raised by the interpreter; aborts the run with a runtime-error status."""

    def __init__(self, msg: str, loc: Loc | None = None):
        self.msg = msg
        self.loc = loc
        super().__init__(f"{loc}: {msg}" if loc is not None else msg)
