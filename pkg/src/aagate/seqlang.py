"""Line-oriented pulse-program language and its timeline resolver.

A program is a sequence of lines, each holding at most one statement::

    param theta = pi/4          # named real parameter
    pulse a x -theta dur 5e-6   # channel, axis, flip angle (rad), duration (s)
    delay 1/(2*J)               # free evolution (s)

Angles are radians and durations seconds. ``pi`` and the coupling ``J``
(taken from the :class:`~aagate.sysmodel.SpinSystem`) are always in scope.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Union

from .sysmodel import AXIS_PHASES, PulseSpec, SpinSystem

KEYWORDS = ("param", "pulse", "delay")
RESERVED = frozenset(KEYWORDS) | {"dur", "pi", "J"}
CHANNELS = ("a", "b")


class SeqError(ValueError):
    """Diagnostic raised by the parser or resolver.

    Attributes
    ----------
    code : str
        Stable machine-readable category, e.g. ``'bad-axis'``.
    line, col : int or None
        1-based source position, when known.
    """

    def __init__(self, code: str, message: str, line: int | None = None, col: int | None = None):
        self.code = code
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{code}: {message}")


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float
    col: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Name:
    id: str
    col: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    col: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    col: int | None = field(default=None, compare=False)


Expr = Union[Num, Name, Neg, BinOp]


@dataclass(frozen=True)
class ParamDecl:
    name: str
    expr: Expr
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Pulse:
    channel: str
    axis: str
    angle: Expr
    duration: Expr | None = None
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Delay:
    duration: Expr
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class PulseProgram:
    params: tuple[ParamDecl, ...] = ()
    events: tuple[Pulse | Delay, ...] = ()

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]


# --------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/()=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SeqError("unexpected-character", f"unexpected character {text[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return toks


# --------------------------------------------------------------------------
# Parser

class _LineParser:
    def __init__(self, toks: list[_Tok], lineno: int, eol_col: int, declared: set[str] | None):
        self.toks = toks
        self.i = 0
        self.line = lineno
        self.eol_col = eol_col
        self.declared = declared

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise SeqError("syntax", "unexpected end of line", self.line, self.eol_col)
        self.i += 1
        return tok

    def col(self) -> int:
        tok = self.peek()
        return tok.col if tok else self.eol_col

    def error(self, code: str, msg: str, col: int | None = None):
        return SeqError(code, msg, self.line, self.col() if col is None else col)

    def at_expr_end(self) -> bool:
        tok = self.peek()
        return tok is None or (tok.kind == "ident" and tok.text == "dur")

    # expr := term (('+' | '-') term)*
    def expr(self) -> Expr:
        if self.at_expr_end():
            raise self.error("missing-expression", "expected an expression")
        node = self.term()
        while (tok := self.peek()) is not None and tok.kind == "op" and tok.text in "+-":
            self.next()
            node = BinOp(tok.text, node, self.term(), tok.col)
        return node

    # term := unary (('*' | '/') unary)*
    def term(self) -> Expr:
        node = self.unary()
        while (tok := self.peek()) is not None and tok.kind == "op" and tok.text in "*/":
            self.next()
            node = BinOp(tok.text, node, self.unary(), tok.col)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "-":
            self.next()
            return Neg(self.unary(), tok.col)
        return self.atom()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok is None or (tok.kind == "ident" and tok.text == "dur"):
            raise self.error("missing-expression", "expected a number, name or '('")
        self.next()
        if tok.kind == "number":
            return Num(float(tok.text), tok.col)
        if tok.kind == "ident":
            if tok.text in KEYWORDS:
                raise SeqError("syntax", f"keyword {tok.text!r} inside expression", self.line, tok.col)
            if self.declared is not None and tok.text not in self.declared and tok.text not in ("pi", "J"):
                raise SeqError("undeclared-identifier", f"{tok.text!r} is not a declared param", self.line, tok.col)
            return Name(tok.text, tok.col)
        if tok.text == "(":
            node = self.expr()
            close = self.peek()
            if close is None or close.text != ")":
                raise self.error("unbalanced-paren", f"'(' at column {tok.col} is never closed")
            self.next()
            return node
        if tok.text == ")":
            raise SeqError("unbalanced-paren", "unmatched ')'", self.line, tok.col)
        raise SeqError("syntax", f"unexpected {tok.text!r}", self.line, tok.col)

    def finish(self):
        tok = self.peek()
        if tok is not None:
            if tok.text == ")":
                raise SeqError("unbalanced-paren", "unmatched ')'", self.line, tok.col)
            raise SeqError("syntax", f"unexpected {tok.text!r} after statement", self.line, tok.col)

    def axis(self) -> str:
        tok = self.peek()
        if tok is None:
            raise self.error("bad-axis", "expected an axis (x, y, -x, -y)")
        if tok.kind == "ident" and tok.text in ("x", "y"):
            self.next()
            return tok.text
        if tok.kind == "op" and tok.text == "-" and self.i + 1 < len(self.toks):
            nxt = self.toks[self.i + 1]
            if nxt.kind == "ident" and nxt.text in ("x", "y") and nxt.col == tok.col + 1:
                self.i += 2
                return "-" + nxt.text
        raise self.error("bad-axis", f"invalid axis {tok.text!r}; expected x, y, -x or -y")


def _strip_comment(raw: str) -> str:
    idx = raw.find("#")
    return raw if idx < 0 else raw[:idx]


def parse(text: str) -> PulseProgram:
    """Parse program text into a :class:`PulseProgram`.

    Raises
    ------
    SeqError
        With ``line``/``col`` of the offending token.
    """
    params: list[ParamDecl] = []
    events: list[Pulse | Delay] = []
    declared: set[str] = set()
    if text.startswith("﻿"):
        text = text[1:]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).rstrip()
        toks = _tokenize(body, lineno)
        if not toks:
            continue
        p = _LineParser(toks, lineno, len(body) + 1, declared)
        head = p.next()
        if head.kind != "ident" or head.text not in KEYWORDS:
            raise SeqError("unknown-keyword", f"unknown statement {head.text!r}", lineno, head.col)
        if head.text == "param":
            name = p.peek()
            if name is None or name.kind != "ident":
                raise p.error("syntax", "expected a parameter name")
            p.next()
            if name.text in RESERVED:
                raise SeqError("reserved-name", f"{name.text!r} is reserved", lineno, name.col)
            if name.text in declared:
                raise SeqError("duplicate-param", f"param {name.text!r} already declared", lineno, name.col)
            eq = p.peek()
            if eq is None or eq.text != "=":
                raise p.error("syntax", "expected '=' after parameter name")
            p.next()
            expr = p.expr()
            p.finish()
            declared.add(name.text)
            params.append(ParamDecl(name.text, expr, lineno))
        elif head.text == "pulse":
            ch = p.peek()
            if ch is None or ch.kind != "ident" or ch.text not in CHANNELS:
                raise p.error("bad-channel", "expected channel 'a' or 'b'")
            p.next()
            axis = p.axis()
            angle = p.expr()
            dur = None
            tok = p.peek()
            if tok is not None and tok.text == "dur":
                p.next()
                dur = p.expr()
            p.finish()
            events.append(Pulse(ch.text, axis, angle, dur, lineno))
        else:
            expr = p.expr()
            p.finish()
            events.append(Delay(expr, lineno))
    return PulseProgram(tuple(params), tuple(events))


def parse_expr(text: str) -> Expr:
    """Parse a standalone arithmetic expression (identifiers unchecked)."""
    toks = _tokenize(text, 1)
    p = _LineParser(toks, 1, len(text) + 1, None)
    node = p.expr()
    p.finish()
    return node


def eval_expr(expr: Expr | str, bindings: Mapping[str, float]) -> float:
    """Evaluate an expression; ``pi`` is always bound.

    Raises
    ------
    SeqError
        ``unbound-identifier`` or ``division-by-zero``.
    """
    if isinstance(expr, str):
        expr = parse_expr(expr)
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Name):
        if expr.id == "pi":
            return math.pi
        try:
            return float(bindings[expr.id])
        except KeyError:
            raise SeqError("unbound-identifier", f"{expr.id!r} has no value", None, expr.col) from None
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, bindings)
    left = eval_expr(expr.left, bindings)
    right = eval_expr(expr.right, bindings)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0:
        raise SeqError("division-by-zero", "division by zero", None, expr.col)
    return left / right


# --------------------------------------------------------------------------
# Rendering

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def render_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Name):
        return expr.id
    if isinstance(expr, Neg):
        inner = render_expr(expr.operand)
        if isinstance(expr.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    prec = _PREC[expr.op]
    left = render_expr(expr.left)
    if isinstance(expr.left, BinOp) and _PREC[expr.left.op] < prec:
        left = f"({left})"
    right = render_expr(expr.right)
    if isinstance(expr.right, BinOp) and _PREC[expr.right.op] <= prec:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def render(prog: PulseProgram) -> str:
    """Render a program back to source text that reparses to the same AST."""
    lines = [f"param {p.name} = {render_expr(p.expr)}" for p in prog.params]
    for ev in prog.events:
        if isinstance(ev, Pulse):
            line = f"pulse {ev.channel} {ev.axis} {render_expr(ev.angle)}"
            if ev.duration is not None:
                line += f" dur {render_expr(ev.duration)}"
        else:
            line = f"delay {render_expr(ev.duration)}"
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


# --------------------------------------------------------------------------
# Timeline

@dataclass(frozen=True)
class Segment:
    start: float
    kind: str  # 'pulse' or 'delay'
    duration: float
    pulse: PulseSpec | None = None

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class EventTimeline:
    segments: tuple[Segment, ...] = ()

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def pulses(self) -> list[PulseSpec]:
        return [s.pulse for s in self.segments if s.kind == "pulse"]

    @property
    def flip_angles(self) -> list[float]:
        return [p.angle for p in self.pulses]

    def instantaneous(self) -> "EventTimeline":
        """Copy with every pulse collapsed to an ideal zero-length rotation."""
        specs = []
        for s in self.segments:
            if s.kind == "pulse":
                specs.append(("pulse", 0.0, s.pulse.with_duration(0.0)))
            else:
                specs.append(("delay", s.duration, None))
        return _build_timeline(specs)


def _build_timeline(specs) -> EventTimeline:
    t = 0.0
    segs = []
    for kind, dur, pulse in specs:
        segs.append(Segment(t, kind, dur, pulse))
        t += dur
    return EventTimeline(tuple(segs))


def resolve(
    prog: PulseProgram,
    overrides: Mapping[str, float] | None = None,
    sys: SpinSystem | None = None,
    instantaneous: bool = False,
) -> EventTimeline:
    """Evaluate a program into absolute-time segments.

    Parameters
    ----------
    prog : PulseProgram
    overrides : mapping, optional
        New values for declared params (e.g. ``{"theta": 0.3}``).
    sys : SpinSystem, optional
        Supplies ``J``; defaults to chloroform.
    instantaneous : bool
        Ignore ``dur`` clauses and treat every pulse as ideal.
    """
    sys = sys or SpinSystem()
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(prog.param_names)
    if unknown:
        raise SeqError("unknown-param", f"override for undeclared param(s) {sorted(unknown)}")
    env: dict[str, float] = {"J": sys.J}

    def ev(expr, line):
        try:
            return eval_expr(expr, env)
        except SeqError as exc:
            raise SeqError(exc.code, exc.message, line, exc.col) from None

    for decl in prog.params:
        env[decl.name] = overrides[decl.name] if decl.name in overrides else ev(decl.expr, decl.line)

    specs = []
    for e in prog.events:
        if isinstance(e, Pulse):
            dur = 0.0 if (e.duration is None or instantaneous) else ev(e.duration, e.line)
            if dur < 0:
                raise SeqError("negative-duration", f"pulse duration {dur:g} s < 0", e.line)
            pulse = PulseSpec(e.channel, AXIS_PHASES[e.axis], ev(e.angle, e.line), dur)
            specs.append(("pulse", dur, pulse))
        else:
            dur = ev(e.duration, e.line)
            if dur < 0:
                raise SeqError("negative-duration", f"delay {dur:g} s < 0", e.line)
            specs.append(("delay", dur, None))
    return _build_timeline(specs)


def load_program(path: str | Path) -> PulseProgram:
    return parse(Path(path).read_text(encoding="utf-8"))


def fig2_source() -> str:
    """Source of the bundled controlled geometric-phase gate program."""
    return resources.files("aagate").joinpath("programs/fig2.seq").read_text(encoding="utf-8")


def fig2_program() -> PulseProgram:
    return parse(fig2_source())


def strip_durations(prog: PulseProgram) -> PulseProgram:
    """Drop every ``dur`` clause."""
    return replace(prog, events=tuple(
        replace(e, duration=None) if isinstance(e, Pulse) else e for e in prog.events
    ))
