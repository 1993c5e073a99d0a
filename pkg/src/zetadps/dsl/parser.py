"""Parser and printer for the signal-class surface language.

Supported subset::

    @timing("every 5 sec base 00:00:00") @mode("union") @checkpointInterval(300)
    signal class Traffic {
      persistent signal int http init 0, https init 0;
      signal int total = http + https;
      Upstream slot;                      // upstream field
      peak() { max(http, https); }        // method with an expression body
    }
    network { let w = new Traffic("WebServer"); ... }
    main { m.setUpstreams(m.t, new Traffic("FileServer")); ... }

``//`` and ``/* */`` comments are ignored.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Tuple

from ..errors import DSLSyntaxError
from .timing import parse_timing

# ------------------------------------------------------------------ surface AST


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Str:
    text: str


@dataclass(frozen=True)
class Member:
    recv: object
    name: str


@dataclass(frozen=True)
class Call:
    """``f(args)`` when ``recv`` is None, else ``recv.f(args)``."""
    recv: Optional[object]
    name: str
    args: Tuple[object, ...] = ()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class New:
    cls: str
    id: str
    args: Tuple[object, ...] = ()


@dataclass(frozen=True)
class SignalDecl:
    name: str
    persistent: bool
    type: Optional[str] = None
    body: Optional[object] = None
    init: Optional[str] = None


@dataclass(frozen=True)
class UpstreamField:
    slot: str
    cls: str


@dataclass(frozen=True)
class MethodDecl:
    name: str
    body: object


@dataclass(frozen=True)
class SignalClassDecl:
    name: str
    mode: Optional[str] = None
    timing: Optional[object] = None
    checkpoint_interval: Optional[int] = None
    signals: Tuple[SignalDecl, ...] = ()
    upstreams: Tuple[UpstreamField, ...] = ()
    methods: Tuple[MethodDecl, ...] = ()

    @property
    def persistent_signals(self):
        return tuple(s for s in self.signals if s.persistent)

    @property
    def derived_signals(self):
        return tuple(s for s in self.signals if not s.persistent)


@dataclass(frozen=True)
class Let:
    var: str
    value: New


@dataclass(frozen=True)
class ExprStmt:
    expr: object


@dataclass(frozen=True)
class Program:
    classes: Tuple[SignalClassDecl, ...] = ()
    network: Tuple[Let, ...] = ()
    main: Tuple[object, ...] = ()
    has_main: bool = False


# ------------------------------------------------------------------- lexer

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/<>(){};,.=@!])
""", re.VERBOSE | re.DOTALL)

KEYWORDS = {"signal", "class", "persistent", "network", "main", "let", "new", "init"}


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(src):
    toks = []
    i = 0
    while i < len(src):
        m = _TOKEN.match(src, i)
        if not m:
            raise DSLSyntaxError(f"unexpected character {src[i]!r}", len(src[:i].encode()))
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            if kind == "name" and text in KEYWORDS:
                kind = "kw"
            toks.append(Tok(kind, text, i))
        i = m.end()
    toks.append(Tok("eof", "", len(src)))
    return toks


def _unquote(text):
    return re.sub(r"\\(.)", r"\1", text[1:-1])


# ------------------------------------------------------------------ parser

_BINARY = [("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/")]


class _Parser:
    def __init__(self, src):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0

    # helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return DSLSyntaxError(msg, len(self.src[:tok.pos].encode()))

    def at(self, text, k=0):
        t = self.peek(k)
        return t.kind in ("op", "kw") and t.text == text

    def eat(self, text):
        if not self.at(text):
            got = self.peek().text or "end of input"
            raise self.error(f"expected {text!r}, got {got!r}")
        self.i += 1

    def name(self):
        t = self.peek()
        if t.kind != "name":
            raise self.error(f"expected a name, got {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def string(self):
        t = self.peek()
        if t.kind != "str":
            raise self.error("expected a string literal")
        self.i += 1
        return _unquote(t.text)

    # program
    def program(self):
        classes, network, main, has_main = [], [], [], False
        while self.peek().kind != "eof":
            if self.at("@") or self.at("signal"):
                classes.append(self.class_decl())
            elif self.at("network"):
                self.i += 1
                network.extend(self.block(lets_only=True))
            elif self.at("main"):
                if has_main:
                    raise self.error("only one main block is allowed")
                self.i += 1
                main.extend(self.block(lets_only=False))
                has_main = True
            else:
                raise self.error(f"unexpected {self.peek().text!r} at top level")
        return Program(tuple(classes), tuple(network), tuple(main), has_main)

    def annotation(self, ann):
        tok = self.peek()
        self.eat("@")
        key = self.name()
        self.eat("(")
        arg = self.peek()
        if key in ann:
            raise self.error(f"duplicate annotation @{key}", tok)
        if key == "timing":
            text = self.string()
            try:
                ann[key] = parse_timing(text)
            except DSLSyntaxError as exc:
                # report relative to the whole file: skip the opening quote
                raise DSLSyntaxError(exc.msg, len(self.src[:arg.pos + 1].encode()) + exc.offset)
        elif key == "mode":
            text = self.string()
            if text not in ("union", "intersection"):
                raise self.error(f"mode must be union or intersection, not {text!r}", arg)
            ann[key] = text
        elif key == "checkpointInterval":
            if arg.kind != "num" or "." in arg.text or int(arg.text) < 1:
                raise self.error("checkpointInterval takes a positive integer", arg)
            self.i += 1
            ann[key] = int(arg.text)
        else:
            raise self.error(f"unknown annotation @{key}", tok)
        self.eat(")")

    def class_decl(self):
        ann = {}
        while self.at("@"):
            self.annotation(ann)
        self.eat("signal")
        self.eat("class")
        cname = self.name()
        self.eat("{")
        signals, upstreams, methods = [], [], []
        while not self.at("}"):
            if self.at("persistent"):
                self.i += 1
                self.eat("signal")
                signals.append(self.signal_decl(True))
                while self.at(","):
                    self.i += 1
                    signals.append(self.signal_decl(True))
                self.eat(";")
            elif self.at("signal"):
                self.i += 1
                tok = self.peek()
                decl = self.signal_decl(False)
                if decl.body is None:
                    raise self.error(f"signal {decl.name} needs a defining expression", tok)
                signals.append(decl)
                self.eat(";")
            elif self.peek().kind == "name" and self.at("(", 1):
                mname = self.name()
                self.eat("(")
                self.eat(")")
                self.eat("{")
                body = self.expr()
                self.eat(";")
                self.eat("}")
                methods.append(MethodDecl(mname, body))
            elif self.peek().kind == "name" and self.peek(1).kind == "name":
                ucls = self.name()
                upstreams.append(UpstreamField(self.name(), ucls))
                while self.at(","):
                    self.i += 1
                    upstreams.append(UpstreamField(self.name(), ucls))
                self.eat(";")
            else:
                raise self.error(f"unexpected {self.peek().text!r} in class body")
        self.eat("}")
        names = [s.name for s in signals] + [u.slot for u in upstreams] + [m.name for m in methods]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise self.error(f"class {cname} declares {dup[0]!r} more than once")
        return SignalClassDecl(cname, ann.get("mode"), ann.get("timing"),
                               ann.get("checkpointInterval"), tuple(signals),
                               tuple(upstreams), tuple(methods))

    def signal_decl(self, persistent):
        typ = None
        if self.peek().kind == "name" and self.peek(1).kind == "name":
            typ = self.name()
        sname = self.name()
        body = init = None
        if self.at("="):
            self.i += 1
            body = self.expr()
        if self.at("init"):
            self.i += 1
            t = self.peek()
            if t.kind not in ("name", "num", "str"):
                raise self.error("init takes a literal or a name")
            self.i += 1
            init = _unquote(t.text) if t.kind == "str" else t.text
        return SignalDecl(sname, persistent, typ, body, init)

    def block(self, lets_only):
        self.eat("{")
        out = []
        while not self.at("}"):
            if self.at("let"):
                self.i += 1
                var = self.name()
                self.eat("=")
                if not self.at("new"):
                    raise self.error("let only binds new instances")
                out.append(Let(var, self.new()))
            elif lets_only:
                raise self.error("network blocks contain only let statements")
            else:
                out.append(ExprStmt(self.expr()))
            self.eat(";")
        self.eat("}")
        return out

    def new(self):
        self.eat("new")
        cname = self.name()
        self.eat("(")
        ident = self.string()
        args = []
        while self.at(","):
            self.i += 1
            args.append(self.new() if self.at("new") else Name(self.name()))
        self.eat(")")
        return New(cname, ident, tuple(args))

    # expressions
    def expr(self, level=0):
        if level == len(_BINARY):
            return self.postfix()
        left = self.expr(level + 1)
        while self.peek().kind == "op" and self.peek().text in _BINARY[level]:
            op = self.peek().text
            self.i += 1
            left = BinOp(op, left, self.expr(level + 1))
        return left

    def args(self):
        self.eat("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.at(","):
                self.i += 1
                out.append(self.expr())
        self.eat(")")
        return tuple(out)

    def postfix(self):
        e = self.primary()
        while self.at("."):
            self.i += 1
            member = self.name()
            e = Call(e, member, self.args()) if self.at("(") else Member(e, member)
        return e

    def primary(self):
        t = self.peek()
        if t.kind == "num":
            self.i += 1
            return Num(t.text)
        if t.kind == "str":
            self.i += 1
            return Str(_unquote(t.text))
        if self.at("new"):
            return self.new()
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        if t.kind == "name":
            self.i += 1
            if self.at("("):
                return Call(None, t.text, self.args())
            return Name(t.text)
        raise self.error(f"unexpected {t.text or 'end of input'!r} in expression")


def parse_program(src):
    return _Parser(src).program()


def parse_expr(src):
    p = _Parser(src)
    e = p.expr()
    if p.peek().kind != "eof":
        raise p.error("trailing input after expression")
    return e


# ----------------------------------------------------------------- printer

def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def unparse_expr(e):
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Str):
        return _quote(e.text)
    if isinstance(e, Member):
        return f"{unparse_expr(e.recv)}.{e.name}"
    if isinstance(e, Call):
        args = ", ".join(unparse_expr(a) for a in e.args)
        head = e.name if e.recv is None else f"{unparse_expr(e.recv)}.{e.name}"
        return f"{head}({args})"
    if isinstance(e, BinOp):
        # fully parenthesised so re-parsing cannot change associativity
        return f"({unparse_expr(e.left)} {e.op} {unparse_expr(e.right)})"
    if isinstance(e, New):
        args = "".join(", " + unparse_expr(a) for a in e.args)
        return f"new {e.cls}({_quote(e.id)}{args})"
    raise TypeError(f"not a surface expression: {e!r}")


def _unparse_init(v):
    return v if re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*|\d+(?:\.\d+)?", v) else _quote(v)


def unparse_class(c):
    lines = []
    ann = []
    if c.timing is not None:
        ann.append(f"@timing({_quote(str(c.timing))})")
    if c.mode is not None:
        ann.append(f"@mode({_quote(c.mode)})")
    if c.checkpoint_interval is not None:
        ann.append(f"@checkpointInterval({c.checkpoint_interval})")
    if ann:
        lines.append(" ".join(ann))
    lines.append(f"signal class {c.name} {{")
    for u in c.upstreams:
        lines.append(f"  {u.cls} {u.slot};")
    for s in c.signals:
        head = "persistent signal" if s.persistent else "signal"
        text = f"  {head} {s.type + ' ' if s.type else ''}{s.name}"
        if s.body is not None:
            text += f" = {unparse_expr(s.body)}"
        if s.init is not None:
            text += f" init {_unparse_init(s.init)}"
        lines.append(text + ";")
    for m in c.methods:
        lines.append(f"  {m.name}() {{ {unparse_expr(m.body)}; }}")
    lines.append("}")
    return "\n".join(lines)


def _unparse_stmt(s):
    if isinstance(s, Let):
        return f"  let {s.var} = {unparse_expr(s.value)};"
    return f"  {unparse_expr(s.expr)};"


def unparse_program(p):
    parts = [unparse_class(c) for c in p.classes]
    if p.network:
        parts.append("network {\n" + "\n".join(_unparse_stmt(s) for s in p.network) + "\n}")
    if p.has_main:
        body = "".join(_unparse_stmt(s) + "\n" for s in p.main)
        parts.append("main {\n" + body + "}")
    return "\n\n".join(parts) + "\n"
