"""Human-readable syntax: a recursive-descent parser, a name-resolving
elaborator into the nameless core, and a precedence-aware printer.

Grammar (whitespace-insensitive)::

    type    ::= prod ("->" type)?
    prod    ::= atomT ("*" prod)?
    atomT   ::= "Unit" | "'" nat | "[" type "]" | "(" type ")"
    term    ::= "\\" ident ":" type "." term | cons
    cons    ::= app (("::" | "++") cons)?
    app     ::= app atom | "fst" atom | "snd" atom
              | "map" atom atom | "fold" atom atom atom | atom
    atom    ::= ident | "()" | "nil" ":" atomT
              | "(" term ")" | "(" term "," term ")"
    context ::= (ident ":" type) ("," ident ":" type)*

Lambdas and nil carry mandatory annotations, so elaboration is plain
inference with no checking pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ParseError, TypeMismatch, UnknownName
from .normal import Nf, embed_nf
from .syntax import (
    App,
    Append,
    Arrow,
    Base,
    Cons,
    Ctx,
    DEFAULT_N_BASE,
    Fold,
    Fst,
    Lam,
    ListTy,
    Map,
    Nil,
    Pair,
    Prod,
    Snd,
    TT,
    Term,
    Ty,
    UNIT,
    Unit,
    Var,
    infer,
)

KEYWORDS = {"fst", "snd", "map", "fold", "nil", "Unit"}


# ---------------------------------------------------------------------------
# Surface trees


@dataclass(frozen=True, slots=True)
class SVar:
    name: str


@dataclass(frozen=True, slots=True)
class SLam:
    name: str
    ty: Ty
    body: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SApp:
    fun: "SurfaceTerm"
    arg: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class STT:
    pass


@dataclass(frozen=True, slots=True)
class SPair:
    left: "SurfaceTerm"
    right: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SFst:
    pair: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SSnd:
    pair: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SNil:
    ty: Ty  # the full list type written after the colon


@dataclass(frozen=True, slots=True)
class SCons:
    head: "SurfaceTerm"
    tail: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SAppend:
    left: "SurfaceTerm"
    right: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SMap:
    fun: "SurfaceTerm"
    xs: "SurfaceTerm"


@dataclass(frozen=True, slots=True)
class SFold:
    step: "SurfaceTerm"
    init: "SurfaceTerm"
    xs: "SurfaceTerm"


SurfaceTerm = Union[
    SVar, SLam, SApp, STT, SPair, SFst, SSnd, SNil, SCons, SAppend, SMap, SFold
]

# Surface types have no names to resolve, so they are core types already.
SurfaceCtx = tuple  # of (name, Ty)


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_SYMBOLS = ["()", "->", "::", "++", "\\", ":", ".", "(", ")", "[", "]", "*", ",", "'"]


def tokenize(src: str) -> list:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            col += 1
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            tokens.append(Token("nat", src[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(line, col, f"unexpected character {c!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(tok.line, tok.col, message)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind != "eof" and tok.text == text

    def done(self) -> bool:
        return self.peek().kind == "eof"

    # types

    def parse_type(self) -> Ty:
        left = self.parse_prod()
        if self.at("->"):
            self.next()
            return Arrow(left, self.parse_type())
        return left

    def parse_prod(self) -> Ty:
        left = self.parse_atom_type()
        if self.at("*"):
            self.next()
            return Prod(left, self.parse_prod())
        return left

    def parse_atom_type(self) -> Ty:
        tok = self.peek()
        if tok.text == "Unit":
            self.next()
            return UNIT
        if tok.text == "'":
            self.next()
            num = self.peek()
            if num.kind != "nat":
                self.fail("expected a base type index after '")
            self.next()
            return Base(int(num.text))
        if tok.text == "[":
            self.next()
            inner = self.parse_type()
            self.expect("]")
            return ListTy(inner)
        if tok.text == "(":
            self.next()
            inner = self.parse_type()
            self.expect(")")
            return inner
        self.fail(f"expected a type, found {tok.text or 'end of input'!r}")

    # terms

    def parse_term(self) -> SurfaceTerm:
        if self.at("\\"):
            self.next()
            name = self.parse_ident("expected a binder name after \\")
            self.expect(":")
            ty = self.parse_type()
            self.expect(".")
            return SLam(name, ty, self.parse_term())
        return self.parse_cons()

    def parse_cons(self) -> SurfaceTerm:
        left = self.parse_app()
        if self.at("::"):
            self.next()
            return SCons(left, self.parse_cons())
        if self.at("++"):
            self.next()
            return SAppend(left, self.parse_cons())
        return left

    def parse_app(self) -> SurfaceTerm:
        tok = self.peek()
        if tok.text == "fst":
            self.next()
            return SFst(self.parse_atom())
        if tok.text == "snd":
            self.next()
            return SSnd(self.parse_atom())
        if tok.text == "map":
            self.next()
            fun = self.parse_atom()
            return SMap(fun, self.parse_atom())
        if tok.text == "fold":
            self.next()
            step = self.parse_atom()
            init = self.parse_atom()
            return SFold(step, init, self.parse_atom())
        t = self.parse_atom()
        while self.starts_atom():
            t = SApp(t, self.parse_atom())
        return t

    def starts_atom(self) -> bool:
        tok = self.peek()
        if tok.kind == "ident":
            return True
        return tok.text in ("()", "(", "nil")

    def parse_atom(self) -> SurfaceTerm:
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            return SVar(tok.text)
        if tok.text == "()":
            self.next()
            return STT()
        if tok.text == "nil":
            self.next()
            self.expect(":")
            ty = self.parse_atom_type()
            if not isinstance(ty, ListTy):
                raise ParseError(tok.line, tok.col, "nil needs a list type annotation")
            return SNil(ty)
        if tok.text == "(":
            self.next()
            inner = self.parse_term()
            if self.at(","):
                self.next()
                right = self.parse_term()
                self.expect(")")
                return SPair(inner, right)
            self.expect(")")
            return inner
        self.fail(f"expected a term, found {tok.text or 'end of input'!r}")

    def parse_ident(self, message: str) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(message)
        self.next()
        return tok.text

    # contexts

    def parse_context(self) -> SurfaceCtx:
        entries = []
        name = self.parse_ident("expected a variable name")
        self.expect(":")
        entries.append((name, self.parse_type()))
        while self.at(","):
            self.next()
            name = self.parse_ident("expected a variable name")
            self.expect(":")
            entries.append((name, self.parse_type()))
        return tuple(entries)


def parse(src: str, kind: str = "term"):
    """Parse a ``term``, ``type`` or ``context``; raises ParseError with a
    line/column on bad input."""
    p = _Parser(src)
    if kind == "term":
        out = p.parse_term()
    elif kind == "type":
        out = p.parse_type()
    elif kind == "context":
        out = p.parse_context() if not p.done() else ()
    else:
        raise ValueError(f"unknown parse kind {kind!r}")
    if not p.done():
        p.fail(f"trailing input {p.peek().text!r}")
    return out


# ---------------------------------------------------------------------------
# Elaboration


def elaborate(sctx: SurfaceCtx, st: SurfaceTerm, n_base: int = DEFAULT_N_BASE):
    """Resolve names to indices and infer the type.

    Returns ``(ctx, term, ty)``; shadowing is allowed, innermost wins.
    """
    ctx: Ctx = tuple(ty for _, ty in sctx)
    names = [name for name, _ in sctx]

    def resolve(scope: list, name: str) -> int:
        for depth, bound in enumerate(reversed(scope)):
            if bound == name:
                return depth
        raise UnknownName(name)

    def go(scope: list, local_ctx: Ctx, s: SurfaceTerm) -> Term:
        match s:
            case SVar(name):
                return Var(resolve(scope, name))
            case SLam(name, ty, body):
                return Lam(ty, go(scope + [name], local_ctx + (ty,), body))
            case SApp(fun, arg):
                return App(go(scope, local_ctx, fun), go(scope, local_ctx, arg))
            case STT():
                return TT()
            case SPair(left, right):
                return Pair(go(scope, local_ctx, left), go(scope, local_ctx, right))
            case SFst(pair):
                return Fst(go(scope, local_ctx, pair))
            case SSnd(pair):
                return Snd(go(scope, local_ctx, pair))
            case SNil(ty):
                return Nil(ty.elem)
            case SCons(head, tail):
                return Cons(go(scope, local_ctx, head), go(scope, local_ctx, tail))
            case SAppend(left, right):
                return Append(go(scope, local_ctx, left), go(scope, local_ctx, right))
            case SMap(fun, xs):
                fun_core = go(scope, local_ctx, fun)
                xs_core = go(scope, local_ctx, xs)
                fun_ty = infer(local_ctx, fun_core, n_base)
                if not isinstance(fun_ty, Arrow):
                    raise TypeMismatch("a function type", fun_ty)
                return Map(fun_core, xs_core, fun_ty.dom)
            case SFold(step, init, xs):
                step_core = go(scope, local_ctx, step)
                init_core = go(scope, local_ctx, init)
                xs_core = go(scope, local_ctx, xs)
                xs_ty = infer(local_ctx, xs_core, n_base)
                if not isinstance(xs_ty, ListTy):
                    raise TypeMismatch("a list type", xs_ty)
                return Fold(step_core, init_core, xs_core, xs_ty.elem)
        raise AssertionError(s)

    term = go(names, ctx, st)
    ty = infer(ctx, term, n_base)
    return ctx, term, ty


# ---------------------------------------------------------------------------
# Printing


def pretty_ty(ty: Ty, prec: int = 0) -> str:
    match ty:
        case Base(k):
            return f"'{k}"
        case Unit():
            return "Unit"
        case ListTy(elem):
            return f"[{pretty_ty(elem, 0)}]"
        case Prod(a, b):
            s = f"{pretty_ty(a, 2)}*{pretty_ty(b, 1)}"
            return f"({s})" if prec > 1 else s
        case Arrow(a, b):
            s = f"{pretty_ty(a, 1)} -> {pretty_ty(b, 0)}"
            return f"({s})" if prec > 0 else s
    raise AssertionError(ty)


def _fresh_names(used: set):
    i = 0
    while True:
        name = f"x{i}"
        if name not in used:
            used.add(name)
            yield name
        i += 1


# printing precedence levels: 0 lambda, 1 cons/append, 2 application, 3 atom


def pretty(names, t) -> str:
    """Print a term or normal form so that it re-parses to the same core
    term.  ``names`` gives one name per context slot, first slot first;
    binders get fresh names x0, x1, ... avoiding those."""
    if not isinstance(
        t, (Var, Lam, App, TT, Pair, Fst, Snd, Nil, Cons, Append, Map, Fold)
    ):
        t = embed_nf(t)
    used = set(names)
    fresh = _fresh_names(used)

    def go(scope: list, u: Term, prec: int) -> str:
        match u:
            case Var(idx):
                if idx >= len(scope):
                    raise UnknownName(f"#{idx}")
                return scope[len(scope) - 1 - idx]
            case Lam(dom, body):
                name = next(fresh)
                s = f"\\{name}:{pretty_ty(dom)}. {go(scope + [name], body, 0)}"
                return f"({s})" if prec > 0 else s
            case Cons(head, tail):
                s = f"{go(scope, head, 3)} :: {go(scope, tail, 1)}"
                return f"({s})" if prec > 1 else s
            case Append(left, right):
                s = f"{go(scope, left, 3)} ++ {go(scope, right, 1)}"
                return f"({s})" if prec > 1 else s
            case App(fun, arg):
                s = f"{go(scope, fun, 2)} {go(scope, arg, 3)}"
                return f"({s})" if prec > 2 else s
            case Fst(pair):
                s = f"fst {go(scope, pair, 3)}"
                return f"({s})" if prec > 2 else s
            case Snd(pair):
                s = f"snd {go(scope, pair, 3)}"
                return f"({s})" if prec > 2 else s
            case Map(fun, xs, _):
                s = f"map {go(scope, fun, 3)} {go(scope, xs, 3)}"
                return f"({s})" if prec > 2 else s
            case Fold(step, init, xs, _):
                s = f"fold {go(scope, step, 3)} {go(scope, init, 3)} {go(scope, xs, 3)}"
                return f"({s})" if prec > 2 else s
            case TT():
                return "()"
            case Pair(left, right):
                return f"({go(scope, left, 0)}, {go(scope, right, 0)})"
            case Nil(elem):
                return f"nil:[{pretty_ty(elem)}]"
        raise AssertionError(u)

    return go(list(names), t, 0)


def pretty_ctx(sctx: SurfaceCtx) -> str:
    return ", ".join(f"{name}:{pretty_ty(ty)}" for name, ty in sctx)
