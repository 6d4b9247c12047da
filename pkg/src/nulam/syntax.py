"""Object-language types, contexts, terms, embeddings and substitution.

Everything here is an immutable tree.  Terms use nameless de Bruijn
indices: ``Var(0)`` is the most recently bound variable, and a context is
a tuple of types whose *last* entry is the most recent binding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import BadBaseIndex, TypeMismatch, UnboundVariable

DEFAULT_N_BASE = 2


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, slots=True)
class Base:
    k: int

    def __str__(self):
        return f"'{self.k}"


@dataclass(frozen=True, slots=True)
class Unit:
    def __str__(self):
        return "Unit"


@dataclass(frozen=True, slots=True)
class Prod:
    left: "Ty"
    right: "Ty"

    def __str__(self):
        return f"({self.left}*{self.right})"


@dataclass(frozen=True, slots=True)
class Arrow:
    dom: "Ty"
    cod: "Ty"

    def __str__(self):
        return f"({self.dom}->{self.cod})"


@dataclass(frozen=True, slots=True)
class ListTy:
    elem: "Ty"

    def __str__(self):
        return f"[{self.elem}]"


Ty = Union[Base, Unit, Prod, Arrow, ListTy]

UNIT = Unit()

# A context is a snoc list: ctx[-1] is the most recently bound type.
Ctx = tuple


def check_ty(ty: Ty, n_base, path=()) -> None:
    """Validate every base index in ``ty``; ``n_base=None`` skips the bound
    check (used when re-inferring terms that were already validated)."""
    match ty:
        case Base(k):
            if k < 0 or (n_base is not None and k >= n_base):
                raise BadBaseIndex(k, n_base, path)
        case Unit():
            pass
        case Prod(a, b) | Arrow(a, b):
            check_ty(a, n_base, path)
            check_ty(b, n_base, path)
        case ListTy(a):
            check_ty(a, n_base, path)
        case _:
            raise TypeMismatch("a type", ty, path)


def ctx_lookup(ctx: Ctx, idx: int, path=()) -> Ty:
    if not 0 <= idx < len(ctx):
        raise UnboundVariable(idx, path)
    return ctx[len(ctx) - 1 - idx]


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Var:
    idx: int


@dataclass(frozen=True, slots=True)
class Lam:
    dom: Ty
    body: "Term"


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True, slots=True)
class TT:
    pass


@dataclass(frozen=True, slots=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Fst:
    pair: "Term"


@dataclass(frozen=True, slots=True)
class Snd:
    pair: "Term"


@dataclass(frozen=True, slots=True)
class Nil:
    elem: Ty


@dataclass(frozen=True, slots=True)
class Cons:
    head: "Term"
    tail: "Term"


@dataclass(frozen=True, slots=True)
class Append:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Map:
    fun: "Term"
    xs: "Term"
    dom: Ty  # domain of ``fun``


@dataclass(frozen=True, slots=True)
class Fold:
    step: "Term"
    init: "Term"
    xs: "Term"
    elem: Ty  # element type of ``xs``


Term = Union[Var, Lam, App, TT, Pair, Fst, Snd, Nil, Cons, Append, Map, Fold]


def term_size(t: Term) -> int:
    """Node count; type annotations are free."""
    match t:
        case Var() | TT() | Nil():
            return 1
        case Lam(_, b) | Fst(b) | Snd(b):
            return 1 + term_size(b)
        case App(a, b) | Pair(a, b) | Cons(a, b) | Append(a, b) | Map(a, b, _):
            return 1 + term_size(a) + term_size(b)
        case Fold(a, b, c, _):
            return 1 + term_size(a) + term_size(b) + term_size(c)
    raise AssertionError(t)


def term_children(t: Term) -> tuple:
    """Subterms in path order (the order used by rewrite paths)."""
    match t:
        case Var() | TT() | Nil():
            return ()
        case Lam(_, b):
            return (b,)
        case Fst(b) | Snd(b):
            return (b,)
        case App(a, b) | Pair(a, b) | Cons(a, b) | Append(a, b):
            return (a, b)
        case Map(a, b, _):
            return (a, b)
        case Fold(a, b, c, _):
            return (a, b, c)
    raise AssertionError(t)


def term_with_children(t: Term, children: tuple) -> Term:
    match t:
        case Var() | TT() | Nil():
            return t
        case Lam(dom, _):
            return Lam(dom, *children)
        case Fst(_):
            return Fst(*children)
        case Snd(_):
            return Snd(*children)
        case App(_, _):
            return App(*children)
        case Pair(_, _):
            return Pair(*children)
        case Cons(_, _):
            return Cons(*children)
        case Append(_, _):
            return Append(*children)
        case Map(_, _, dom):
            return Map(children[0], children[1], dom)
        case Fold(_, _, _, elem):
            return Fold(children[0], children[1], children[2], elem)
    raise AssertionError(t)


def is_neutral(t: Term) -> bool:
    """A variable wrapped in stuck eliminators (the scrutinee position of
    each eliminator must itself be neutral)."""
    match t:
        case Var():
            return True
        case App(f, _):
            return is_neutral(f)
        case Fst(p) | Snd(p):
            return is_neutral(p)
        case Map(_, xs, _) | Fold(_, _, xs, _):
            return is_neutral(xs)
        case Append(xs, _):
            return is_neutral(xs)
        case _:
            return False


# ---------------------------------------------------------------------------
# Type inference


def infer(ctx: Ctx, t: Term, n_base: int = DEFAULT_N_BASE, _path=()) -> Ty:
    """The unique type of ``t`` in ``ctx``, or a typing error.

    Annotations on Lam/Nil/Map/Fold make this fully syntax-directed.
    """
    match t:
        case Var(idx):
            return ctx_lookup(ctx, idx, _path)
        case Lam(dom, body):
            check_ty(dom, n_base, _path)
            cod = infer(ctx + (dom,), body, n_base, _path + (0,))
            return Arrow(dom, cod)
        case App(fun, arg):
            fun_ty = infer(ctx, fun, n_base, _path + (0,))
            arg_ty = infer(ctx, arg, n_base, _path + (1,))
            if not isinstance(fun_ty, Arrow):
                raise TypeMismatch("a function type", fun_ty, _path + (0,))
            if fun_ty.dom != arg_ty:
                raise TypeMismatch(fun_ty.dom, arg_ty, _path + (1,))
            return fun_ty.cod
        case TT():
            return UNIT
        case Pair(left, right):
            return Prod(
                infer(ctx, left, n_base, _path + (0,)),
                infer(ctx, right, n_base, _path + (1,)),
            )
        case Fst(pair):
            pair_ty = infer(ctx, pair, n_base, _path + (0,))
            if not isinstance(pair_ty, Prod):
                raise TypeMismatch("a product type", pair_ty, _path + (0,))
            return pair_ty.left
        case Snd(pair):
            pair_ty = infer(ctx, pair, n_base, _path + (0,))
            if not isinstance(pair_ty, Prod):
                raise TypeMismatch("a product type", pair_ty, _path + (0,))
            return pair_ty.right
        case Nil(elem):
            check_ty(elem, n_base, _path)
            return ListTy(elem)
        case Cons(head, tail):
            head_ty = infer(ctx, head, n_base, _path + (0,))
            tail_ty = infer(ctx, tail, n_base, _path + (1,))
            if tail_ty != ListTy(head_ty):
                raise TypeMismatch(ListTy(head_ty), tail_ty, _path + (1,))
            return tail_ty
        case Append(left, right):
            left_ty = infer(ctx, left, n_base, _path + (0,))
            right_ty = infer(ctx, right, n_base, _path + (1,))
            if not isinstance(left_ty, ListTy):
                raise TypeMismatch("a list type", left_ty, _path + (0,))
            if left_ty != right_ty:
                raise TypeMismatch(left_ty, right_ty, _path + (1,))
            return left_ty
        case Map(fun, xs, dom):
            check_ty(dom, n_base, _path)
            fun_ty = infer(ctx, fun, n_base, _path + (0,))
            xs_ty = infer(ctx, xs, n_base, _path + (1,))
            if not isinstance(fun_ty, Arrow) or fun_ty.dom != dom:
                raise TypeMismatch(Arrow(dom, "_"), fun_ty, _path + (0,))
            if xs_ty != ListTy(dom):
                raise TypeMismatch(ListTy(dom), xs_ty, _path + (1,))
            return ListTy(fun_ty.cod)
        case Fold(step, init, xs, elem):
            check_ty(elem, n_base, _path)
            step_ty = infer(ctx, step, n_base, _path + (0,))
            init_ty = infer(ctx, init, n_base, _path + (1,))
            xs_ty = infer(ctx, xs, n_base, _path + (2,))
            want = Arrow(elem, Arrow(init_ty, init_ty))
            if step_ty != want:
                raise TypeMismatch(want, step_ty, _path + (0,))
            if xs_ty != ListTy(elem):
                raise TypeMismatch(ListTy(elem), xs_ty, _path + (2,))
            return init_ty
    raise TypeMismatch("a term", t, _path)


def infers(ctx: Ctx, t: Term, n_base: int = DEFAULT_N_BASE) -> bool:
    try:
        infer(ctx, t, n_base)
        return True
    except Exception:
        return False


# ---------------------------------------------------------------------------
# Order-preserving embeddings


@dataclass(frozen=True, slots=True)
class BaseEmb:
    """The empty embedding: () into ()."""


@dataclass(frozen=True, slots=True)
class Pop:
    """Extend both source and target with ``ty``."""

    rest: "Ope"
    ty: Ty


@dataclass(frozen=True, slots=True)
class Step:
    """Extend only the target with ``ty`` (the source skips the new slot)."""

    rest: "Ope"
    ty: Ty


Ope = Union[BaseEmb, Pop, Step]


def ope_src(ope: Ope) -> Ctx:
    match ope:
        case BaseEmb():
            return ()
        case Pop(rest, ty):
            return ope_src(rest) + (ty,)
        case Step(rest, _):
            return ope_src(rest)
    raise AssertionError(ope)


def ope_tgt(ope: Ope) -> Ctx:
    match ope:
        case BaseEmb():
            return ()
        case Pop(rest, ty) | Step(rest, ty):
            return ope_tgt(rest) + (ty,)
    raise AssertionError(ope)


def ope_id(ctx: Ctx) -> Ope:
    ope: Ope = BaseEmb()
    for ty in ctx:
        ope = Pop(ope, ty)
    return ope


def ope_is_id(ope: Ope) -> bool:
    while isinstance(ope, Pop):
        ope = ope.rest
    return isinstance(ope, BaseEmb)


def ope_apply(ope: Ope, idx: int) -> int:
    """Transport a de Bruijn index across the embedding."""
    match ope:
        case Pop(rest, _):
            return idx if idx == 0 else 1 + ope_apply(rest, idx - 1)
        case Step(rest, _):
            return 1 + ope_apply(rest, idx)
        case BaseEmb():
            raise UnboundVariable(idx)
    raise AssertionError(ope)


def ope_compose(outer: Ope, inner: Ope) -> Ope:
    """``outer . inner``: first embed along ``inner``, then ``outer``."""
    match outer, inner:
        case BaseEmb(), BaseEmb():
            return outer
        case Step(rest, ty), _:
            return Step(ope_compose(rest, inner), ty)
        case Pop(rest, ty), Step(rest2, _):
            return Step(ope_compose(rest, rest2), ty)
        case Pop(rest, ty), Pop(rest2, _):
            return Pop(ope_compose(rest, rest2), ty)
    raise TypeMismatch("composable embeddings", (outer, inner))


def weaken1(ctx: Ctx, ty: Ty) -> Ope:
    """The embedding of ``ctx`` into ``ctx + (ty,)``."""
    return Step(ope_id(ctx), ty)


def weaken_term(ope: Ope, t: Term) -> Term:
    """Transport ``t`` from the embedding's source to its target context."""
    match t:
        case Var(idx):
            return Var(ope_apply(ope, idx))
        case Lam(dom, body):
            return Lam(dom, weaken_term(Pop(ope, dom), body))
        case TT() | Nil():
            return t
        case _:
            return term_with_children(
                t, tuple(weaken_term(ope, c) for c in term_children(t))
            )


def shift_term(t: Term, ctx: Ctx, ty: Ty) -> Term:
    """Weaken by one fresh slot of type ``ty`` on top of ``ctx``."""
    return weaken_term(weaken1(ctx, ty), t)


# ---------------------------------------------------------------------------
# Parallel substitution


@dataclass(frozen=True, slots=True)
class Subst:
    """One target-context term per source-context slot (positional)."""

    tgt: Ctx
    terms: tuple

    def lookup(self, idx: int) -> Term:
        if not 0 <= idx < len(self.terms):
            raise UnboundVariable(idx)
        return self.terms[len(self.terms) - 1 - idx]

    def extend_under_binder(self, dom: Ty) -> "Subst":
        """Lift under one binder: shift every entry, bind Var(0) to itself."""
        ope = weaken1(self.tgt, dom)
        return Subst(
            self.tgt + (dom,),
            tuple(weaken_term(ope, u) for u in self.terms) + (Var(0),),
        )


def subst_id(ctx: Ctx) -> Subst:
    n = len(ctx)
    return Subst(ctx, tuple(Var(n - 1 - i) for i in range(n)))


def subst_apply(rho: Subst, t: Term) -> Term:
    match t:
        case Var(idx):
            return rho.lookup(idx)
        case Lam(dom, body):
            return Lam(dom, subst_apply(rho.extend_under_binder(dom), body))
        case TT() | Nil():
            return t
        case _:
            return term_with_children(
                t, tuple(subst_apply(rho, c) for c in term_children(t))
            )


def subst_single(ctx: Ctx, dom: Ty, body: Term, arg: Term) -> Term:
    """``body[arg/Var 0]`` for a binder of type ``dom`` over ``ctx``."""
    rho = Subst(ctx, subst_id(ctx).terms + (arg,))
    return subst_apply(rho, body)
